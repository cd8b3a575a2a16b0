import pytest

from hyperjac.config import get_settings


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Reports go to a temporary directory; settings are re-read per test."""
    monkeypatch.setenv("HYPERJAC_REPORT_DIR", str(tmp_path / "reports"))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
