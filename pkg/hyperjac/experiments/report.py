"""Experiment reports: one JSON document and one CSV table per family."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import orjson
import pandas as pd

__all__ = ["RateExperiment", "dumps", "write_report"]

logger = logging.getLogger(__name__)

# row keys -> CSV column headers, in column order
COLUMNS = {
    "k": "k",
    "eps": "eps",
    "minor_integral": "minor_integral",
    "quadrature": "minor_integral_quadrature",
    "cross_check": "minor_integral_vector_route",
    "diagonal": "diagonal_integral",
    "off_diagonal": "off_diagonal_integral",
    "diagonal_over_log_k": "diagonal_over_log_k",
    "dominant": "diagonal_dominates",
    "split_residual": "split_residual",
    "frequencies": "frequencies",
    "norm": "sobolev_norm",
    "guard": "guard",
}


@dataclass
class RateExperiment:
    family: str
    config: dict
    rows: List[dict]
    fits: Dict[str, dict] = field(default_factory=dict)
    verdicts: Dict[str, bool] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "config": self.config,
            "rows": self.rows,
            "fits": self.fits,
            "verdicts": self.verdicts,
            "notes": self.notes,
            "passed": self.passed,
        }


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> bytes:
    """Stable JSON: sorted keys, two-space indent, trailing newline."""
    option = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_APPEND_NEWLINE
    return orjson.dumps(obj, default=_default, option=option)


def _table(rows: List[dict]) -> pd.DataFrame:
    frame = pd.DataFrame(rows)
    ordered = [c for c in COLUMNS if c in frame.columns]
    extra = sorted(c for c in frame.columns if c not in COLUMNS)
    return frame[ordered + extra].rename(columns=COLUMNS)


def write_report(
    report: Union[RateExperiment, dict], directory: Union[str, Path], name: Optional[str] = None
) -> Tuple[Path, Optional[Path]]:
    """Write ``<name>.json`` and, when there are rows, ``<name>.csv`` under ``directory``."""
    # --- 1. Paths ---------------------------------------------------------
    payload = report.to_dict() if isinstance(report, RateExperiment) else report
    name = name or payload.get("family") or payload.get("suite") or "report"
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{name}.json"

    # --- 2. JSON document -------------------------------------------------
    json_path.write_bytes(dumps(payload))
    logger.info("wrote %s", json_path)

    # --- 3. CSV flattening of the rows -----------------------------------
    rows = payload.get("rows")
    if not rows:
        return json_path, None
    csv_path = out_dir / f"{name}.csv"
    _table(rows).to_csv(csv_path, index=False)
    logger.info("wrote %s", csv_path)
    return json_path, csv_path
