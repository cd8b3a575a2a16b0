"""Log-log slope fits."""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from ..errors import DataError

__all__ = ["RateFit", "fit_rate"]

FLOOR = 1e-12
MIN_POINTS = 4


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log2 x, log2 |value|)."""

    xs: Tuple[float, ...]
    values: Tuple[float, ...]
    slope: float
    intercept: float
    max_residual: float

    def to_dict(self) -> dict:
        return {
            "xs": list(self.xs),
            "values": list(self.values),
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
        }


def fit_rate(xs: Sequence[float], values: Sequence[float], floor: float = FLOOR, min_points: int = MIN_POINTS) -> RateFit:
    """Fit |value| ~ C x^slope, dropping values below ``floor``.

    Raises:
        DataError: fewer than ``min_points`` usable points, or a single x
    """
    kept = [(float(x), abs(float(v))) for x, v in zip(xs, values) if x > 0 and np.isfinite(v) and abs(v) >= floor]
    if len(kept) < min_points:
        raise DataError(f"rate fit needs {min_points} points above {floor}, got {len(kept)}")
    lx = np.log2([x for x, _ in kept])
    ly = np.log2([v for _, v in kept])
    if np.ptp(lx) == 0:
        raise DataError("rate fit needs at least two distinct x values")
    fit = linregress(lx, ly)
    residual = float(np.max(np.abs(ly - (fit.slope * lx + fit.intercept))))
    return RateFit(
        tuple(x for x, _ in kept),
        tuple(v for _, v in kept),
        float(fit.slope),
        float(fit.intercept),
        residual,
    )
