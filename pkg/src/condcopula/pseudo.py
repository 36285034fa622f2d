"""Rank transform to pseudo-observations and its empirical inverse.

Raw bivariate responses are mapped marginal-by-marginal to rescaled ranks
r/(n+1), which land strictly inside (0, 1) and are invariant under any
strictly increasing transform of a margin. Ties get average ranks. The
inverse maps a unit-interval coordinate back to the data scale through the
empirical quantile (order statistics with linear interpolation), so the
round trip on observed points is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

__all__ = ["Dataset", "PseudoDataset", "to_pseudo", "from_pseudo", "clamp_unit"]


def _column(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"column {name!r} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"column {name!r} contains non-finite values")
    return arr


@dataclass
class Dataset:
    """Raw bivariate responses with one covariate value per observation."""

    y1: np.ndarray
    y2: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.y1 = _column("y1", self.y1)
        self.y2 = _column("y2", self.y2)
        self.x = _column("x", self.x)
        if not (len(self.y1) == len(self.y2) == len(self.x)):
            raise ValueError("y1, y2 and x must have equal length")
        if len(self.y1) < 2:
            raise ValueError("at least two observations are required")

    @property
    def n(self) -> int:
        return len(self.y1)


@dataclass
class PseudoDataset:
    """Rank-transformed observations in (0,1)^2 with their covariate values."""

    u: np.ndarray
    v: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.u = _column("u", self.u)
        self.v = _column("v", self.v)
        self.x = _column("x", self.x)
        if not (len(self.u) == len(self.v) == len(self.x)):
            raise ValueError("u, v and x must have equal length")
        if len(self.u) < 1:
            raise ValueError("at least one observation is required")
        if np.any(self.u <= 0) or np.any(self.u >= 1) or np.any(self.v <= 0) or np.any(self.v >= 1):
            raise ValueError("pseudo-observations must lie strictly inside (0, 1)")

    @property
    def n(self) -> int:
        return len(self.u)


def to_pseudo(data: Dataset) -> PseudoDataset:
    """Rank-transform both margins: u_i = rank(y1_i)/(n+1), same for v."""
    n = data.n
    u = rankdata(data.y1, method="average") / (n + 1)
    v = rankdata(data.y2, method="average") / (n + 1)
    return PseudoDataset(u=u, v=v, x=data.x.copy())


def from_pseudo(u, reference) -> np.ndarray | float:
    """Empirical quantile of ``reference`` at level ``u``.

    Inverse of the rank transform: order statistics interpolated so that
    level r/(n+1) recovers the r-th order statistic exactly.
    """
    reference = np.asarray(reference, dtype=float)
    if reference.size == 0:
        raise ValueError("reference column must be nonempty")
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0) or np.any(u_arr >= 1):
        raise ValueError("levels must lie strictly inside (0, 1)")
    out = np.quantile(reference, u_arr, method="weibull")
    return float(out) if np.ndim(u) == 0 else out


def clamp_unit(values, n: int) -> np.ndarray:
    """Clamp unit-interval coordinates to [1/(2n), 1 - 1/(2n)].

    The rank transform never reaches {0, 1}; this guards file-supplied
    pseudo-observations before the normal-quantile transform.
    """
    half = 1.0 / (2.0 * n)
    return np.clip(np.asarray(values, dtype=float), half, 1.0 - half)
