"""Calibration functions mapping a covariate to the copula correlation.

Two families are supported, selected by name:

* ``"quadratic"``: theta(x) = b1 + b2 * x**2            (2 coefficients)
* ``"expbump"``:   theta(x) = b1 + b2*x + b3*exp(-b4*x**2)   (4 coefficients)

The unconstrained calibration value is carried into the correlation domain
by ``link_rho``: rho = 2 / (|theta| + 1) - 1, which maps the real line onto
(-1, 1] (rho = 1 exactly at theta = 0, rho -> -1 only in the limit).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .copulas import gaussian_copula_density

__all__ = [
    "CALIBRATION_FAMILIES",
    "CalibrationSpec",
    "eval_calibration",
    "link_rho",
    "conditional_density",
    "RHO_CLAMP",
]

CALIBRATION_FAMILIES = {"quadratic": 2, "expbump": 4}

# Correlation clamp applied before density evaluation: theta = 0 yields
# rho = 1 where the Gaussian copula density is singular, and huge |theta|
# can round to exactly -1 in floating point.
RHO_CLAMP = 1.0 - 1e-10


@dataclass(frozen=True)
class CalibrationSpec:
    """Which calibration family is in force; ``dim`` is its coefficient count."""

    family: str

    def __post_init__(self):
        if self.family not in CALIBRATION_FAMILIES:
            raise ValueError(
                f"unknown calibration family {self.family!r}; "
                f"expected one of {sorted(CALIBRATION_FAMILIES)}"
            )

    @property
    def dim(self) -> int:
        return CALIBRATION_FAMILIES[self.family]


def _check_beta(spec: CalibrationSpec, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1] != spec.dim:
        raise ValueError(
            f"calibration family {spec.family!r} takes {spec.dim} coefficients, "
            f"got {beta.shape[-1]}"
        )
    if not np.all(np.isfinite(beta)):
        raise ValueError("calibration coefficients must be finite")
    return beta


def eval_calibration(spec: CalibrationSpec, beta, x):
    """Evaluate theta(x | beta).

    ``beta`` may be a single coefficient vector (dim,) or a stack (m, dim);
    ``x`` a scalar or vector. A stacked beta against a vector x returns the
    (m, n) matrix of calibration values.
    """
    beta = _check_beta(spec, beta)
    x = np.asarray(x, dtype=float)
    coeffs = [beta[..., j] for j in range(spec.dim)]
    if beta.ndim == 2 and x.ndim == 1:
        coeffs = [c[:, np.newaxis] for c in coeffs]
        x = x[np.newaxis, :]

    if spec.family == "quadratic":
        theta = coeffs[0] + coeffs[1] * x * x
    else:
        theta = coeffs[0] + coeffs[1] * x + coeffs[2] * np.exp(-coeffs[3] * x * x)
    if np.ndim(theta) == 0:
        return float(theta)
    return theta


def link_rho(theta):
    """Map a calibration value onto the correlation domain (-1, 1].

    Even in theta and strictly decreasing in |theta|; theta = 0 gives
    rho = 1 exactly.
    """
    theta = np.asarray(theta, dtype=float)
    out = 2.0 / (np.abs(theta) + 1.0) - 1.0
    return float(out) if out.ndim == 0 else out


def clamped_rho(theta):
    """``link_rho`` clamped into [-RHO_CLAMP, RHO_CLAMP] for density use."""
    return np.clip(link_rho(theta), -RHO_CLAMP, RHO_CLAMP)


def conditional_density(u, v, x, beta, spec: CalibrationSpec):
    """Conditional Gaussian copula density at covariate value ``x``.

    Exactly the composition gaussian_copula_density(u, v,
    link_rho(eval_calibration(...))), with the correlation clamped away
    from the singular boundary.
    """
    rho = clamped_rho(eval_calibration(spec, beta, x))
    return gaussian_copula_density(u, v, rho)
