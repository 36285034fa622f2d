"""Scalar/vector kernels: normal CDF and quantile, Gaussian copula density,
CDF and sampler, and a Frank copula sampler for synthetic data.

All functions accept scalars or numpy arrays (broadcasting) and take an
explicit ``numpy.random.Generator`` where randomness is involved, so they
are safe for concurrent use with independent generators.
"""

from __future__ import annotations

import numpy as np
from scipy import special
from scipy.integrate import quad

__all__ = [
    "SingularCorrelationError",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "gaussian_copula_density",
    "gaussian_copula_logpdf_scores",
    "gaussian_copula_cdf",
    "gaussian_copula_kendall_tau",
    "sample_gaussian_copula",
    "sample_frank_copula",
    "frank_kendall_tau",
    "frank_theta_for_tau",
]

_SQRT2 = np.sqrt(2.0)
_LOG_2PI = np.log(2.0 * np.pi)

# Gauss-Legendre rule reused by the bivariate normal CDF reduction.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


class SingularCorrelationError(ValueError):
    """Correlation of +/-1 where a nondegenerate Gaussian copula is required."""


def std_normal_cdf(z):
    """Standard normal CDF via the complementary error function."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * special.erfc(-z / _SQRT2)
    return float(out) if out.ndim == 0 else out


def std_normal_pdf(z):
    """Standard normal density."""
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z - 0.5 * _LOG_2PI)
    return float(out) if out.ndim == 0 else out


# Coefficients of Acklam's rational approximation to the normal quantile.
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_ACK_SPLIT = 0.02425


def _polyval(coeffs, x):
    out = np.full_like(x, coeffs[0])
    for c in coeffs[1:]:
        out = out * x + c
    return out


def std_normal_quantile(p):
    """Inverse standard normal CDF.

    Rational approximation (Acklam) refined by one Newton step on
    ``std_normal_cdf``; accurate to near machine precision on (0, 1).
    Raises ``ValueError`` outside the open unit interval.
    """
    p_in = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p_in)) or np.any(p_in <= 0.0) or np.any(p_in >= 1.0):
        raise ValueError("quantile argument must lie strictly in (0, 1)")

    p = np.atleast_1d(p_in)
    x = np.empty_like(p)
    lower = p < _ACK_SPLIT
    upper = p > 1.0 - _ACK_SPLIT
    central = ~(lower | upper)

    if np.any(central):
        q = p[central] - 0.5
        r = q * q
        x[central] = (_polyval(_ACK_A, r) * q) / (_polyval(_ACK_B, r) * r + 1.0)
    if np.any(lower):
        q = np.sqrt(-2.0 * np.log(p[lower]))
        x[lower] = _polyval(_ACK_C, q) / (_polyval(_ACK_D, q) * q + 1.0)
    if np.any(upper):
        q = np.sqrt(-2.0 * np.log(1.0 - p[upper]))
        x[upper] = -_polyval(_ACK_C, q) / (_polyval(_ACK_D, q) * q + 1.0)

    # One Newton refinement; the pdf never underflows where the raw
    # approximation is used (|x| < 39).
    err = std_normal_cdf(x) - p
    x = x - err / std_normal_pdf(x)
    return float(x[0]) if p_in.ndim == 0 else x.reshape(p_in.shape)


def _check_unit_open(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0) or np.any(v <= 0.0) or np.any(v >= 1.0):
        raise ValueError("copula arguments must lie strictly inside (0, 1)")
    return u, v


def _check_nonsingular(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) >= 1.0):
        raise SingularCorrelationError("correlation must satisfy |rho| < 1")
    return rho


def gaussian_copula_logpdf_scores(z1, z2, rho):
    """Gaussian copula log-density at precomputed normal scores.

    ``z1``, ``z2`` are the quantile-transformed coordinates; no argument
    validation is performed (hot path, |rho| < 1 assumed).
    """
    omr2 = 1.0 - rho * rho
    quad_form = (rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2) / omr2
    return -0.5 * np.log(omr2) - 0.5 * quad_form


def gaussian_copula_density(u, v, rho):
    """Gaussian copula density c_rho(u, v) for |rho| < 1."""
    u, v = _check_unit_open(u, v)
    rho = _check_nonsingular(rho)
    z1 = std_normal_quantile(u)
    z2 = std_normal_quantile(v)
    out = np.exp(gaussian_copula_logpdf_scores(z1, z2, rho))
    return float(out) if np.ndim(out) == 0 else out


def gaussian_copula_cdf(u, v, rho):
    """Gaussian copula CDF: the bivariate normal CDF at the normal scores.

    Uses the single-quadrature reduction
    Phi2(h, k, rho) = Phi(h)Phi(k) + (2*pi)^-1 * int_0^rho
    exp(-(h^2 - 2hkr + k^2) / (2(1-r^2))) / sqrt(1-r^2) dr
    evaluated with a fixed Gauss-Legendre rule.
    """
    u, v = _check_unit_open(u, v)
    rho = _check_nonsingular(rho)
    h = np.atleast_1d(std_normal_quantile(u))
    k = np.atleast_1d(std_normal_quantile(v))
    h, k, rho_b = np.broadcast_arrays(h, k, np.atleast_1d(rho))

    # Nodes r = rho/2 * (t + 1), t in [-1, 1]; integral accumulated per node
    # to bound temporary memory on large inputs.
    acc = np.zeros(h.shape)
    for t, wgt in zip(_GL_NODES, _GL_WEIGHTS):
        r = 0.5 * rho_b * (t + 1.0)
        omr2 = 1.0 - r * r
        acc += wgt * np.exp(-(h * h - 2.0 * h * k * r + k * k) / (2.0 * omr2)) / np.sqrt(omr2)
    out = std_normal_cdf(h) * std_normal_cdf(k) + (0.5 * rho_b) * acc / (2.0 * np.pi)

    if np.ndim(u) == 0 and np.ndim(v) == 0 and np.ndim(rho) == 0:
        return float(out[0])
    return out.reshape(np.broadcast_shapes(np.shape(u), np.shape(v), np.shape(rho)))


def gaussian_copula_kendall_tau(rho):
    """Closed-form Kendall's tau of the Gaussian copula: (2/pi) arcsin(rho)."""
    return 2.0 / np.pi * np.arcsin(rho)


def sample_gaussian_copula(rho, rng, size=None):
    """Draw (u, v) from the Gaussian copula with correlation ``rho``.

    |rho| = 1 is accepted and yields the degenerate comonotone or
    countermonotone pair. Returns a pair of floats, or a pair of arrays
    when ``size`` is given.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) > 1.0):
        raise ValueError("correlation must satisfy |rho| <= 1")
    z1 = rng.standard_normal(size)
    eps = rng.standard_normal(size)
    z2 = rho * z1 + np.sqrt(np.maximum(1.0 - rho * rho, 0.0)) * eps
    return std_normal_cdf(z1), std_normal_cdf(z2)


def sample_frank_copula(theta, rng, size=None):
    """Draw (u, v) from the Frank copula by conditional inversion.

    ``theta`` = 0 is the independence limit and is accepted. ``theta`` may
    be an array matching ``size`` for observation-specific dependence.
    """
    theta = np.asarray(theta, dtype=float)
    u = rng.uniform(size=size)
    p = rng.uniform(size=size)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = p * np.expm1(-theta) / (1.0 + (1.0 - p) * np.expm1(-theta * u))
        v = -np.log1p(ratio) / theta
    v = np.where(theta == 0.0, p, v)
    # Extreme |theta| can overflow the inversion; fall back to the
    # co/countermonotone limit.
    bad = ~np.isfinite(v)
    if np.any(bad):
        v = np.where(bad & (theta > 0), u, v)
        v = np.where(bad & (theta < 0), 1.0 - u, v)
    v = np.clip(v, 1e-300, 1.0 - 1e-16)
    if np.ndim(v) == 0:
        return float(u), float(v)
    return u, v


def frank_kendall_tau(theta: float) -> float:
    """Kendall's tau of the Frank copula, 1 - 4/theta * (1 - D1(theta)).

    D1 is the first Debye function, evaluated by quadrature; odd in theta,
    with tau(0) = 0.
    """
    if theta == 0.0:
        return 0.0
    t = abs(theta)
    debye1 = quad(lambda s: s / np.expm1(s), 0.0, t, limit=200)[0] / t
    tau = 1.0 - 4.0 / t * (1.0 - debye1)
    return tau if theta > 0 else -tau


def frank_theta_for_tau(tau: float, theta_max: float = 1e4) -> float:
    """Invert ``frank_kendall_tau``: the Frank parameter achieving ``tau``.

    Bisection-free bracket search plus ``brentq``; |tau| must be attainable
    below ``theta_max`` (|tau| up to ~0.9996).
    """
    from scipy.optimize import brentq

    if not -1.0 < tau < 1.0:
        raise ValueError("tau must lie strictly in (-1, 1)")
    if abs(tau) < 1e-12:
        return 0.0
    target = abs(tau)
    lo, hi = 1e-8, 1.0
    while frank_kendall_tau(hi) < target:
        hi *= 2.0
        if hi > theta_max:
            raise ValueError(f"tau={tau} not attainable with theta <= {theta_max}")
    theta = brentq(lambda t: frank_kendall_tau(t) - target, lo, hi, xtol=1e-10)
    return theta if tau > 0 else -theta
