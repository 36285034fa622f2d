"""Posterior summaries of a fitted chain: conditional Kendall's-tau curves
with credible bands, predictive samples, and mixture diagnostics.

Per-sweep stick weights are renormalized over the instantiated components
before any summary; the unbroken tail mass carries no fitted atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationSpec, clamped_rho, eval_calibration
from .copulas import sample_gaussian_copula
from .sampler import ChainTrace

__all__ = [
    "TauCurve",
    "ComponentSummary",
    "mixture_kendall_tau",
    "tau_curve",
    "predictive_sample",
    "component_summary",
    "component_rho_means",
]


@dataclass
class TauCurve:
    """Pointwise posterior mean and 95% band of conditional Kendall's tau."""

    x_grid: np.ndarray
    mean: np.ndarray
    lower95: np.ndarray
    upper95: np.ndarray


@dataclass
class ComponentSummary:
    """Occupied-component counts per sweep, their summary statistics, and
    traces of the two largest mixture weights."""

    occupied: np.ndarray
    stats: dict
    weight_first: np.ndarray
    weight_second: np.ndarray


def mixture_kendall_tau(weights, rhos) -> float:
    """Kendall's tau of a finite mixture of Gaussian copulas.

    For component correlations r_j with weights w_j (renormalized to sum
    one), tau = sum_jk w_j w_k (2/pi) arcsin((r_j + r_k) / 2), the closed
    form of 4 * E[C(U,V)] - 1.
    """
    weights = np.asarray(weights, dtype=float)
    rhos = np.asarray(rhos, dtype=float)
    if weights.shape != rhos.shape or weights.ndim != 1:
        raise ValueError("weights and rhos must be vectors of equal length")
    w = weights / weights.sum()
    grid = 0.5 * (rhos[:, np.newaxis] + rhos[np.newaxis, :])
    return float(w @ (2.0 / np.pi * np.arcsin(grid)) @ w)


def _renormalized(weights: np.ndarray) -> np.ndarray:
    return weights / weights.sum()


def tau_curve(trace: ChainTrace, spec: CalibrationSpec, x_grid) -> TauCurve:
    """Conditional Kendall's-tau curve over ``x_grid``.

    Each retained sweep contributes one tau value per grid point; the curve
    reports the pointwise mean and equal-tailed 2.5%/97.5% quantiles.
    """
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if trace.n_kept == 0:
        raise ValueError("empty chain trace")
    draws = np.empty((trace.n_kept, len(x_grid)))
    for t, (w, atoms) in enumerate(zip(trace.weights, trace.atoms)):
        wn = _renormalized(w)
        rho = clamped_rho(eval_calibration(spec, atoms, x_grid))  # (m, G)
        rho = np.atleast_2d(rho)
        pair = 0.5 * (rho[:, np.newaxis, :] + rho[np.newaxis, :, :])
        tau_mat = 2.0 / np.pi * np.arcsin(pair)                  # (m, m, G)
        draws[t] = np.einsum("j,jkg,k->g", wn, tau_mat, wn)
    lower, upper = np.quantile(draws, [0.025, 0.975], axis=0)
    return TauCurve(x_grid=x_grid, mean=draws.mean(axis=0),
                    lower95=lower, upper95=upper)


def predictive_sample(trace: ChainTrace, spec: CalibrationSpec, covariates,
                      rng) -> tuple[np.ndarray, np.ndarray]:
    """Posterior predictive (u, v) draws at the requested covariate values.

    For each covariate: pick a retained sweep uniformly, a component with
    probability proportional to its weight, then draw from the Gaussian
    copula at that component's correlation.
    """
    covariates = np.atleast_1d(np.asarray(covariates, dtype=float))
    if trace.n_kept == 0:
        raise ValueError("empty chain trace")
    u = np.empty(len(covariates))
    v = np.empty(len(covariates))
    sweep_idx = rng.integers(0, trace.n_kept, size=len(covariates))
    for i, (x, t) in enumerate(zip(covariates, sweep_idx)):
        wn = _renormalized(trace.weights[t])
        j = rng.choice(len(wn), p=wn)
        rho = clamped_rho(eval_calibration(spec, trace.atoms[t][j], x))
        u[i], v[i] = sample_gaussian_copula(rho, rng)
    return u, v


def component_summary(trace: ChainTrace) -> ComponentSummary:
    """Summary statistics of the occupied-component count plus traces of
    the two largest per-sweep weights (zero-padded below two components)."""
    if trace.n_kept == 0:
        raise ValueError("empty chain trace")
    occupied = np.asarray(trace.occupied, dtype=int)
    first = np.empty(trace.n_kept)
    second = np.empty(trace.n_kept)
    for t, w in enumerate(trace.weights):
        top = np.sort(w)[::-1]
        first[t] = top[0]
        second[t] = top[1] if len(top) > 1 else 0.0
    stats = {
        "min": float(occupied.min()),
        "q1": float(np.percentile(occupied, 25)),
        "median": float(np.median(occupied)),
        "mean": float(occupied.mean()),
        "q3": float(np.percentile(occupied, 75)),
        "max": float(occupied.max()),
    }
    return ComponentSummary(occupied=occupied, stats=stats,
                            weight_first=first, weight_second=second)


def component_rho_means(trace: ChainTrace, spec: CalibrationSpec, x,
                        n_top: int = 2) -> np.ndarray:
    """Posterior mean correlation of the top-occupancy components.

    Components are ranked per sweep by occupancy (then by weight), their
    correlations averaged over the covariate values ``x``, and the result
    averaged across the sweeps where the rank exists. Rank matching across
    sweeps is by occupancy order only, so these are descriptive summaries.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sums = np.zeros(n_top)
    counts = np.zeros(n_top, dtype=int)
    for w, atoms, occ in zip(trace.weights, trace.atoms, trace.occupancy):
        occupied = np.flatnonzero(occ)
        order = occupied[np.lexsort((-w[occupied], -occ[occupied]))]
        rho = clamped_rho(eval_calibration(spec, atoms, x))
        rho = np.atleast_2d(rho)
        for rank, j in enumerate(order[:n_top]):
            sums[rank] += rho[j].mean()
            counts[rank] += 1
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
