"""Figure rendering for fit and simulation outputs.

Every CSV the pipeline writes has a figure counterpart here; files are
rendered with the Agg backend so the CLI works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .posterior import ComponentSummary, TauCurve

__all__ = [
    "save_tau_curve_plot",
    "save_component_trace_plot",
    "save_predictive_plot",
    "save_dataset_plot",
]


def save_tau_curve_plot(curve: TauCurve, path, covariate_label: str = "x") -> None:
    """Conditional Kendall's tau with its 95% credible band."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.fill_between(curve.x_grid, curve.lower95, curve.upper95,
                    alpha=0.25, color="tab:blue", label="95% credible band")
    ax.plot(curve.x_grid, curve.mean, color="tab:blue", lw=1.8,
            label="posterior mean")
    ax.set_xlabel(covariate_label)
    ax.set_ylabel("conditional Kendall's tau")
    ax.set_ylim(-1.05, 1.05)
    ax.axhline(0.0, color="0.6", lw=0.8, ls=":")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_component_trace_plot(summary: ComponentSummary, iters, path) -> None:
    """Occupied-component count and the two largest weights per sweep."""
    fig, axes = plt.subplots(3, 1, figsize=(7, 6), sharex=True)
    axes[0].plot(iters, summary.occupied, lw=0.7, color="tab:gray")
    axes[0].set_ylabel("components")
    axes[1].plot(iters, summary.weight_first, lw=0.7, color="tab:blue")
    axes[1].set_ylabel("largest weight")
    axes[1].set_ylim(0, 1.02)
    axes[2].plot(iters, summary.weight_second, lw=0.7, color="tab:orange")
    axes[2].set_ylabel("second weight")
    axes[2].set_ylim(0, 1.02)
    axes[2].set_xlabel("iteration")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_predictive_plot(u, v, path, observed_u=None, observed_v=None) -> None:
    """Predictive sample on the unit square, optionally over the data."""
    fig, ax = plt.subplots(figsize=(5, 5))
    if observed_u is not None:
        ax.scatter(observed_u, observed_v, s=6, alpha=0.35,
                   color="0.6", label="observed")
    ax.scatter(u, v, s=6, alpha=0.5, color="tab:red", label="predictive")
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.legend(frameon=False, fontsize=9, loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_dataset_plot(u, v, x, path) -> None:
    """Dataset scatter coloured by the covariate."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    sc = ax.scatter(u, v, s=8, c=x, cmap="viridis", alpha=0.7)
    fig.colorbar(sc, ax=ax, label="x")
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
