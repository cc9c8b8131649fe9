"""Figure rendering for the report path.

Every figure goes straight to a file next to the report; no interactive
backends.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _new_axes(title):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.set_title(title, fontsize=10)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)


def fit_figure(counts, sums, kappa, intercept, path, title="partial sums"):
    """Ordered partial sums against log N with the fitted line."""
    counts = np.asarray(counts, dtype=float)
    sums = np.asarray(sums, dtype=float)
    fig, ax = _new_axes(title)
    logn = np.log(counts)
    ax.plot(logn, sums, "o", ms=3.5, label="partial sums")
    grid = np.linspace(logn.min(), logn.max(), 64)
    ax.plot(grid, kappa * grid + intercept, "-", lw=1.2,
            label=f"fit: {kappa:.6g} log N + {intercept:.4g}")
    ax.set_xlabel("log N")
    ax.set_ylabel("S(N)")
    ax.legend(fontsize=8, frameon=False)
    return _save(fig, path)


def spectrum_figure(spectrum, path, title="eigenvalue decay"):
    """Sorted |eigenvalues| on a log-log scale."""
    vals = np.abs(spectrum.values_sorted())
    vals = vals[vals > 0]
    fig, ax = _new_axes(title)
    n = np.arange(1, len(vals) + 1)
    ax.loglog(n, vals, lw=0.8)
    ax.set_xlabel("n")
    ax.set_ylabel("|eigenvalue|")
    return _save(fig, path)


def trace_figure(window_sizes, traces, path, title="partial trace", ref=None):
    """Partial trace against the truncation window."""
    fig, ax = _new_axes(title)
    ax.semilogx(window_sizes, np.real(traces), "o-", ms=3, lw=0.9,
                label="partial trace")
    if ref is not None:
        ax.axhline(ref, color="gray", lw=0.8, ls="--", label=f"reference {ref:g}")
    ax.set_xlabel("window degree")
    ax.set_ylabel("trace")
    ax.legend(fontsize=8, frameon=False)
    return _save(fig, path)


def schatten_figure(ps, sums, integrals, path, title="Schatten profile"):
    """Partial Schatten sums against the boundary-weighted ball integrals."""
    fig, ax = _new_axes(title)
    ax.semilogy(ps, sums, "o-", ms=3.5, lw=0.9, label="partial p-sum")
    ax.semilogy(ps, integrals, "s--", ms=3.5, lw=0.9, label="weighted integral")
    ax.set_xlabel("p")
    ax.set_ylabel("value")
    ax.legend(fontsize=8, frameon=False)
    return _save(fig, path)
