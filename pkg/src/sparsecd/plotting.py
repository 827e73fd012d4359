"""Figures written straight to files (non-interactive Agg backend)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "bethe_hessian_zeta": ("o", "tab:blue"),
    "bethe_hessian_fixed": ("D", "tab:red"),
    "non_backtracking": ("s", "tab:green"),
    "adjacency": ("p", "gold"),
    "rw_laplacian": ("*", "tab:purple"),
    "reg_sym_laplacian": (".", "black"),
}


def plot_sweep(summary: list[dict], path, key: str = "overlap") -> None:
    """Mean score with one-sd bars against ``alpha / alpha_c``, one curve per method."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for method in dict.fromkeys(r["method"] for r in summary):
        rs = sorted((r for r in summary if r["method"] == method), key=lambda r: r["alpha_ratio"])
        x = [r["alpha_ratio"] for r in rs]
        y = [r[f"{key}_mean"] for r in rs]
        e = [r[f"{key}_sd"] for r in rs]
        marker, color = _STYLE.get(method, ("x", None))
        ax.errorbar(x, y, yerr=e, marker=marker, color=color, label=method, capsize=2, lw=1)
    ax.axvline(1.0, color="grey", ls="--", lw=0.8)
    ax.set_xlabel(r"$\alpha / \alpha_c$")
    ax.set_ylabel(key)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_spectrum(r_grid, values, path, zeta=None, companion=None) -> None:
    """Smallest Bethe-Hessian eigenvalues against r, and optionally the
    eigenvalues of B' in the complex plane."""
    panels = 2 if companion is not None else 1
    fig, axes = plt.subplots(1, panels, figsize=(5 * panels, 4), squeeze=False)
    ax = axes[0, 0]
    for p in range(values.shape[1]):
        ax.plot(r_grid, values[:, p], lw=1, label=f"p={p + 1}")
    ax.axhline(0.0, color="grey", lw=0.8)
    if zeta is not None:
        for z in np.atleast_1d(zeta)[1:]:
            ax.axvline(z, color="grey", ls=":", lw=0.8)
    ax.set_xlabel("r")
    ax.set_ylabel("smallest eigenvalues of H_r")
    ax.legend(fontsize=7)
    if companion is not None:
        ax = axes[0, 1]
        ax.scatter(np.real(companion), np.imag(companion), s=6)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
