"""Figures for benchmark reports (non-interactive Agg backend)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def mse_figure(report, model: str):
    """MSE x 100 against d, one line per estimator, one panel per n."""
    cells = [c for c in report.cells if c.model == model]
    ns = sorted({c.n for c in cells})
    estimators = list(dict.fromkeys(c.estimator for c in cells))
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(ns), figsize=(3.2 * len(ns), 3.0), sharey=True, squeeze=False)
        for ax, n in zip(axes[0], ns):
            for est in estimators:
                pts = sorted((c.d, c.mse_x100) for c in cells if c.n == n and c.estimator == est)
                d, y = np.array(pts).T
                ax.plot(d, y, marker="o", ms=3, lw=1, label=est)
            ax.set_title(f"{model}, n = {n}")
            ax.set_xlabel("d")
        axes[0][0].set_ylabel("MSE x 100")
        axes[0][-1].legend(loc="upper left", bbox_to_anchor=(1.02, 1.0), frameon=False)
        fig.tight_layout()
    return fig


def save_report_figures(report, out_dir) -> list:
    """Write one PNG per model into ``out_dir`` and return the paths."""
    paths = []
    for model in dict.fromkeys(c.model for c in report.cells):
        fig = mse_figure(report, model)
        path = os.path.join(out_dir, f"mse_{_safe(model)}.png")
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        paths.append(path)
    return paths
