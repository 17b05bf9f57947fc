"""
Figures for slice exports and verification reports.

Everything renders to files through the Agg backend; nothing here is needed
for the numbers themselves, which always go to CSV/JSON first.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.2,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_slice(u, v, intensity, phase, path, labels=("x", "y"), title=None) -> Path:
    """Intensity and phase maps of a slice given as 1-D axes ``u``, ``v`` and
    ``(len(u), len(v))`` arrays."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(7.0, 3.0), constrained_layout=True)
        ext = [v[0], v[-1], u[0], u[-1]]
        im = axes[0].imshow(intensity, origin="lower", extent=ext, aspect="auto", cmap="magma")
        fig.colorbar(im, ax=axes[0], label=r"$|A|^2$")
        # mask phase where there is essentially no light
        shown = np.where(intensity > 1e-6 * intensity.max(), phase, np.nan)
        ph = axes[1].imshow(shown, origin="lower", extent=ext, aspect="auto", cmap="twilight",
                            vmin=-np.pi, vmax=np.pi)
        fig.colorbar(ph, ax=axes[1], label="phase [rad]")
        for ax in axes:
            ax.set_xlabel(labels[1])
            ax.set_ylabel(labels[0])
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def plot_widths(z, widths, w_ref, zr, path) -> Path:
    """Measured FWHM against the Gaussian-beam law ``w(z) = w(0) sqrt(1 + (z/z_R)^2)``."""
    z = np.asarray(z)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.5, 2.6))
        ax.plot(z, widths, "o", ms=3, label="measured")
        ax.plot(z, w_ref * np.sqrt(1 + (z / zr) ** 2), "-", label="Gaussian law")
        ax.set_xlabel("z")
        ax.set_ylabel("FWHM")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_report(report, directory) -> list:
    """Convergence and trend figures for the ``series`` block of a report."""
    directory = Path(directory)
    out = []
    s = report.series if hasattr(report, "series") else report.get("series", {})
    name = report.suite if hasattr(report, "suite") else report["suite"]
    with plt.rc_context(STYLE):
        if "completeness" in s:
            d = s["completeness"]
            fig, ax = plt.subplots(figsize=(3.5, 2.6))
            ax.loglog(d["k_points"], d["relative_error"], "o-")
            ax.set_xlabel("carrier samples")
            ax.set_ylabel("relative L2 error")
            out.append(_save(fig, directory / f"{name}_convergence.png"))
        if "wave_residual" in s:
            d = s["wave_residual"]
            fig, ax = plt.subplots(figsize=(3.5, 2.6))
            ax.loglog(d["spacing_over_lambda"], d["residual"], "o-")
            ax.set_xlabel(r"$\lambda / h$")
            ax.set_ylabel("wave-operator residual")
            out.append(_save(fig, directory / f"{name}_wave_residual.png"))
        if "paraxial_accuracy" in s:
            d = s["paraxial_accuracy"]
            fig, ax = plt.subplots(figsize=(3.5, 2.6))
            ax.loglog(d["k_w0"], d["heno_error"], "o-", label="henochromatic")
            ax.loglog(d["k_w0"], d["mono_error"], "s--", label="monochromatic")
            ax.set_xlabel(r"$k w_0$")
            ax.set_ylabel(r"$\|A_{pa} - A\| / \|A_{pa}\|$")
            ax.legend(frameon=False)
            out.append(_save(fig, directory / f"{name}_trend.png"))
        if "negative_controls" in s:
            d = s["negative_controls"]
            fig, ax = plt.subplots(figsize=(3.5, 2.6))
            ax.plot(d["monochromatic_ratios"], ".")
            ax.axhline(1.0, color="k", lw=0.6)
            ax.set_xlabel("mode")
            ax.set_ylabel("reduced / (ck paraxial)")
            out.append(_save(fig, directory / f"{name}_ratios.png"))
    return out
