"""Deterministic SVG rendering of waterfall curves.

All figures go through matplotlib's Agg/SVG backend with a fixed hash salt
and no date metadata, so identical inputs produce byte-identical SVG 1.1
documents (800x500 viewport, glyphs embedded as paths, no external
assets). Reference lines mark 0% and the conventional -30% / +20%
response thresholds; they carry no computational meaning.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_RC = {
    "svg.hashsalt": "wfadjust",
    "svg.fonttype": "none",  # text elements instead of glyph paths
    "figure.figsize": (800 / 72, 500 / 72),
    "figure.dpi": 72,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "axes.axisbelow": True,
}

REFERENCE_LINES = (0.0, -30.0, 20.0)


def _step_xy(wf, x_scale):
    """Expand a waterfall curve into polyline arrays for plotting."""
    x = np.concatenate(([0.0], np.repeat(wf.fraction_end, 2)[:-1])) * x_scale
    y = np.repeat(wf.value, 2)
    return x, y


def _band_xy(wf, x_scale):
    x = np.concatenate(([0.0], np.repeat(wf.fraction_end, 2)[:-1])) * x_scale
    return x, np.repeat(wf.lower, 2), np.repeat(wf.upper, 2)


def render_waterfall(curves, labels=None, *, n_patients=None,
                     emphasize=None, title=None) -> str:
    """Render waterfall curves (optionally with bands) to an SVG string.

    ``labels`` defaults to curve-1, curve-2, ...; with ``n_patients`` the x
    axis shows patient counts instead of fractions. ``emphasize`` names the
    index of a curve (e.g. a ground truth) drawn bold on top while the
    rest are thinned out, the style used for replicate overlays.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("need at least one curve")
    if labels is None:
        labels = []
    labels = [
        lab if lab else f"curve-{i + 1}"
        for i, lab in enumerate(list(labels) + [""] * (len(curves) - len(labels)))
    ]
    x_scale = float(n_patients) if n_patients else 1.0

    crowd = len(curves) > 8
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            for level in REFERENCE_LINES:
                ax.axhline(level, color="0.45", linewidth=0.8,
                           linestyle="-" if level == 0.0 else "--", zorder=1)
            seen_thin = False
            for i, wf in enumerate(curves):
                x, y = _step_xy(wf, x_scale)
                if emphasize is not None and i == emphasize:
                    ax.plot(x, y, color="black", linewidth=2.4, zorder=4,
                            label=labels[i])
                elif crowd:
                    ax.plot(x, y, color="tab:blue", linewidth=0.7, alpha=0.35,
                            zorder=2, label=None if seen_thin else labels[i])
                    seen_thin = True
                else:
                    line, = ax.plot(x, y, linewidth=1.8, zorder=3,
                                    label=labels[i])
                    if wf.has_bands:
                        bx, blo, bup = _band_xy(wf, x_scale)
                        ax.fill_between(bx, blo, bup, color=line.get_color(),
                                        alpha=0.2, linewidth=0, zorder=2)
            ax.set_xlim(0.0, x_scale)
            values = np.concatenate([wf.value for wf in curves])
            low = min(values.min(), -35.0) - 5.0
            high = max(values.max(), 25.0) + 5.0
            ax.set_ylim(low, high)
            ax.set_xlabel("Patients" if n_patients else "Fraction of patients")
            ax.set_ylabel("Best tumor size change (%)")
            if title:
                ax.set_title(title)
            ax.legend(loc="lower left", frameon=False)
            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buf.getvalue().decode("utf-8")
