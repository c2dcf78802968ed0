"""Static top-down rendering of traces as multi-panel SVG lane diagrams."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

from .errors import EmptyTrace
from .world import DEFAULT_FOOTPRINTS

_COLORS = {
    "car": "#4878cf",
    "truck": "#6d904f",
    "bus": "#e1a33b",
    "ambulance": "#d65f5f",
    "police_car": "#555599",
    "pedestrian": "#222222",
}


def render_trace(trace, out_path, panels=6):
    """Sample `panels` evenly spaced frames and draw actor boxes per lane.

    Output is SVG with a fixed hash salt and no date metadata, so identical
    traces produce identical bytes.
    """
    frames = trace.frames()
    if not frames:
        raise EmptyTrace("trace has no frames")
    layout = trace.layout()

    n = min(panels, len(frames))
    if n == 1:
        picks = [frames[0]]
    else:
        picks = [frames[round(i * (len(frames) - 1) / (n - 1))] for i in range(n)]

    s_all = [a["s"] for fr in frames for a in fr["actors"]]
    s_lo, s_hi = min(s_all) - 15, max(s_all) + 15
    road_half = layout.lane_width_m / 2
    d_lo = -road_half
    d_hi = (layout.lane_count - 1) * layout.lane_width_m + road_half

    with plt.rc_context({"svg.hashsalt": "lanescript"}):
        fig, axes = plt.subplots(n, 1, figsize=(10, 1.6 * n), squeeze=False)
        for ax, fr in zip((row[0] for row in axes), picks):
            ax.set_xlim(s_lo, s_hi)
            ax.set_ylim(d_hi, d_lo)  # lane 1 on top
            ax.set_yticks([])
            ax.set_ylabel(f"t={fr['t']:.2f}s", rotation=0, ha="right", va="center")
            for i in range(layout.lane_count + 1):
                y = -road_half + i * layout.lane_width_m
                style = "-" if i in (0, layout.lane_count) else "--"
                ax.axhline(y, color="#999999", linestyle=style, linewidth=0.8)
            for actor in fr["actors"]:
                length, width = DEFAULT_FOOTPRINTS.get(actor["actor_kind"], (4.5, 2.0))
                color = "#aa3377" if actor["name"] == "VUT" else _COLORS.get(
                    actor["actor_kind"], "#4878cf"
                )
                ax.add_patch(
                    Rectangle(
                        (actor["s"] - length / 2, actor["d"] - width / 2),
                        length, width, facecolor=color, edgecolor="black", linewidth=0.5,
                    )
                )
                ax.annotate(
                    actor["name"], (actor["s"], actor["d"] - width / 2 - 0.3),
                    fontsize=6, ha="center", va="bottom",
                )
        axes[-1][0].set_xlabel("longitudinal position (m)")
        fig.suptitle(trace.header.get("title", ""))
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
