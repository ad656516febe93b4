"""SVG scatter plots of classifier embeddings.

Each classifier is one marker: a circle, or a diamond when its highlight
flag is set.  Marker fill encodes a chosen metadata attribute, and a numeric
attribute can be written next to the marker.  Output bytes depend only on
the inputs (fixed hash salt, no timestamp).

Every marker, annotation and legend entry carries an SVG ``id`` so the file
can be inspected programmatically:

* ``marker-circle-<k>`` / ``marker-diamond-<k>`` for classifier ``k``
* ``annotation-<k>``
* ``legend-color-<n>`` / ``legend-shape-<n>``
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402

from .embedding import Embedding  # noqa: E402
from .score_io import ClassifierMetadata  # noqa: E402

log = logging.getLogger(__name__)

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
NEUTRAL = "#d9d9d9"
UNKNOWN = "unknown"

_RC = {
    "svg.hashsalt": "adjviz",
    "svg.fonttype": "path",
    "font.size": 8,
}


@dataclass(frozen=True)
class PlotSpec:
    color_by: str | None = None
    highlight: str = "highlight"
    annotate: str | None = None
    width: int = 480
    height: int = 400
    palette: tuple[str, ...] = PALETTE
    title: str | None = None


def assign_colors(values: list[str | None], palette=PALETTE) -> dict[str, str]:
    """Colour per attribute value, in first-appearance order; missing -> neutral."""
    colors: dict[str, str] = {}
    for v in values:
        if v is None or v in colors:
            continue
        if len(colors) == len(palette):
            log.warning("more than %d attribute values; palette colours repeat", len(palette))
        colors[v] = palette[len(colors) % len(palette)]
    if any(v is None for v in values):
        colors[UNKNOWN] = NEUTRAL
    return colors


def render_svg(E: Embedding, metadata: ClassifierMetadata | None, spec: PlotSpec, path) -> Path:
    path = Path(path)
    if E.dim != 2:
        raise ValueError(f"can only plot 2-D embeddings, got {E.dim}-D")
    ids = E.classifier_ids
    if metadata is not None:
        missing = [c for c in ids if c not in metadata.attributes]
        if missing:
            log.warning("no metadata for %d classifier(s): %s", len(missing), ", ".join(missing))

    color_by = spec.color_by if metadata is not None else None
    if color_by is not None:
        values = [metadata.value(c, color_by) for c in ids]
        colors = assign_colors(values, spec.palette)
        fills = [colors[v if v is not None else UNKNOWN] for v in values]
    else:
        colors = {}
        fills = [NEUTRAL] * len(ids)

    flags = [metadata.highlighted(c, spec.highlight) if metadata is not None else False for c in ids]

    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(spec.width / 72.0, spec.height / 72.0))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot()
        for k, ((x, y), fill, hl) in enumerate(zip(E.coords, fills, flags)):
            shape = "diamond" if hl else "circle"
            ax.plot(
                [x], [y], linestyle="none", marker="D" if hl else "o",
                markersize=8 if hl else 6, markerfacecolor=fill,
                markeredgecolor="black", markeredgewidth=0.8 if hl else 0.5,
                gid=f"marker-{shape}-{k}", zorder=3 if hl else 2,
            )
            if spec.annotate is not None and metadata is not None:
                v = metadata.annotation(ids[k], spec.annotate)
                if v is not None:
                    ax.annotate(
                        f"{v:.3g}", (x, y), xytext=(4, 4), textcoords="offset points",
                        fontsize=6, gid=f"annotation-{k}",
                    )

        ax.set_aspect("equal", adjustable="datalim")
        ax.tick_params(labelbottom=False, labelleft=False)
        if spec.title:
            ax.set_title(spec.title)

        legends = []
        if colors:
            handles = [
                Line2D([], [], linestyle="none", marker="o", markersize=6,
                       markerfacecolor=c, markeredgecolor="black", label=v)
                for v, c in colors.items()
            ]
            leg = ax.legend(handles=handles, title=color_by, loc="upper left",
                            bbox_to_anchor=(1.02, 1.0), frameon=False)
            for n, h in enumerate(leg.legend_handles):
                h.set_gid(f"legend-color-{n}")
            legends.append(leg)
        if any(flags):
            marks = sorted({metadata.value(c, spec.highlight) for c, f in zip(ids, flags) if f})
            handles = [
                Line2D([], [], linestyle="none", marker="D", markersize=7,
                       markerfacecolor="white", markeredgecolor="black", label="/".join(marks)),
                Line2D([], [], linestyle="none", marker="o", markersize=5,
                       markerfacecolor="white", markeredgecolor="black", label="other"),
            ]
            leg = ax.legend(handles=handles, loc="lower left",
                            bbox_to_anchor=(1.02, 0.0), frameon=False)
            for n, h in enumerate(leg.legend_handles):
                h.set_gid(f"legend-shape-{n}")
            legends.append(leg)
        for leg in legends[:-1]:
            ax.add_artist(leg)
        fig.subplots_adjust(left=0.04, bottom=0.04, top=0.94 if spec.title else 0.98,
                            right=0.70 if legends else 0.96)
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path
