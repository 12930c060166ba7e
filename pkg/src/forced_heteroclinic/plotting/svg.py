from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..exceptions import SchemaMismatch  # noqa: E402
from ..utils.files import ensure_parent_dir  # noqa: E402

logger = logging.getLogger("forced_heteroclinic.plotting.svg")

PLOT_KINDS: Dict[str, List[str]] = {
    "heatmap": ["x", "y", "value"],
    "scatter": ["x", "y", "category"],
    "route": ["phi", "curve_r", "image_phi", "image_r"],
    "line": ["x", "y"],
}

CLASS_COLOURS = {
    "fixed": "#1b9e77",
    "periodic": "#7570b3",
    "quasiperiodic_torus": "#66a61e",
    "chaotic": "#d95f02",
    "escaped": "#999999",
    "heteroclinic": "#e7298a",
    "unresolved": "#a6761d",
}

RC_DETERMINISTIC = {
    "svg.hashsalt": "forced-heteroclinic",
    "svg.fonttype": "path",
    "path.simplify": False,
}


def _resolve_columns(dataset: pd.DataFrame, kind: str, columns: Optional[Dict[str, str]]) -> Dict[str, str]:
    if kind not in PLOT_KINDS:
        raise SchemaMismatch(f"Unsupported plot kind: {kind}. Allowed: {', '.join(PLOT_KINDS)}")
    mapping = {role: role for role in PLOT_KINDS[kind]}
    mapping.update(columns or {})
    missing = [mapping[role] for role in PLOT_KINDS[kind] if mapping[role] not in dataset.columns]
    if missing and not dataset.empty:
        raise SchemaMismatch(f"Dataset lacks columns {missing} for a {kind} plot", missing=missing)
    return mapping


def _heatmap(ax, data: pd.DataFrame, cols: Dict[str, str]) -> None:
    table = data.pivot_table(index=cols["y"], columns=cols["x"], values=cols["value"], aggfunc="mean")
    xs = table.columns.to_numpy(dtype=float)
    ys = table.index.to_numpy(dtype=float)
    mesh = ax.pcolormesh(xs, ys, table.to_numpy(dtype=float), shading="nearest", cmap="viridis")
    ax.figure.colorbar(mesh, ax=ax, label=cols["value"])


def _category_colour(label: str) -> str:
    return CLASS_COLOURS.get(str(label).split("(")[0], "#333333")


def _scatter(ax, data: pd.DataFrame, cols: Dict[str, str]) -> None:
    for label, group in data.groupby(cols["category"], sort=True):
        ax.scatter(group[cols["x"]], group[cols["y"]], s=4, color=_category_colour(label), label=str(label))
    ax.legend(loc="best", fontsize="small", markerscale=3)


def _route(ax, data: pd.DataFrame, cols: Dict[str, str]) -> None:
    ax.plot(data[cols["phi"]], data[cols["curve_r"]], color="#1f77b4", lw=1.0, label="C")
    # the image is drawn point-wise: its angles wrap and may fold back
    ax.plot(data[cols["image_phi"]], data[cols["image_r"]], ls="none", marker=".", ms=1.5, color="#d62728", label="R(C)")
    if {"marker_phi", "marker_r", "marker_kind"} <= set(data.columns):
        markers = data.dropna(subset=["marker_phi", "marker_r"])
        for kind, group in markers.groupby("marker_kind", sort=True):
            style = {"sink": ("o", "black"), "saddle": ("x", "#ff7f0e")}.get(kind, ("+", "#333333"))
            ax.scatter(group["marker_phi"], group["marker_r"], marker=style[0], color=style[1], s=20, label=kind)
    ax.legend(loc="best", fontsize="small")


def _line(ax, data: pd.DataFrame, cols: Dict[str, str]) -> None:
    ax.plot(data[cols["x"]], data[cols["y"]], marker="o", ms=3, lw=1.0)


_DRAWERS = {"heatmap": _heatmap, "scatter": _scatter, "route": _route, "line": _line}


def emit_svg(
    dataset: pd.DataFrame,
    kind: str,
    output: Path,
    columns: Optional[Dict[str, str]] = None,
    title: str = "",
    labels: Sequence[str] = ("", ""),
    annotation: str = "",
) -> Path:
    """Write *dataset* as a self-contained SVG; identical input gives identical bytes."""

    cols = _resolve_columns(dataset, kind, columns)
    output = ensure_parent_dir(Path(output))
    with plt.rc_context(RC_DETERMINISTIC):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        if dataset.empty:
            ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes, fontsize=14)
            ax.set_xticks([])
            ax.set_yticks([])
        else:
            _DRAWERS[kind](ax, dataset, cols)
        x_label, y_label = labels
        ax.set_xlabel(x_label or cols.get("x", cols.get("phi", "")))
        ax.set_ylabel(y_label or cols.get("y", cols.get("curve_r", "")))
        if title:
            ax.set_title(title)
        if annotation:
            ax.text(0.02, 0.98, annotation, ha="left", va="top", transform=ax.transAxes, fontsize=9)
        fig.savefig(output, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info("%s plot with %s rows saved to %s", kind, len(dataset), output)
    return output


def strobe_scatter_frame(points: np.ndarray, labels: Sequence[str]) -> pd.DataFrame:
    """Section iterates (x1, x3 projection) with one category label per point."""

    return pd.DataFrame({"x": points[:, 0], "y": points[:, -1], "category": list(labels)})
