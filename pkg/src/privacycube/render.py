"""Render CubeStates as unfolded cube-net figures.

Used by the CLI report path: alongside the line-delimited notice log, each
log entry can be saved as a PNG showing the top face in the middle and the
four notice faces around it. Lit icons are filled with one segment per
contributing device; the red ring marks identifiable data.
"""

from __future__ import annotations

import math
from pathlib import Path

from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .engine import CubeState, IconState
from .scenario import NoticeLog

UNLIT_FILL = "#26262e"
UNLIT_EDGE = "#44444f"
IDENTIFIABLE_EDGE = "#e61a1a"
FACE_BG = "#171719"

_FACE_TITLES = {
    "top": "devices",
    "data": "collected data",
    "storage": "storage location and retention",
    "access": "data access",
    "usage": "data usage",
}

# (row, column) cells of a 3x3 grid forming the unfolded net
_NET_POSITIONS = {
    "data": (0, 1),
    "storage": (1, 0),
    "top": (1, 1),
    "access": (1, 2),
    "usage": (2, 1),
}


def _draw_tile(ax, x: float, y: float, w: float, h: float, icon: IconState) -> None:
    pad = 0.06
    inner_x, inner_y = x + pad, y + pad
    inner_w, inner_h = w - 2 * pad, h - 2 * pad
    edge = IDENTIFIABLE_EDGE if icon.identifiable else UNLIT_EDGE
    linewidth = 2.2 if icon.identifiable else 0.8
    if icon.lit:
        segment_w = inner_w / len(icon.contributors)
        for i, contributor in enumerate(icon.contributors):
            ax.add_patch(
                Rectangle(
                    (inner_x + i * segment_w, inner_y),
                    segment_w,
                    inner_h,
                    facecolor=contributor.colour,
                    edgecolor="none",
                )
            )
        label_colour = "#101010"
    else:
        ax.add_patch(
            Rectangle((inner_x, inner_y), inner_w, inner_h,
                      facecolor=UNLIT_FILL, edgecolor="none")
        )
        label_colour = "#8a8a96"
    ax.add_patch(
        Rectangle((inner_x, inner_y), inner_w, inner_h,
                  facecolor="none", edgecolor=edge, linewidth=linewidth)
    )
    ax.text(
        x + w / 2,
        y + h / 2,
        icon.icon_id.replace("_", " "),
        ha="center",
        va="center",
        fontsize=7,
        color=label_colour,
        wrap=True,
    )


def _draw_face(ax, title: str, icons: tuple[IconState, ...], ncols: int = 2) -> None:
    ax.set_facecolor(FACE_BG)
    ax.set_title(title, fontsize=9, color="#d8d8e0", pad=4)
    for spine in ax.spines.values():
        spine.set_color(UNLIT_EDGE)
    ax.set_xticks([])
    ax.set_yticks([])
    if not icons:
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        return
    nrows = math.ceil(len(icons) / ncols)
    ax.set_xlim(0, ncols)
    ax.set_ylim(0, nrows)
    ax.invert_yaxis()
    for i, icon in enumerate(icons):
        col, row = divmod(i, nrows)  # column-major: storage reads map | time-bar
        _draw_tile(ax, col, row, 1.0, 1.0, icon)


def render_cube_figure(state: CubeState) -> Figure:
    """One figure: the five faces laid out as an unfolded cube net."""
    fig = Figure(figsize=(10, 10), facecolor="#0d0d0f")
    grid = fig.add_gridspec(3, 3, wspace=0.12, hspace=0.22)
    for face, (row, col) in _NET_POSITIONS.items():
        ax = fig.add_subplot(grid[row, col])
        _draw_face(ax, _FACE_TITLES[face], state.face(face))
    focus = state.focus if state.focus is not None else "none"
    fig.suptitle(
        f"PrivacyCube  |  version {state.version}  |  t={state.timestamp_ms} ms  |  focus: {focus}",
        color="#d8d8e0",
        fontsize=11,
    )
    return fig


def render_notice_log(log: NoticeLog, out_dir: str | Path, stem: str = "entry") -> list[Path]:
    """Save one PNG per log entry into `out_dir`; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, entry in enumerate(log.entries):
        fig = render_cube_figure(entry.state)
        path = out_dir / f"{stem}_{i:03d}.png"
        fig.savefig(path, dpi=110)
        paths.append(path)
    return paths
