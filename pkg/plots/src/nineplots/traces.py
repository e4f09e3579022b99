"""Estimate-vs-truth trace figures: a 3x3 grid of velocity, orientation and
position components over a selectable time window."""
from __future__ import annotations

from dataclasses import dataclass

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .schema import SchemaError, read_columns  # noqa: E402

_STATE_COLS = ["qw", "qx", "qy", "qz", "vx", "vy", "vz", "px", "py", "pz"]
TRACE_COLS = ["t"] + _STATE_COLS
# truth files carry the state both relative to the ground frame (unprefixed)
# and in the world frame (bW prefix, the static-ground baseline's frame)
_FRAME_PREFIX = {"relative": "", "world": "bW"}

_ROWS = [
    ("velocity [m/s]", ["vx", "vy", "vz"]),
    ("orientation [deg]", ["roll", "pitch", "yaw"]),
    ("position [m]", ["px", "py", "pz"]),
]


@dataclass(frozen=True)
class TraceBundle:
    """One curve set: an estimate trace overlaid on its ground truth.

    trace_path may be None to render the truth curves alone. frame selects
    which truth columns the estimate is compared against: 'relative' (ground
    frame, the proposed filter) or 'world' (the static-ground baseline).
    """

    truth_path: str
    trace_path: str | None = None
    label: str = "estimate"
    window: tuple[float, float] | None = None
    frame: str = "relative"

    def __post_init__(self):
        if self.frame not in _FRAME_PREFIX:
            raise ValueError(f"frame must be one of {sorted(_FRAME_PREFIX)}")
        if self.window is not None and self.window[0] >= self.window[1]:
            raise ValueError("window start must be before window end")


def quat_to_rpy_deg(qw, qx, qy, qz) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Intrinsic Z-Y-X (yaw-pitch-roll) angles of unit quaternions, degrees."""
    roll = np.degrees(np.arctan2(2.0 * (qw * qx + qy * qz),
                                 1.0 - 2.0 * (qx * qx + qy * qy)))
    pitch = np.degrees(np.arcsin(np.clip(2.0 * (qw * qy - qz * qx), -1.0, 1.0)))
    yaw = np.degrees(np.arctan2(2.0 * (qw * qz + qx * qy),
                                1.0 - 2.0 * (qy * qy + qz * qz)))
    return roll, pitch, yaw


def _series(path, cols_prefix):
    cols = ["t"] + [cols_prefix + c for c in _STATE_COLS]
    data = read_columns(path, cols)
    out = {"t": data["t"]}
    for c in _STATE_COLS:
        out[c] = data[cols_prefix + c]
    out["roll"], out["pitch"], out["yaw"] = quat_to_rpy_deg(
        out["qw"], out["qx"], out["qy"], out["qz"])
    return out


def _clip(series, window, path):
    if window is None:
        return series
    mask = (series["t"] >= window[0]) & (series["t"] <= window[1])
    if not np.any(mask):
        raise SchemaError(path, f"time window [{window[0]}, {window[1]}] "
                                "contains no samples")
    return {k: v[mask] for k, v in series.items()}


def render_traces(bundles: list[TraceBundle], out: str) -> str:
    """Render the 3x3 grid (velocity / roll-pitch-yaw / position rows, x/y/z
    columns) of every bundle's estimate and truth and write it to out.

    The image format follows the file extension (e.g. .png, .svg). Returns
    the output path.
    """
    if not bundles:
        raise ValueError("need at least one bundle")
    fig, axes = plt.subplots(3, 3, figsize=(12, 9), sharex=True)

    truth_drawn = set()
    for bundle in bundles:
        prefix = _FRAME_PREFIX[bundle.frame]
        truth = _clip(_series(bundle.truth_path, prefix), bundle.window,
                      bundle.truth_path)
        est = None
        if bundle.trace_path is not None:
            est = _clip(_series(bundle.trace_path, ""), bundle.window,
                        bundle.trace_path)
        for i, (ylabel, comps) in enumerate(_ROWS):
            for j, comp in enumerate(comps):
                ax = axes[i][j]
                key = (bundle.truth_path, bundle.frame, i, j)
                if key not in truth_drawn:
                    ax.plot(truth["t"], truth[comp], "k--", linewidth=1.0,
                            label="truth" if (i, j) == (0, 0) else None)
                    truth_drawn.add(key)
                if est is not None:
                    ax.plot(est["t"], est[comp], linewidth=1.0,
                            label=bundle.label if (i, j) == (0, 0) else None)
                if i == 0:
                    ax.set_title(comp[-1] if comp[0] in "vp" else comp)
                if j == 0:
                    ax.set_ylabel(ylabel)
                if i == 2:
                    ax.set_xlabel("t [s]")
                ax.grid(True, alpha=0.3)
    axes[0][0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out
