"""Grouped RMSE bar chart from a filter comparison summary CSV."""
from __future__ import annotations

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .schema import SchemaError, read_columns  # noqa: E402

COMPONENTS = ["vx", "vy", "vz", "roll", "pitch", "yaw", "px", "py", "pz"]
_UNITS = {"v": "m/s", "r": "deg", "p": "m", "y": "deg"}


def render_rmse(summary_path: str, out: str) -> str:
    """Render a grouped bar chart (9 state components x 2 filters) from a
    compare_summary.csv with columns component, srs, proposed.

    The image format follows the file extension. Returns the output path.
    """
    # the component column is textual, so read it separately from the values
    with open(summary_path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split(",")
    missing = [c for c in ("component", "srs", "proposed") if c not in header]
    if missing:
        raise SchemaError(summary_path,
                          f"missing columns: {', '.join(missing)}")
    comp_idx = header.index("component")
    names = []
    with open(summary_path, "r", encoding="utf-8") as f:
        for line in f.readlines()[1:]:
            names.append(line.split(",")[comp_idx])
    data = read_columns(summary_path, ["srs", "proposed"])
    absent = [c for c in COMPONENTS if c not in names]
    if absent:
        raise SchemaError(summary_path,
                          f"missing component rows: {', '.join(absent)}")
    order = [names.index(c) for c in COMPONENTS]
    srs = data["srs"][order]
    proposed = data["proposed"][order]

    x = np.arange(len(COMPONENTS))
    width = 0.38
    fig, ax = plt.subplots(figsize=(10, 5))
    ax.bar(x - width / 2, srs, width, label="SRS", color="#b0533a")
    ax.bar(x + width / 2, proposed, width, label="proposed", color="#3a6db0")
    labels = [f"{c}\n[{_UNITS[c[0]]}]" for c in COMPONENTS]
    ax.set_xticks(x, labels)
    ax.set_ylabel("steady-state RMSE")
    ax.set_title("Filter comparison")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out
