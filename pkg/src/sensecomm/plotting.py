"""Figure emission from result records.

Rendering is deterministic: identical records produce byte-identical
files (fixed SVG hash salt, no embedded dates).
"""

import dataclasses
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .errors import ConfigError
from .results import ResultRecord

_DB_FIELDS = {"comm_snr_db", "sense_snr_db", "psnr_db"}


def _field_names():
    return [f.name for f in dataclasses.fields(ResultRecord)]


def _axis_label(name):
    return f"{name} [dB]" if name in _DB_FIELDS else name


def plot(records, x, y, group_by=(), out="figure.svg"):
    """Line plot of metric `y` against parameter `x`, one line per group."""
    names = _field_names()
    for fieldname in (x, y, *group_by):
        if fieldname not in names:
            raise ConfigError(
                f"unknown field {fieldname!r}; available fields: {', '.join(names)}"
            )
    rows = [
        r for r in records
        if r.status == "ok"
        and getattr(r, x) is not None
        and getattr(r, y) is not None
    ]
    if not rows:
        raise ConfigError(
            f"no plottable records for x={x!r}, y={y!r}; "
            f"available fields: {', '.join(names)}"
        )

    groups = {}
    for r in rows:
        key = tuple(getattr(r, g) for g in group_by)
        groups.setdefault(key, []).append(r)

    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    for key in sorted(groups, key=repr):
        pts = sorted(groups[key], key=lambda r: getattr(r, x))
        xs = [getattr(r, x) for r in pts]
        ys = [getattr(r, y) for r in pts]
        label = ", ".join(f"{g}={v}" for g, v in zip(group_by, key)) or y
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel(_axis_label(x))
    ax.set_ylabel(_axis_label(y))
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()

    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with rc_context({"svg.hashsalt": "sensecomm"}):
        if out.suffix.lower() == ".svg":
            fig.savefig(out, metadata={"Date": None})
        else:
            fig.savefig(out)
    return out
