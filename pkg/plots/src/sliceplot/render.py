"""Render the simulator's CSV outputs as figures.

Six figure kinds are supported, one per output family: reward curves,
queue traces, rate CDFs, sweep bars, the violation comparison, and
tracking traces.  Input CSVs are never modified; a fixed stylesheet keeps
images comparable across runs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import style

KINDS = ("reward", "queue", "cdf", "sweep", "violations", "tracking")

REQUIRED_COLUMNS = {
    "reward": ("episode", "reward_embb", "reward_urllc"),
    "queue": ("slot", "F", "G"),
    "cdf": ("slot", "user", "slice", "rate_bps"),
    "sweep": ("kind", "value"),
    "violations": ("seed", "drl_violation_freq", "pf_violation_freq"),
    "tracking": ("slot", "robot", "tracking_error", "di"),
}


class SchemaError(ValueError):
    """Input CSV does not match the figure kind's schema."""


@dataclass
class FigureSpec:
    kind: str
    input_path: str
    output_path: str
    title: str = None


def read_columns(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty input, nothing to plot")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return {name: [row[name] for row in rows] for name in reader.fieldnames}


def check_schema(kind, cols, path):
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in cols]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)} required by "
            f"the {kind!r} figure")


def floats(cols, name):
    return np.array([float(v) for v in cols[name]])


def empirical_cdf(values):
    """Sorted sample points and cumulative fractions (steps at the samples)."""
    x = np.sort(np.asarray(values, dtype=float))
    y = np.arange(1, x.size + 1) / x.size
    return x, y


def render(spec: FigureSpec) -> str:
    """Draw one figure; returns the output path."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}; expected one of {KINDS}")
    cols = read_columns(spec.input_path)
    check_schema(spec.kind, cols, spec.input_path)
    fig, ax = plt.subplots(figsize=style.FIGSIZE, dpi=style.DPI)
    try:
        _DRAWERS[spec.kind](ax, cols)
        style.apply(ax, title=spec.title or _TITLES[spec.kind])
        fig.tight_layout()
        fig.savefig(spec.output_path)
    finally:
        plt.close(fig)
    return spec.output_path


def _draw_reward(ax, cols):
    ep = floats(cols, "episode")
    ax.plot(ep, floats(cols, "reward_embb"), color=style.EMBB_COLOR,
            label="eMBB reward")
    ax.plot(ep, floats(cols, "reward_urllc"), color=style.URLLC_COLOR,
            label="URLLC reward")
    ax.set_xlabel("episode")
    ax.set_ylabel("episode reward")
    ax.legend()


def _draw_queue(ax, cols):
    slot = floats(cols, "slot")
    ax.plot(slot, floats(cols, "F"), color=style.URLLC_COLOR, label="URLLC backlog F")
    ax.plot(slot, floats(cols, "G"), color=style.EMBB_COLOR, label="eMBB backlog G")
    ax.set_xlabel("slot")
    ax.set_ylabel("backlog (packets)")
    ax.legend()


def _draw_cdf(ax, cols):
    rates = floats(cols, "rate_bps") / 1e6
    slices = np.array(cols["slice"])
    for name, color in (("embb", style.EMBB_COLOR), ("urllc", style.URLLC_COLOR)):
        vals = rates[slices == name]
        if vals.size == 0:
            continue
        x, y = empirical_cdf(vals)
        ax.step(x, y, where="post", color=color, label=f"{name} rate")
    ax.set_xlabel("data rate (Mbps)")
    ax.set_ylabel("CDF")
    ax.set_ylim(0.0, 1.05)
    ax.legend()


def _draw_sweep(ax, cols):
    values = [str(v) for v in cols["value"]]
    idx = np.arange(len(values))
    width = 0.35
    pairs = [("mean_rate_embb_mbps", "eMBB rate (Mbps)", style.EMBB_COLOR, -0.5),
             ("mean_rate_urllc_mbps", "URLLC rate (Mbps)", style.URLLC_COLOR, 0.5)]
    drew = False
    for key, label, color, offset in pairs:
        if key not in cols:
            continue
        mean = floats(cols, key)
        std = floats(cols, key + "_std") if key + "_std" in cols else None
        ax.bar(idx + offset * width, mean, width, yerr=std, capsize=3,
               color=color, label=label)
        drew = True
    if not drew:
        raise SchemaError("sweep figure needs mean_rate_*_mbps columns")
    ax.set_xticks(idx)
    ax.set_xticklabels(values)
    ax.set_xlabel(str(cols["kind"][0]))
    ax.legend()


def _draw_violations(ax, cols):
    drl = floats(cols, "drl_violation_freq")
    pf = floats(cols, "pf_violation_freq")
    ax.bar([0, 1], [drl.mean(), pf.mean()],
           yerr=[drl.std(), pf.std()], capsize=4,
           color=[style.EMBB_COLOR, style.URLLC_COLOR])
    ax.set_xticks([0, 1])
    ax.set_xticklabels(["DRL", "PF"])
    ax.set_ylabel("URLLC delay-violation frequency")


def _draw_tracking(ax, cols):
    slot = floats(cols, "slot")
    robot = floats(cols, "robot").astype(int)
    err = floats(cols, "tracking_error")
    di = floats(cols, "di")
    for r in sorted(set(robot.tolist())):
        mask = robot == r
        color = style.BAR_COLORS[r % len(style.BAR_COLORS)]
        ax.plot(slot[mask], err[mask], color=color, label=f"robot {r} error")
        ax.plot(slot[mask], di[mask], color=color, linestyle="--", alpha=0.6,
                label=f"robot {r} DI")
    ax.set_xlabel("slot")
    ax.set_ylabel("tracking error / DI")
    ax.legend(fontsize=7)


_DRAWERS = {
    "reward": _draw_reward,
    "queue": _draw_queue,
    "cdf": _draw_cdf,
    "sweep": _draw_sweep,
    "violations": _draw_violations,
    "tracking": _draw_tracking,
}

_TITLES = {
    "reward": "Per-slice episode rewards",
    "queue": "Slice backlogs",
    "cdf": "Data-rate CDF by slice",
    "sweep": "Sweep summary",
    "violations": "Delay violations: DRL vs PF",
    "tracking": "Tracking error and dexterity index",
}
