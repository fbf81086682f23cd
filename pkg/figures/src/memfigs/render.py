"""Render figure kinds from simulator output files.

Inputs are the simulator's documented formats: trace CSV (``t,<node>...,
<branch>...`` with one row per step), spike metrics JSON (``t_peak``,
``i_baseline``, ``tau50``..``tau99``), trial logs
(``trial,rule,choice,correct,left_score,right_score``), and the T-maze
summary JSON. Rendering never mutates inputs; identical inputs give
identical figure dimensions and axis ranges.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("spike_profile", "network_trace", "hysteresis_loops",
         "tmaze_learning_curve")

FIGSIZE = (7.0, 4.2)
DPI = 130


class RenderError(ValueError):
    """Missing or malformed input, or an unusable figure request."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: a figure kind, its input paths, and the image path."""

    kind: str
    inputs: dict
    output: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {', '.join(KINDS)}")


def read_trace(path: str) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    text = _read(path)
    lines = [ln for ln in text.strip().splitlines() if ln]
    if len(lines) < 2:
        raise RenderError(f"{path}: empty trace file")
    names = lines[0].split(",")
    if names[0] != "t":
        raise RenderError(f"{path}: first trace column must be 't'")
    try:
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError:
        raise RenderError(f"{path}: non-numeric trace data") from None
    if rows.shape[1] != len(names):
        raise RenderError(f"{path}: row width does not match header")
    return rows[:, 0], {names[c]: rows[:, c] for c in range(1, len(names))}


def read_json(path: str) -> dict:
    try:
        doc = json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise RenderError(f"{path}: invalid JSON ({e.msg})") from None
    if not isinstance(doc, dict):
        raise RenderError(f"{path}: expected a JSON object")
    return doc


def read_trial_log(path: str) -> list[dict]:
    text = _read(path)
    reader = csv.DictReader(text.splitlines())
    needed = {"trial", "correct"}
    if reader.fieldnames is None or not needed <= set(reader.fieldnames):
        raise RenderError(f"{path}: not a trial log (needs columns "
                          f"{sorted(needed)})")
    rows = list(reader)
    if not rows:
        raise RenderError(f"{path}: trial log has no rows")
    return rows


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise RenderError(f"no such file: {path}")
    return p.read_text()


def _pick_column(cols: dict[str, np.ndarray], wanted: str | None,
                 path: str) -> tuple[str, np.ndarray]:
    if wanted is not None:
        if wanted not in cols:
            raise RenderError(f"{path}: no column {wanted!r}")
        return wanted, cols[wanted]
    if len(cols) == 1:
        return next(iter(cols.items()))
    raise RenderError(f"{path}: {len(cols)} columns; pick one with 'column'")


def _spike_profile(spec: FigureSpec, ax) -> dict:
    times, cols = read_trace(spec.inputs["trace"])
    column, series = _pick_column(cols, spec.inputs.get("column"),
                                  spec.inputs["trace"])
    metrics = read_json(spec.inputs["metrics"])
    for key in ("t_peak", "i_baseline"):
        if metrics.get(key) is None:
            raise RenderError(f"{spec.inputs['metrics']}: missing {key!r}")
    t_peak = float(metrics["t_peak"])

    ax.plot(times, series, lw=1.2, color="#1f3d7a")
    ax.axhline(float(metrics["i_baseline"]), color="0.6", lw=0.8, ls=":")
    markers = 0
    for name, color in (("tau50", "tab:red"), ("tau90", "tab:orange"),
                        ("tau95", "tab:green"), ("tau99", "0.45")):
        value = metrics.get(name)
        if value is None:
            continue
        ax.axvline(t_peak + float(value), color=color, lw=1.1,
                   label=f"{name} = {float(value):.3g} s")
        markers += 1
    ax.set_xlabel("time (s)")
    ax.set_ylabel(f"current {column} (A)")
    ax.set_title("step-response current with decay markers")
    if markers:
        ax.legend(loc="upper right", fontsize=8)
    return {"tau_markers": markers, "column": column}


def _network_trace(spec: FigureSpec, ax) -> dict:
    times, cols = read_trace(spec.inputs["trace"])
    columns = spec.inputs.get("columns")
    if columns:
        missing = [c for c in columns if c not in cols]
        if missing:
            raise RenderError(f"{spec.inputs['trace']}: no column(s) "
                              f"{missing}")
        series = np.sum([cols[c] for c in columns], axis=0)
        label = "+".join(columns)
    else:
        label, series = _pick_column(cols, spec.inputs.get("column"),
                                     spec.inputs["trace"])
    ax.plot(times, series, lw=0.7, color="#1f3d7a")
    ax.axhline(0.0, color="k", lw=1.0)
    ax.set_xlabel("time (s)")
    ax.set_ylabel(f"current {label} (A)")
    ax.set_title("network current under constant drive")
    return {"zero_line": True, "column": label,
            "has_negative": bool(np.any(series < 0.0))}


def _hysteresis_loops(spec: FigureSpec, ax) -> dict:
    traces = spec.inputs["traces"]
    if not traces:
        raise RenderError("hysteresis_loops needs at least one trace")
    v_col = spec.inputs.get("v_column")
    i_col = spec.inputs.get("i_column")
    n = 0
    for path in traces:
        _, cols = read_trace(path)
        v_name, v = _pick_column(cols, v_col, path)
        i_name, i = _pick_column(cols, i_col, path)
        ax.plot(v, i, lw=0.9, label=Path(path).stem)
        n += 1
    ax.set_xlabel(f"voltage {v_name} (V)")
    ax.set_ylabel(f"current {i_name} (A)")
    ax.set_title("V-I loops across the frequency sweep")
    ax.axhline(0.0, color="0.7", lw=0.6)
    ax.axvline(0.0, color="0.7", lw=0.6)
    if n > 1:
        ax.legend(fontsize=7)
    return {"loops": n}


def _tmaze_learning_curve(spec: FigureSpec, ax) -> dict:
    rows = read_trial_log(spec.inputs["log"])
    correct = np.array([int(r["correct"]) for r in rows], dtype=float)
    window = int(spec.inputs.get("window", 10))
    kernel = np.ones(window) / window
    rolling = np.convolve(correct, kernel, mode="valid")
    trials = np.arange(len(rolling)) + window - 1

    switch_at = spec.inputs.get("switch_at")
    if switch_at is None and "summary" in spec.inputs:
        switch_at = read_json(spec.inputs["summary"]).get("switch_at")
    ax.plot(trials, rolling, lw=1.3, color="#1f3d7a")
    if switch_at is not None:
        ax.axvline(float(switch_at), color="tab:red", lw=1.2, ls="--",
                   label=f"rule switch at {int(switch_at)}")
        ax.legend(fontsize=8)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("trial")
    ax.set_ylabel(f"accuracy (rolling {window})")
    ax.set_title("maze accuracy around the rule switch")
    return {"trials": len(correct), "switch_marked": switch_at is not None}


_RENDERERS = {
    "spike_profile": _spike_profile,
    "network_trace": _network_trace,
    "hysteresis_loops": _hysteresis_loops,
    "tmaze_learning_curve": _tmaze_learning_curve,
}


def render(spec: FigureSpec) -> dict:
    """Draw the figure and write it to ``spec.output``.

    Returns a small info dict (marker counts, column names, image size)
    that the tests and the command line report."""
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        info = _RENDERERS[spec.kind](spec, ax)
        fig.tight_layout()
        fig.savefig(spec.output)
        width, height = fig.canvas.get_width_height()
        info.update({"output": spec.output, "width_px": width,
                     "height_px": height,
                     "x_range": tuple(ax.get_xlim()),
                     "y_range": tuple(ax.get_ylim())})
        return info
    finally:
        plt.close(fig)
