"""Voltage source waveforms: d.c. steps, sines, pulse trains, and sums."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

__all__ = ["DcStep", "Sine", "PulseTrain", "SumWave", "Waveform", "eval_waveform",
           "waveform_to_dict", "waveform_from_dict"]


@dataclass(frozen=True)
class DcStep:
    """Constant level between t_on and t_off (t_off None = held forever)."""

    amplitude: float
    t_on: float = 0.0
    t_off: float | None = None

    def __post_init__(self):
        if self.t_off is not None and not self.t_off > self.t_on:
            raise ValueError(f"t_off must exceed t_on, got [{self.t_on}, {self.t_off}]")


@dataclass(frozen=True)
class Sine:
    amplitude: float
    omega: float
    phase: float = 0.0


@dataclass(frozen=True)
class PulseTrain:
    """Rectangular pulses: amplitude for the first duty fraction of each period."""

    amplitude: float
    period: float
    duty: float

    def __post_init__(self):
        if self.period <= 0.0:
            raise ValueError(f"period must be positive, got {self.period}")
        if not (0.0 < self.duty < 1.0):
            raise ValueError(f"duty must lie in (0, 1), got {self.duty}")


@dataclass(frozen=True)
class SumWave:
    components: tuple["Waveform", ...]


Waveform = Union[DcStep, Sine, PulseTrain, SumWave]


def eval_waveform(w: Waveform, t: float) -> float:
    """Voltage of waveform ``w`` at time ``t >= 0``."""
    if isinstance(w, DcStep):
        if t < w.t_on:
            return 0.0
        if w.t_off is not None and t >= w.t_off:
            return 0.0
        return w.amplitude
    if isinstance(w, Sine):
        return w.amplitude * math.sin(w.omega * t + w.phase)
    if isinstance(w, PulseTrain):
        return w.amplitude if math.fmod(t, w.period) < w.duty * w.period else 0.0
    if isinstance(w, SumWave):
        return sum(eval_waveform(c, t) for c in w.components)
    raise TypeError(f"not a waveform: {w!r}")


def waveform_to_dict(w: Waveform) -> dict:
    if isinstance(w, DcStep):
        return {"variant": "dc_step", "amplitude": w.amplitude, "t_on": w.t_on,
                "t_off": w.t_off}
    if isinstance(w, Sine):
        return {"variant": "sine", "amplitude": w.amplitude, "omega": w.omega,
                "phase": w.phase}
    if isinstance(w, PulseTrain):
        return {"variant": "pulse_train", "amplitude": w.amplitude,
                "period": w.period, "duty": w.duty}
    if isinstance(w, SumWave):
        return {"variant": "sum",
                "components": [waveform_to_dict(c) for c in w.components]}
    raise TypeError(f"not a waveform: {w!r}")


def waveform_from_dict(d: dict) -> Waveform:
    try:
        variant = d["variant"]
    except (KeyError, TypeError):
        raise ValueError(f"waveform object needs a 'variant' field: {d!r}") from None
    if variant == "dc_step":
        return DcStep(amplitude=float(d["amplitude"]), t_on=float(d.get("t_on", 0.0)),
                      t_off=None if d.get("t_off") is None else float(d["t_off"]))
    if variant == "sine":
        return Sine(amplitude=float(d["amplitude"]), omega=float(d["omega"]),
                    phase=float(d.get("phase", 0.0)))
    if variant == "pulse_train":
        return PulseTrain(amplitude=float(d["amplitude"]), period=float(d["period"]),
                          duty=float(d["duty"]))
    if variant == "sum":
        return SumWave(tuple(waveform_from_dict(c) for c in d["components"]))
    raise ValueError(f"unknown waveform variant: {variant!r}")
