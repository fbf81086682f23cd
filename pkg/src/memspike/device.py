"""Single-memristor model: slow memristance drift plus a fast ionic transient.

The device combines two state variables. The memristance fraction ``x``
drifts with the ohmic current through a polynomial window (nonlinear drift,
pinned to [0, 1]) and sets the instantaneous resistance. The ionic transient
``s`` jumps whenever the applied voltage changes and relaxes exponentially
with time constant ``tau_ion``; it feeds the branch current through the
transconductance ``gamma`` and is what produces the current spike after a
d.c. step and the short-term memory of recent stimulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

__all__ = [
    "DeviceParams",
    "DeviceState",
    "memristance",
    "window",
    "step_device",
    "simulate_device",
    "dc_conduction_profile",
]


@dataclass(frozen=True)
class DeviceParams:
    """Static device constants.

    Attributes:
        r_on: fully-doped resistance, ohms.
        r_off: fully-undoped resistance, ohms. Must exceed ``r_on``.
        mobility_gain: drift rate of the memristance fraction per unit
            ohmic current, 1/(V s).
        window_exponent: positive integer p of the drift window
            1 - (2x-1)^(2p).
        tau_ion: relaxation time of the ionic transient, seconds.
        kappa: transient jump per volt of applied-voltage change.
        gamma: transconductance coupling the transient into the branch
            current, siemens.
        noise_amp: amplitude of optional zero-mean uniform current noise,
            amperes. Zero disables noise and keeps trajectories analytic.
        polarity: +1 or -1, the direction sense of the branch. Antiparallel
            pairs are two branches of opposite polarity.
    """

    r_on: float
    r_off: float
    mobility_gain: float = 0.0
    window_exponent: int = 1
    tau_ion: float = 0.8
    kappa: float = 1.0
    gamma: float = 0.005
    noise_amp: float = 0.0
    polarity: int = 1

    def __post_init__(self) -> None:
        if not (0.0 < self.r_on < self.r_off):
            raise ValueError(
                f"require 0 < r_on < r_off, got r_on={self.r_on}, r_off={self.r_off}"
            )
        if self.tau_ion <= 0.0:
            raise ValueError(f"tau_ion must be positive, got {self.tau_ion}")
        if self.kappa < 0.0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.noise_amp < 0.0:
            raise ValueError(f"noise_amp must be non-negative, got {self.noise_amp}")
        if int(self.window_exponent) != self.window_exponent or self.window_exponent < 1:
            raise ValueError(
                f"window_exponent must be an integer >= 1, got {self.window_exponent}"
            )
        if self.polarity not in (1, -1):
            raise ValueError(f"polarity must be +1 or -1, got {self.polarity}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceParams":
        return cls(**d)


@dataclass(slots=True)
class DeviceState:
    """Evolving device state.

    ``x`` is the memristance fraction in [0, 1] (1 = fully doped, resistance
    ``r_on``). ``s`` is the ionic transient in volts, a decaying memory of
    recent applied-voltage changes. ``v_prev`` is the voltage seen on the
    previous step and ``charge`` the running integral of branch current.
    """

    x: float = 0.5
    s: float = 0.0
    v_prev: float = 0.0
    charge: float = 0.0

    def copy(self) -> "DeviceState":
        return DeviceState(self.x, self.s, self.v_prev, self.charge)


def memristance(params: DeviceParams, x: float) -> float:
    """Instantaneous resistance r_on*x + r_off*(1-x), ohms.

    Raises ValueError if ``x`` lies outside [0, 1].
    """
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"memristance fraction out of range [0, 1]: {x}")
    return params.r_on * x + params.r_off * (1.0 - x)


def window(x: float, p: int) -> float:
    """Drift window 1 - (2x-1)^(2p): unity at x=0.5, zero at both rails."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"window argument out of range [0, 1]: {x}")
    if p < 1:
        raise ValueError(f"window exponent must be >= 1, got {p}")
    return 1.0 - (2.0 * x - 1.0) ** (2 * p)


def _step_core(
    params: DeviceParams,
    state: DeviceState,
    v: float,
    dt: float,
    decay: float,
    noise: float,
) -> tuple[DeviceState, float]:
    """One explicit step with a precomputed decay factor and noise sample.

    The transient is decayed and jumped before the current is formed, so a
    voltage step is visible in the current on the same step it is applied.
    The decay factor must be exp(-dt/tau_ion); relaxation is then exact per
    step rather than a first-order approximation.
    """
    x = state.x
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"device state x out of range [0, 1]: {x}")
    m = params.r_on * x + params.r_off * (1.0 - x)
    i_ohmic = params.polarity * v / m

    s_new = state.s * decay + params.kappa * (v - state.v_prev)
    i = i_ohmic + params.gamma * s_new + noise

    x_new = x + params.mobility_gain * i_ohmic * (
        1.0 - (2.0 * x - 1.0) ** (2 * params.window_exponent)
    ) * dt
    if x_new < 0.0:
        x_new = 0.0
    elif x_new > 1.0:
        x_new = 1.0

    new_state = DeviceState(x=x_new, s=s_new, v_prev=v, charge=state.charge + i * dt)
    return new_state, i


def step_device(
    params: DeviceParams,
    state: DeviceState,
    v: float,
    dt: float,
    rng: np.random.Generator | None = None,
) -> tuple[DeviceState, float]:
    """Advance the device by one step of length ``dt`` under voltage ``v``.

    Returns the new state and the branch current in amperes:

        i  = polarity * v / M(x) + gamma * s' + noise
        s' = s * exp(-dt/tau_ion) + kappa * (v - v_prev)
        x' = clip(x + mobility_gain * (polarity*v/M(x)) * window(x, p) * dt, 0, 1)

    Noise is drawn from ``rng`` only when ``noise_amp > 0``; the generator is
    untouched otherwise so noiseless runs are rng-independent.
    """
    if not math.isfinite(v):
        raise ValueError(f"non-finite applied voltage: {v}")
    if not math.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"step length must be positive and finite, got {dt}")
    noise = 0.0
    if params.noise_amp > 0.0:
        if rng is None:
            raise ValueError("noise_amp > 0 requires an rng")
        noise = params.noise_amp * (2.0 * rng.random() - 1.0)
    decay = math.exp(-dt / params.tau_ion)
    return _step_core(params, state, v, dt, decay, noise)


def simulate_device(
    params: DeviceParams,
    voltages: np.ndarray,
    dt: float,
    x0: float = 0.5,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, DeviceState]:
    """Drive a fresh device with a voltage sample per step; returns the
    branch current series and the final state."""
    if dt <= 0.0:
        raise ValueError(f"step length must be positive, got {dt}")
    decay = math.exp(-dt / params.tau_ion)
    state = DeviceState(x=x0)
    currents = np.empty(len(voltages))
    if params.noise_amp > 0.0 and rng is None:
        raise ValueError("noise_amp > 0 requires an rng")
    for k, v in enumerate(voltages):
        noise = 0.0
        if params.noise_amp > 0.0:
            noise = params.noise_amp * (2.0 * rng.random() - 1.0)
        state, currents[k] = _step_core(params, state, float(v), dt, decay, noise)
    return currents, state


def dc_conduction_profile(
    params: DeviceParams,
    v: float,
    duration: float,
    n_samples: int,
    oversample: int = 32,
    x0: float = 0.5,
) -> np.ndarray:
    """Normalized |current| of a fresh device held at constant voltage.

    The device starts from rest, the voltage steps to ``v`` at t=0, and
    |i| is sampled at the ends of ``n_samples`` equal subintervals of
    ``duration``. Samples are divided by their maximum, so every entry lies
    in (0, 1] and the peak entry is exactly 1. This is the raw material for
    the usage-dependent connection weights of the learning graph.
    """
    if v == 0.0:
        raise ValueError("profile voltage must be nonzero")
    if duration <= 0.0:
        raise ValueError(f"duration must be positive, got {duration}")
    if n_samples < 2:
        raise ValueError(f"need at least 2 samples, got {n_samples}")
    if params.noise_amp != 0.0:
        raise ValueError("conduction profile requires noise_amp = 0")

    n_steps = n_samples * oversample
    dt = duration / n_steps
    decay = math.exp(-dt / params.tau_ion)
    state = DeviceState(x=x0)
    samples = np.empty(n_samples)
    for k in range(n_steps):
        state, i = _step_core(params, state, v, dt, decay, 0.0)
        if (k + 1) % oversample == 0:
            samples[(k + 1) // oversample - 1] = abs(i)
    peak = samples.max()
    if peak == 0.0:
        raise ValueError("degenerate profile: current is identically zero")
    return samples / peak
