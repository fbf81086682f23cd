"""Trace analysis: spike events and decay times, pinched-hysteresis lobe
areas and the frequency of maximum hysteresis, and oscillation statistics.

Decay times are measured as the time for the excess current to fall BY the
named percentage of its peak value (tau50 is the half-life of the excess,
tau99 the 99%-gone time), so tau50 < tau90 < tau95 < tau99.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace as dc_replace

import numpy as np
from scipy.ndimage import median_filter
from scipy.signal import find_peaks

from .device import DeviceParams, simulate_device

__all__ = ["SpikeMetrics", "HysteresisSweepResult", "OscillationMetrics",
           "detect_spikes", "decay_times", "loop_area", "find_omega0",
           "oscillation_metrics"]

DEFAULT_THRESHOLD_FRAC = 0.25
DEFAULT_MIN_SEPARATION = 0.5
DEFAULT_BASELINE_WINDOW = 4.0


@dataclass
class SpikeMetrics:
    """One spike: peak location, its baseline, and decay timescales.

    ``tau50``..``tau99`` are seconds after ``t_peak`` at which the excess
    |i - i_baseline| has decayed by 50/90/95/99% of its peak value; None
    until filled (or if the series ends first).
    """

    t_peak: float
    i_peak: float
    i_baseline: float
    tau50: float | None = None
    tau90: float | None = None
    tau95: float | None = None
    tau99: float | None = None

    def taus(self) -> tuple[float | None, ...]:
        return (self.tau50, self.tau90, self.tau95, self.tau99)

    def to_dict(self) -> dict:
        return {"t_peak": self.t_peak, "i_peak": self.i_peak,
                "i_baseline": self.i_baseline, "tau50": self.tau50,
                "tau90": self.tau90, "tau95": self.tau95, "tau99": self.tau99}


@dataclass
class HysteresisSweepResult:
    """Lobe areas over a frequency sweep; omega0 is the argmax frequency."""

    frequencies: np.ndarray
    loop_areas: np.ndarray
    omega0: float
    degenerate: bool = False

    def to_rows(self) -> list[tuple[float, float]]:
        return list(zip(self.frequencies.tolist(), self.loop_areas.tolist()))


@dataclass
class OscillationMetrics:
    zero_crossings: int
    dominant_period: float | None
    fraction_negative: float
    spike_count: int

    def to_dict(self) -> dict:
        return {"zero_crossings": self.zero_crossings,
                "dominant_period": self.dominant_period,
                "fraction_negative": self.fraction_negative,
                "spike_count": self.spike_count}


def _sample_interval(times: np.ndarray) -> float:
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ValueError("series too short")
    steps = np.diff(times)
    dt = float(steps[0])
    if dt <= 0.0 or np.max(np.abs(steps - dt)) > 1e-6 * max(dt, 1.0):
        raise ValueError("series is not uniformly sampled")
    return dt


def _trailing_median(values: np.ndarray, width: int) -> np.ndarray:
    width = max(1, min(width, values.size))
    # shift the window so it ends at the current sample
    return median_filter(values, size=width, mode="nearest",
                         origin=(width - 1) // 2)


def detect_spikes(
    times: np.ndarray,
    values: np.ndarray,
    threshold_frac: float = DEFAULT_THRESHOLD_FRAC,
    min_separation: float = DEFAULT_MIN_SEPARATION,
    baseline_window: float = DEFAULT_BASELINE_WINDOW,
) -> list[SpikeMetrics]:
    """Find spikes: local maxima of |value - trailing median| exceeding
    ``threshold_frac`` of the series' largest excess, with peaks closer than
    ``min_separation`` seconds merged into the larger. Decay fields are left
    unfilled; ``i_baseline`` holds the running baseline at the peak.
    """
    if not (0.0 < threshold_frac < 1.0):
        raise ValueError(f"threshold_frac must lie in (0, 1), got {threshold_frac}")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size == 0:
        raise ValueError("empty series")
    if times.size != values.size:
        raise ValueError("times and values differ in length")
    if times.size < 3:
        return []
    dt = _sample_interval(times)

    width = max(1, round(baseline_window / dt))
    baseline = _trailing_median(values, width)
    excess = np.abs(values - baseline)
    global_max = float(excess.max())
    if global_max <= 0.0:
        return []
    distance = max(1, round(min_separation / dt))
    peaks, _ = find_peaks(excess, height=threshold_frac * global_max,
                          distance=distance)
    return [SpikeMetrics(t_peak=float(times[k]), i_peak=float(values[k]),
                         i_baseline=float(baseline[k])) for k in peaks]


def decay_times(times: np.ndarray, values: np.ndarray,
                spike: SpikeMetrics) -> SpikeMetrics:
    """Fill the decay timescales of a detected spike.

    The post-decay baseline is re-estimated from the tail of the series
    (median of the final 5% of samples after the peak), then each tau is the
    first time, linearly interpolated between samples, at which the excess
    has dropped by the corresponding percentage of its peak value. Crossings
    the series never reaches are left as None.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    _sample_interval(times)
    k_peak = int(np.argmin(np.abs(times - spike.t_peak)))
    if abs(times[k_peak] - spike.t_peak) > _sample_interval(times):
        raise ValueError(f"spike at t={spike.t_peak} not in series")
    tail = values[k_peak:]
    if tail.size < 3:
        raise ValueError("series ends at the spike peak")
    n_base = max(3, tail.size // 20)
    baseline = float(np.median(tail[-n_base:]))
    peak_excess = abs(values[k_peak] - baseline)
    if peak_excess == 0.0:
        raise ValueError("flat spike: no excess over baseline")

    excess = np.abs(tail - baseline)
    t_rel = times[k_peak:] - times[k_peak]
    # a crossing is only trustworthy if the baseline segment is flat at the
    # scale that crossing probes; a still-decaying tail (series ended too
    # early) invalidates the small-percentage crossings
    tail_wobble = float(tail[-n_base:].max() - tail[-n_base:].min())
    t_reliable = t_rel[tail.size - n_base]
    out = {}
    for name, pct in (("tau50", 50.0), ("tau90", 90.0), ("tau95", 95.0),
                      ("tau99", 99.0)):
        target = (1.0 - pct / 100.0) * peak_excess
        crossing = _first_crossing(t_rel, excess, target)
        if crossing is not None and (crossing >= t_reliable
                                     or tail_wobble > target):
            crossing = None
        out[name] = crossing
    return dc_replace(spike, i_baseline=baseline, **out)


def _first_crossing(t: np.ndarray, e: np.ndarray, target: float) -> float | None:
    below = np.nonzero(e <= target)[0]
    below = below[below > 0]
    if below.size == 0:
        return None
    k = int(below[0])
    e0, e1 = e[k - 1], e[k]
    if e0 == e1:
        return float(t[k])
    frac = (e0 - target) / (e0 - e1)
    return float(t[k - 1] + frac * (t[k] - t[k - 1]))


def loop_area(v_series: np.ndarray, i_series: np.ndarray) -> float:
    """Total unsigned lobe area of the V-I curve, in volt-amperes.

    The closed curve is cut into lobes at sign changes of the voltage (with
    interpolated pinch points inserted) and each lobe's shoelace area is
    accumulated in absolute value, so the two counter-rotating lobes of a
    pinched loop add instead of cancelling. The segmentation is circular,
    which makes the result invariant under rotation of the sample window.
    """
    v = np.asarray(v_series, dtype=float)
    i = np.asarray(i_series, dtype=float)
    if v.shape != i.shape:
        raise ValueError(f"length mismatch: {v.shape} vs {i.shape}")
    if v.size < 3:
        raise ValueError("need at least 3 samples")
    n = v.size
    if not np.any(v):
        return 0.0

    # sign of each sample, zeros inheriting the next nonzero sign circularly
    sign = np.sign(v).astype(int)
    filled = sign.copy()
    nxt = 0
    for k in range(2 * n - 1, -1, -1):
        kk = k % n
        if sign[kk] != 0:
            nxt = sign[kk]
        elif nxt != 0:
            filled[kk] = nxt

    # augmented circular point list with lobe boundaries marked
    points: list[tuple[float, float]] = []
    cut_at: list[int] = []
    for k in range(n):
        k2 = (k + 1) % n
        points.append((v[k], i[k]))
        if filled[k] != filled[k2]:
            if v[k] * v[k2] < 0.0:
                frac = v[k] / (v[k] - v[k2])
                points.append((0.0, i[k] + frac * (i[k2] - i[k])))
                cut_at.append(len(points) - 1)
            else:
                # boundary lands on an existing v == 0 sample
                cut_at.append(len(points) if k2 != 0 else 0)

    if not cut_at:
        return _shoelace(points)

    total = 0.0
    m = len(points)
    for c in range(len(cut_at)):
        start = cut_at[c]
        end = cut_at[(c + 1) % len(cut_at)]
        if end > start:
            seg = points[start:end + 1]
        else:
            seg = points[start:] + points[:end + 1]
        total += _shoelace(seg)
    return total


def _shoelace(seg: list[tuple[float, float]]) -> float:
    if len(seg) < 3:
        return 0.0
    area = 0.0
    x0, y0 = seg[-1]
    for x1, y1 in seg:
        area += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return abs(area) / 2.0


def find_omega0(
    params: DeviceParams,
    amplitude: float,
    omegas: np.ndarray,
    n_periods: int = 3,
    points_per_period: int = 512,
    x0: float = 0.5,
) -> HysteresisSweepResult:
    """Sweep sinusoidal drive frequencies and locate the one that maximizes
    the hysteresis lobe area.

    The transient coupling is disabled (gamma forced to zero) so the loop is
    purely memristive and pinched. Each frequency is simulated for
    ``n_periods`` periods from a fresh device; the first period is discarded
    as transient. Ties go to the lower frequency. A sweep of fewer than
    three points is flagged as degenerate.
    """
    omegas = np.sort(np.asarray(omegas, dtype=float))
    if omegas.size == 0:
        raise ValueError("empty frequency sweep")
    if np.any(omegas <= 0.0):
        raise ValueError("frequencies must be positive")
    if n_periods < 2:
        raise ValueError("need at least 2 periods (one discarded as transient)")
    pure = dc_replace(params, gamma=0.0, noise_amp=0.0)

    areas = np.empty(omegas.size)
    for idx, omega in enumerate(omegas):
        period = 2.0 * math.pi / omega
        dt = period / points_per_period
        n_total = n_periods * points_per_period
        t = np.arange(1, n_total + 1) * dt
        v = amplitude * np.sin(omega * t)
        i, _ = simulate_device(pure, v, dt, x0=x0)
        keep = slice(points_per_period, None)
        areas[idx] = loop_area(v[keep], i[keep])

    best = int(np.argmax(areas))
    return HysteresisSweepResult(frequencies=omegas, loop_areas=areas,
                                 omega0=float(omegas[best]),
                                 degenerate=omegas.size < 3)


def oscillation_metrics(times: np.ndarray, values: np.ndarray) -> OscillationMetrics:
    """Zero crossings, autocorrelation-based dominant period, fraction of
    negative samples, and spike count (detector defaults) of a series."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = _sample_interval(times)

    x = values - values.mean()
    crossings = int(np.sum(x[:-1] * x[1:] < 0.0))

    period = None
    if np.any(x):
        acf = _autocorrelation(x)
        for k in range(1, acf.size - 1):
            if acf[k] > 0.2 and acf[k] >= acf[k - 1] and acf[k] >= acf[k + 1]:
                period = float(k * dt)
                break

    spikes = detect_spikes(times, values)
    return OscillationMetrics(
        zero_crossings=crossings,
        dominant_period=period,
        fraction_negative=float(np.mean(values < 0.0)),
        spike_count=len(spikes),
    )


def _autocorrelation(x: np.ndarray) -> np.ndarray:
    n = x.size
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acf = np.fft.irfft(f * np.conj(f), size)[:n]
    return acf / acf[0]
