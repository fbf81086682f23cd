"""Parameter searches that regenerate the shipped reference configurations.

The three-memristor search walks a fixed grid of polarities, initial
states, and drift rates for the triangle topology, simulates each candidate
under constant positive drive, and selects the one with the most detected
source-current spikes among those that also show at least one negative
source-current sample. The T-maze search screens pathway drift rates for
reliable pre-switch accuracy. Both are deterministic: rerunning reproduces
the shipped files byte for byte.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .analysis import detect_spikes
from .circuit import SimConfig, SolverError, run_transient, source_currents
from .device import DeviceParams
from .netlist import MemristorBranch, Netlist, Source, netlist_to_dict
from .waveforms import DcStep

__all__ = ["three_mem_candidates", "build_three_mem", "sweep_three_mem",
           "sweep_tmaze", "THREE_MEM_SIM"]

THREE_MEM_SIM = SimConfig(dt=1e-3, t_end=120.0, solve_tolerance=1e-9,
                          rng_seed=0, record_every=10)

_SHARED = dict(r_off=2000.0, window_exponent=1, tau_ion=0.3, kappa=1.0,
               gamma=0.002)


def build_three_mem(divider_pols: tuple[int, int],
                    divider_x0: tuple[float, float],
                    bridge: tuple[int, float, float],
                    mobility: float, amplitude: float = 1.0) -> Netlist:
    """Triangle drive-mid-gnd: two devices in series through the mid node
    and one bridging the source to ground."""
    p1, p2 = divider_pols
    x1, x2 = divider_x0
    bp, bx, b_ron = bridge
    dev = lambda pol, r_on: DeviceParams(r_on=r_on, polarity=pol,
                                         mobility_gain=mobility, **_SHARED)
    return Netlist(
        node_ids=("drive", "mid", "gnd"), ground="gnd",
        branches=(MemristorBranch("m1", "drive", "mid", dev(p1, 100.0), x0=x1),
                  MemristorBranch("m2", "mid", "gnd", dev(p2, 100.0), x0=x2),
                  MemristorBranch("m3", "drive", "gnd", dev(bp, b_ron), x0=bx)),
        sources=(Source("drive", DcStep(amplitude=amplitude)),))


def three_mem_candidates() -> list[dict]:
    """The fixed search grid, in deterministic order."""
    grid = []
    for divider_pols in ((1, -1), (-1, 1), (1, 1)):
        for divider_x0 in ((0.5, 0.9), (0.5, 0.5), (0.3, 0.7)):
            for bridge in ((1, 1.0, 50.0), (1, 1.0, 100.0), (-1, 0.5, 100.0)):
                for mobility in (200.0, 500.0):
                    grid.append(dict(divider_pols=divider_pols,
                                     divider_x0=divider_x0,
                                     bridge=bridge, mobility=mobility))
    return grid


def _score_three_mem(net: Netlist, config: SimConfig) -> dict:
    try:
        trace = run_transient(net, config)
    except SolverError as e:
        return {"ok": False, "error": str(e), "spikes": 0, "has_negative": False}
    i_src = source_currents(net, trace)["drive"]
    spikes = detect_spikes(trace.times, i_src)
    return {"ok": True, "spikes": len(spikes),
            "has_negative": bool(np.any(i_src < 0.0)),
            "fraction_negative": float(np.mean(i_src < 0.0)),
            "i_min": float(i_src.min()), "i_max": float(i_src.max())}


def sweep_three_mem(config: SimConfig = THREE_MEM_SIM,
                    progress=None) -> dict:
    """Run the grid and pick the spikiest eligible candidate.

    Eligibility: at least 5 detected spikes and at least one negative
    source-current sample over the full reference run. Ties break toward
    the earlier grid entry. Returns the report plus the winning netlist.
    """
    rows = []
    best = None
    for idx, cand in enumerate(three_mem_candidates()):
        net = build_three_mem(cand["divider_pols"], cand["divider_x0"],
                              cand["bridge"], cand["mobility"])
        score = _score_three_mem(net, config)
        row = {"index": idx, **cand, **score}
        rows.append(row)
        if progress is not None:
            progress(row)
        if score["ok"] and score["spikes"] >= 5 and score["has_negative"]:
            if best is None or score["spikes"] > best[1]["spikes"]:
                best = (cand, score, net)
    if best is None:
        raise RuntimeError("no grid candidate met the spiking criteria")
    cand, score, net = best
    return {"candidate": cand, "score": score,
            "netlist": netlist_to_dict(net),
            "sim_config": config.to_dict(), "rows": rows}


def sweep_tmaze(screen_seeds: int = 6, trials: int = 210, switch_at: int = 200,
                progress=None) -> dict:
    """Screen pathway drift rates for reliable pre-switch accuracy.

    Each candidate mobility is scored by the fraction of rng seeds whose
    accuracy over the 50 trials before the switch reaches 80%. The slowest
    mobility reaching a perfect screen wins (slower drift keeps the
    consolidation margin widest); ties break toward the earlier candidate.
    """
    from .reference import reference_maze_config
    from .tmaze import ControllerNet, run_experiment

    rows = []
    best = None
    for mobility in (10.0, 20.0, 40.0):
        ok = 0
        for seed in range(screen_seeds):
            controller = _calibration_controller(mobility)
            cfg = reference_maze_config(rng_seed=seed, trials=trials,
                                        switch_at=switch_at)
            log = run_experiment(controller, cfg)
            correct = log.correctness()
            acc = float(correct[switch_at - 50:switch_at].mean())
            if acc >= 0.8:
                ok += 1
        row = {"path_mobility": mobility, "seeds_passing": ok,
               "screen_seeds": screen_seeds}
        rows.append(row)
        if progress is not None:
            progress(row)
        if ok == screen_seeds and best is None:
            best = mobility
    if best is None:
        best = max(rows, key=lambda r: r["seeds_passing"])["path_mobility"]
    return {"path_mobility": best, "base_amplitude": -0.25, "rows": rows}


def _calibration_controller(mobility: float):
    from .reference import reference_controller
    return reference_controller(path_mobility=mobility)
