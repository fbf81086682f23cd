"""Memristor network simulator.

Device-level d.c. spike response and a.c. hysteresis, transient simulation
of memristor netlists, trace analysis (spikes, decay times, hysteresis lobe
areas, oscillation statistics), a use-driven note-transition learning graph,
and a T-maze rule-switching experiment.
"""

__version__ = "0.1.0"

from .analysis import (
    HysteresisSweepResult,
    OscillationMetrics,
    SpikeMetrics,
    decay_times,
    detect_spikes,
    find_omega0,
    loop_area,
    oscillation_metrics,
)
from .circuit import (
    NetworkSim,
    SimConfig,
    SolverError,
    Trace,
    kcl_residuals,
    run_transient,
    solve_operating_point,
    source_currents,
)
from .device import (
    DeviceParams,
    DeviceState,
    dc_conduction_profile,
    memristance,
    simulate_device,
    step_device,
    window,
)
from .learnnet import NoteGraph, Profile, generate, kl_divergence, seed_from_sequence
from .netlist import Netlist, NetlistError, netlist_hash, parse_netlist
from .tmaze import (
    ControllerNet,
    MazeConfig,
    TrialLog,
    run_experiment,
    run_trial,
    switch_latency,
)
from .waveforms import DcStep, PulseTrain, Sine, SumWave, eval_waveform

__all__ = [
    "__version__",
    "DeviceParams", "DeviceState", "memristance", "window", "step_device",
    "simulate_device", "dc_conduction_profile",
    "DcStep", "Sine", "PulseTrain", "SumWave", "eval_waveform",
    "Netlist", "NetlistError", "parse_netlist", "netlist_hash",
    "SimConfig", "Trace", "SolverError", "NetworkSim", "run_transient",
    "solve_operating_point", "source_currents", "kcl_residuals",
    "SpikeMetrics", "HysteresisSweepResult", "OscillationMetrics",
    "detect_spikes", "decay_times", "loop_area", "find_omega0",
    "oscillation_metrics",
    "Profile", "NoteGraph", "seed_from_sequence", "generate", "kl_divergence",
    "ControllerNet", "MazeConfig", "TrialLog", "run_trial", "run_experiment",
    "switch_latency",
]
