"""Shipped reference configurations.

Each experiment family has its own calibrated parameter set: the spike
device (short-term memory timescale 0.8 s), the hysteresis device (drift
dominated), the three-memristor oscillation network (regenerable with the
``sweep`` subcommand), the note-learning profile, and the T-maze controller.
"""

from __future__ import annotations

import json
from importlib import resources

from .circuit import SimConfig
from .device import DeviceParams
from .learnnet import Profile
from .netlist import MemristorBranch, Netlist, Source, parse_netlist
from .tmaze import ControllerNet, MazeConfig
from .waveforms import DcStep

__all__ = ["spike_device", "hysteresis_device", "profile_device",
           "reference_profile", "three_mem_netlist", "three_mem_config",
           "reference_controller", "reference_maze_config",
           "REFERENCE_MELODY"]

# two octaves of a simple figure over an 8-note alphabet
REFERENCE_MELODY = [0, 2, 4, 5, 7, 5, 4, 2, 0, 2, 4, 7, 4, 2, 0, 4,
                    5, 7, 5, 4, 2, 0, 2, 4, 5, 4, 2, 0, 7, 5, 4, 2]


def spike_device() -> DeviceParams:
    """Device for d.c. step experiments: pure transient response with the
    0.8 s relaxation time that puts the 99% decay near 3.7 s."""
    return DeviceParams(r_on=100.0, r_off=1000.0, mobility_gain=0.0,
                        window_exponent=1, tau_ion=0.8, kappa=1.0,
                        gamma=0.005)


def hysteresis_device() -> DeviceParams:
    """Device for a.c. sweeps: drift-dominated, no transient coupling."""
    return DeviceParams(r_on=100.0, r_off=1000.0, mobility_gain=200.0,
                        window_exponent=1, tau_ion=0.8, kappa=1.0, gamma=0.0)


def profile_device() -> DeviceParams:
    """Device whose d.c. conduction profile feeds the learning graph."""
    return spike_device()


def reference_profile(n_samples: int = 32) -> Profile:
    from .device import dc_conduction_profile
    params = profile_device()
    table = dc_conduction_profile(params, 1.0, 4.0, n_samples)
    return Profile(table=tuple(table.tolist()), source_params=params)


def _data_text(name: str) -> str:
    return resources.files("memspike.data").joinpath(name).read_text()


def three_mem_netlist() -> Netlist:
    """The shipped three-memristor triangle (see data/three_mem.json)."""
    return parse_netlist(_data_text("three_mem.json"))


def three_mem_config() -> SimConfig:
    return SimConfig.from_dict(json.loads(_data_text("three_mem_config.json")))


def _controller_path_device(mobility_gain: float) -> DeviceParams:
    # plastic pathway: drifts with use, carries no transient of its own
    return DeviceParams(r_on=100.0, r_off=1000.0, mobility_gain=mobility_gain,
                        window_exponent=1, tau_ion=0.1, kappa=0.0, gamma=0.0)


def _controller_read_device() -> DeviceParams:
    # readout: fixed resistance profile, fast transient for in-window scoring
    return DeviceParams(r_on=100.0, r_off=1000.0, mobility_gain=0.0,
                        window_exponent=1, tau_ion=0.08, kappa=1.0,
                        gamma=0.002)


def reference_controller(path_mobility: float = 10.0,
                         base_amplitude: float = -0.25) -> ControllerNet:
    """Two mirrored pathway/readout chains sharing ground.

    The pathway devices are the plastic elements: reward pulses push their
    state up, the (negative) base drive erodes it every decision window, so
    the unrewarded side forgets. Group scores read the chains' internal
    node swing through the readout transients.
    """
    path = _controller_path_device(path_mobility)
    read = _controller_read_device()
    net = Netlist(
        node_ids=("inL", "nL", "inR", "nR", "gnd"), ground="gnd",
        branches=(MemristorBranch("pathL", "inL", "nL", path, x0=0.5),
                  MemristorBranch("readL", "nL", "gnd", read, x0=0.5),
                  MemristorBranch("pathR", "inR", "nR", path, x0=0.5),
                  MemristorBranch("readR", "nR", "gnd", read, x0=0.5)),
        sources=(Source("inL", DcStep(amplitude=base_amplitude)),
                 Source("inR", DcStep(amplitude=base_amplitude))),
    )
    return ControllerNet(netlist=net,
                         left_group=("pathL", "readL"),
                         right_group=("pathR", "readR"),
                         left_input="inL", right_input="inR",
                         base_drive=DcStep(amplitude=base_amplitude))


def reference_maze_config(rng_seed: int = 0, trials: int = 400,
                          switch_at: int = 200,
                          broadcast=None) -> MazeConfig:
    from .tmaze import RewardPulse
    return MazeConfig(trials=trials, switch_at=switch_at, rule_initial="left",
                      decision_window=0.4, broadcast=broadcast,
                      reward_pulse=RewardPulse(amplitude=1.5, duration=0.3),
                      rng_seed=rng_seed)
