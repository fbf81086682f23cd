"""T-maze rule switching driven by a memristor network controller.

Each trial reduces the maze to one binary decision: the controller network
is simulated for a decision window under its base drive (plus an optional
network-wide oscillatory broadcast), each designated branch group is scored
by spike count plus mean transient magnitude, and the larger score picks the
side. A reward pulse then drives the input node of the currently rewarded
side; the resulting conductance drift is the only learning signal, and
device states persist for the whole experiment. Flipping the rewarded side
mid-experiment probes how fast the network re-learns.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace as dc_replace

import numpy as np

from .analysis import detect_spikes
from .circuit import NetworkSim
from .netlist import MemristorBranch, Netlist
from .waveforms import DcStep, Sine, SumWave, Waveform, \
    waveform_from_dict, waveform_to_dict

__all__ = ["RewardPulse", "Criterion", "MazeConfig", "ControllerNet",
           "TrialRecord", "TrialLog", "run_trial", "run_experiment",
           "switch_latency", "mirror_controller"]


@dataclass(frozen=True)
class RewardPulse:
    amplitude: float
    duration: float

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError("reward pulse duration must be positive")


@dataclass(frozen=True)
class Criterion:
    """Performance window: ``need`` correct out of the last ``window``."""

    window: int = 10
    need: int = 9

    def __post_init__(self):
        if not (1 <= self.need <= self.window):
            raise ValueError(f"need must lie in [1, window], got {self.need}"
                             f"/{self.window}")


@dataclass(frozen=True)
class MazeConfig:
    trials: int
    switch_at: int
    rule_initial: str = "left"
    decision_window: float = 0.4
    broadcast: Sine | None = None
    reward_pulse: RewardPulse = RewardPulse(amplitude=1.5, duration=0.3)
    criterion: Criterion = Criterion()
    rng_seed: int = 0
    dt: float = 1e-3
    spike_weight: float = 1.0
    transient_weight: float = 1.0

    def __post_init__(self):
        # switch_at == trials expresses a degenerate never-switching run
        if not (0 < self.switch_at <= self.trials):
            raise ValueError(f"require 0 < switch_at <= trials, got "
                             f"{self.switch_at}/{self.trials}")
        if self.decision_window <= 0.0:
            raise ValueError("decision_window must be positive")
        if self.rule_initial not in ("left", "right"):
            raise ValueError(f"rule_initial must be left or right, "
                             f"got {self.rule_initial!r}")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")

    def to_dict(self) -> dict:
        return {"trials": self.trials, "switch_at": self.switch_at,
                "rule_initial": self.rule_initial,
                "decision_window": self.decision_window,
                "broadcast": None if self.broadcast is None
                else {"amplitude": self.broadcast.amplitude,
                      "omega": self.broadcast.omega},
                "reward_pulse": {"amplitude": self.reward_pulse.amplitude,
                                 "duration": self.reward_pulse.duration},
                "criterion": {"window": self.criterion.window,
                              "need": self.criterion.need},
                "rng_seed": self.rng_seed, "dt": self.dt,
                "spike_weight": self.spike_weight,
                "transient_weight": self.transient_weight}

    @classmethod
    def from_dict(cls, d: dict) -> "MazeConfig":
        b = d.get("broadcast")
        rp = d.get("reward_pulse", {"amplitude": 1.5, "duration": 0.3})
        cr = d.get("criterion", {"window": 10, "need": 9})
        return cls(trials=int(d["trials"]), switch_at=int(d["switch_at"]),
                   rule_initial=d.get("rule_initial", "left"),
                   decision_window=float(d.get("decision_window", 0.4)),
                   broadcast=None if b is None
                   else Sine(amplitude=float(b["amplitude"]),
                             omega=float(b["omega"])),
                   reward_pulse=RewardPulse(float(rp["amplitude"]),
                                            float(rp["duration"])),
                   criterion=Criterion(int(cr["window"]), int(cr["need"])),
                   rng_seed=int(d.get("rng_seed", 0)),
                   dt=float(d.get("dt", 1e-3)),
                   spike_weight=float(d.get("spike_weight", 1.0)),
                   transient_weight=float(d.get("transient_weight", 1.0)))


@dataclass(frozen=True)
class ControllerNet:
    """Netlist plus the two scored branch groups and their input nodes."""

    netlist: Netlist
    left_group: tuple[str, ...]
    right_group: tuple[str, ...]
    left_input: str
    right_input: str
    base_drive: Waveform = DcStep(amplitude=-0.25)

    def __post_init__(self):
        if not self.left_group or not self.right_group:
            raise ValueError("branch groups must be non-empty")
        if set(self.left_group) & set(self.right_group):
            raise ValueError("branch groups must be disjoint")
        mem_ids = {b.id for b in self.netlist.branches
                   if isinstance(b, MemristorBranch)}
        for bid in (*self.left_group, *self.right_group):
            if bid not in mem_ids:
                raise ValueError(f"group names non-memristor branch {bid!r}")
        sources = set(self.netlist.source_nodes())
        for node in (self.left_input, self.right_input):
            if node not in sources:
                raise ValueError(f"input node {node!r} has no source")
        if self.left_input == self.right_input:
            raise ValueError("input nodes must differ")

    def to_dict(self) -> dict:
        from .netlist import netlist_to_dict
        return {"netlist": netlist_to_dict(self.netlist),
                "left_group": list(self.left_group),
                "right_group": list(self.right_group),
                "left_input": self.left_input,
                "right_input": self.right_input,
                "base_drive": waveform_to_dict(self.base_drive)}

    @classmethod
    def from_dict(cls, d: dict) -> "ControllerNet":
        from .netlist import parse_netlist
        import json
        return cls(netlist=parse_netlist(json.dumps(d["netlist"])),
                   left_group=tuple(d["left_group"]),
                   right_group=tuple(d["right_group"]),
                   left_input=d["left_input"],
                   right_input=d["right_input"],
                   base_drive=waveform_from_dict(d["base_drive"]))


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    rule: str
    choice: str
    correct: bool
    left_score: float
    right_score: float


@dataclass
class TrialLog:
    records: list[TrialRecord]
    switch_at: int
    criterion: Criterion = Criterion()
    summary: dict = field(default_factory=dict)

    def correctness(self) -> np.ndarray:
        return np.array([r.correct for r in self.records], dtype=bool)

    def to_csv(self) -> str:
        lines = ["trial,rule,choice,correct,left_score,right_score"]
        for r in self.records:
            lines.append(f"{r.trial},{r.rule},{r.choice},{int(r.correct)},"
                         f"{r.left_score!r},{r.right_score!r}")
        return "\n".join(lines) + "\n"


def _group_score(group: tuple[str, ...], times: np.ndarray,
                 currents: dict[str, np.ndarray],
                 s_series: dict[str, np.ndarray],
                 spike_weight: float, transient_weight: float) -> float:
    score = 0.0
    for bid in group:
        spikes = detect_spikes(times, currents[bid])
        score += spike_weight * len(spikes)
        score += transient_weight * float(np.mean(np.abs(s_series[bid])))
    return score


def _decision_waves(controller: ControllerNet,
                    config: MazeConfig) -> dict[str, Waveform]:
    drive: Waveform = controller.base_drive
    if config.broadcast is not None:
        drive = SumWave((controller.base_drive, config.broadcast))
    return {node: drive for node in controller.netlist.source_nodes()}


def run_trial(controller: ControllerNet, config: MazeConfig, rule: str,
              rng: np.random.Generator,
              sim: NetworkSim | None = None) -> tuple[str, tuple[float, float]]:
    """One decision plus its reward phase.

    Scores each branch group over the decision window (spike count plus
    mean transient magnitude), picks the larger, breaking exact ties with
    one rng draw over the groups in branch-id order so that mirrored
    controllers behave identically. The reward pulse then drives the input
    node of the ``rule`` side; when ``sim`` is supplied the device states
    carry over between calls, which is how learning accumulates.
    """
    if rule not in ("left", "right"):
        raise ValueError(f"rule must be left or right, got {rule!r}")
    if sim is None:
        sim = NetworkSim(controller.netlist, config.dt)

    n_dec = max(3, round(config.decision_window / config.dt))
    times, currents, s_ser = sim.run_phase(_decision_waves(controller, config),
                                           n_dec)
    left = _group_score(controller.left_group, times, currents, s_ser,
                        config.spike_weight, config.transient_weight)
    right = _group_score(controller.right_group, times, currents, s_ser,
                         config.spike_weight, config.transient_weight)
    if left > right:
        choice = "left"
    elif right > left:
        choice = "right"
    else:
        # tie: draw over the groups ordered by branch id, not by side label
        sides = sorted(("left", "right"),
                       key=lambda s: min(controller.left_group if s == "left"
                                         else controller.right_group))
        choice = sides[0] if rng.random() < 0.5 else sides[1]

    reward_node = controller.left_input if rule == "left" \
        else controller.right_input
    waves: dict[str, Waveform] = {
        node: DcStep(amplitude=0.0)
        for node in controller.netlist.source_nodes()}
    waves[reward_node] = DcStep(amplitude=config.reward_pulse.amplitude)
    n_rew = max(1, round(config.reward_pulse.duration / config.dt))
    sim.run_phase(waves, n_rew)
    return choice, (left, right)


def run_experiment(controller: ControllerNet, config: MazeConfig) -> TrialLog:
    """Run all trials with the rewarded side flipping at ``switch_at``;
    device states are never reset. Deterministic for a fixed seed."""
    sim = NetworkSim(controller.netlist, config.dt)
    rng = np.random.default_rng(config.rng_seed)
    other = {"left": "right", "right": "left"}
    records = []
    for trial in range(config.trials):
        rule = config.rule_initial if trial < config.switch_at \
            else other[config.rule_initial]
        choice, (left, right) = run_trial(controller, config, rule, rng, sim)
        records.append(TrialRecord(trial=trial, rule=rule, choice=choice,
                                   correct=choice == rule,
                                   left_score=left, right_score=right))
    log = TrialLog(records=records, switch_at=config.switch_at,
                   criterion=config.criterion)
    correct = log.correctness()
    log.summary = {
        "pre_switch_trials_to_criterion": _first_criterion(
            correct[:config.switch_at], config.criterion),
        "post_switch_trials_to_criterion": switch_latency(log),
    }
    return log


def _first_criterion(correct: np.ndarray, criterion: Criterion) -> int | None:
    w, need = criterion.window, criterion.need
    for t in range(w - 1, len(correct)):
        if int(np.sum(correct[t - w + 1:t + 1])) >= need:
            return t
    return None


def switch_latency(log: TrialLog) -> int | None:
    """Trials after the rule flip until the criterion window is first met,
    counting only post-switch windows; None if it never is."""
    correct = log.correctness()
    post = correct[log.switch_at:]
    hit = _first_criterion(post, log.criterion)
    return hit if hit is None else int(hit)


def mirror_controller(controller: ControllerNet) -> ControllerNet:
    """Swap the left/right designations (the physical netlist is shared)."""
    return dc_replace(controller,
                      left_group=controller.right_group,
                      right_group=controller.left_group,
                      left_input=controller.right_input,
                      right_input=controller.left_input)
