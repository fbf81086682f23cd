"""Transient simulation of memristor netlists by per-step nodal analysis.

At a fixed device state the branch current of a memristor is affine in its
branch voltage::

    i(v) = (polarity/M(x) + gamma*kappa) * v + gamma*(s*decay - kappa*v_prev)

so every time step reduces to one linear nodal solve with the sources
eliminated (ground and source nodes are fixed potentials). Device states are
frozen during the solve and advanced afterwards with the solved branch
voltages; the currents the devices then report are the same affine law, so
recorded traces satisfy Kirchhoff's current law to solver precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .device import DeviceState, _step_core
from .netlist import MemristorBranch, Netlist, ResistorBranch, netlist_hash
from .waveforms import eval_waveform

__all__ = ["SimConfig", "Trace", "SolverError", "NetworkSim",
           "solve_operating_point", "run_transient", "source_currents",
           "kcl_residuals", "trace_to_csv", "trace_from_csv"]


class SolverError(RuntimeError):
    """Singular or numerically failed nodal solve."""


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    solve_tolerance: float = 1e-9
    rng_seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if not (0.0 < self.dt < self.t_end):
            raise ValueError(f"require 0 < dt < t_end, got dt={self.dt}, "
                             f"t_end={self.t_end}")
        if self.solve_tolerance <= 0.0:
            raise ValueError("solve_tolerance must be positive")
        if self.record_every < 1 or int(self.record_every) != self.record_every:
            raise ValueError(f"record_every must be an integer >= 1, "
                             f"got {self.record_every}")

    def to_dict(self) -> dict:
        return {"dt": self.dt, "t_end": self.t_end,
                "solve_tolerance": self.solve_tolerance,
                "rng_seed": self.rng_seed, "record_every": self.record_every}

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(dt=float(d["dt"]), t_end=float(d["t_end"]),
                   solve_tolerance=float(d.get("solve_tolerance", 1e-9)),
                   rng_seed=int(d.get("rng_seed", 0)),
                   record_every=int(d.get("record_every", 1)))


@dataclass
class Trace:
    """Time-indexed record of node voltages and branch currents."""

    times: np.ndarray
    node_voltages: dict[str, np.ndarray]
    branch_currents: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)
    branch_x: dict[str, np.ndarray] | None = None
    branch_s: dict[str, np.ndarray] | None = None


def _check_connected(net: Netlist) -> None:
    """Every node must reach ground or a source through branches."""
    adjacency: dict[str, set[str]] = {n: set() for n in net.node_ids}
    for b in net.branches:
        adjacency[b.from_node].add(b.to_node)
        adjacency[b.to_node].add(b.from_node)
    seen = {net.ground, *net.source_nodes()}
    stack = list(seen)
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    floating = [n for n in net.node_ids if n not in seen]
    if floating:
        raise SolverError(f"floating subnetwork, disconnected nodes: {floating}")


class _NodalSystem:
    """Index maps and scratch arrays for repeated solves on one netlist."""

    def __init__(self, net: Netlist):
        _check_connected(net)
        self.net = net
        fixed = {net.ground: 0.0}
        self.source_order = [s.node for s in net.sources]
        for s in net.sources:
            fixed[s.node] = 0.0
        self.fixed_nodes = fixed
        self.unknown = [n for n in net.node_ids if n not in fixed]
        self.u_index = {n: k for k, n in enumerate(self.unknown)}
        self.n_u = len(self.unknown)
        # per-branch endpoint slots: unknown index, or -1 for fixed nodes
        self.a_slot = []
        self.b_slot = []
        for b in net.branches:
            self.a_slot.append(self.u_index.get(b.from_node, -1))
            self.b_slot.append(self.u_index.get(b.to_node, -1))
        self._A = np.zeros((self.n_u, self.n_u))
        self._rhs = np.zeros(self.n_u)

    def solve(self, g: list[float], j: list[float], fixed_v: dict[str, float],
              when: str = "") -> dict[str, float]:
        """Node voltages for branch conductances g, injections j (from->to),
        and fixed node potentials. Raises SolverError on a singular system."""
        n_u = self.n_u
        voltages = dict(fixed_v)
        if n_u == 0:
            return voltages
        A = self._A
        rhs = self._rhs
        A[:] = 0.0
        rhs[:] = 0.0
        branches = self.net.branches
        for e in range(len(branches)):
            ge = g[e]
            je = j[e]
            a = self.a_slot[e]
            b = self.b_slot[e]
            if a >= 0:
                A[a, a] += ge
                rhs[a] -= je
                if b >= 0:
                    A[a, b] -= ge
                else:
                    rhs[a] += ge * fixed_v[branches[e].to_node]
            if b >= 0:
                A[b, b] += ge
                rhs[b] += je
                if a >= 0:
                    A[b, a] -= ge
                else:
                    rhs[b] += ge * fixed_v[branches[e].from_node]
        if n_u == 1:
            a00 = A[0, 0]
            if a00 == 0.0:
                raise SolverError(f"singular nodal system{when}")
            sol = [rhs[0] / a00]
        elif n_u == 2:
            det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
            if det == 0.0:
                raise SolverError(f"singular nodal system{when}")
            sol = [(rhs[0] * A[1, 1] - rhs[1] * A[0, 1]) / det,
                   (rhs[1] * A[0, 0] - rhs[0] * A[1, 0]) / det]
        else:
            try:
                sol = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                raise SolverError(f"singular nodal system{when}") from None
        for k, name in enumerate(self.unknown):
            voltages[name] = float(sol[k])
        return voltages

    def residuals(self, currents: list[float],
                  include_sources: bool = False) -> dict[str, float]:
        """Signed current sum at each non-fixed node (and optionally at
        source nodes); exact solutions give zeros."""
        sums = {n: 0.0 for n in self.unknown}
        if include_sources:
            for n in self.source_order:
                sums[n] = 0.0
        for e, b in enumerate(self.net.branches):
            if b.from_node in sums:
                sums[b.from_node] -= currents[e]
            if b.to_node in sums:
                sums[b.to_node] += currents[e]
        return sums


def solve_operating_point(
    net: Netlist,
    conductances: dict[str, float],
    injections: dict[str, float],
    source_voltages: dict[str, float],
    solve_tolerance: float = 1e-9,
) -> dict[str, float]:
    """One linear nodal solve with explicit per-branch conductances (S) and
    injection currents (A, flowing from-node to to-node), and fixed source
    potentials. Returns all node voltages with ground at exactly 0.

    The solution is residual-checked: the signed current sum at every
    non-source node must not exceed ``solve_tolerance``.
    """
    sys_ = _NodalSystem(net)
    fixed_v = {net.ground: 0.0}
    for s in net.sources:
        try:
            fixed_v[s.node] = float(source_voltages[s.node])
        except KeyError:
            raise ValueError(f"missing source voltage for node {s.node!r}") from None
    g = []
    j = []
    for b in net.branches:
        try:
            g.append(float(conductances[b.id]))
        except KeyError:
            raise ValueError(f"missing conductance for branch {b.id!r}") from None
        j.append(float(injections.get(b.id, 0.0)))
    voltages = sys_.solve(g, j, fixed_v)
    currents = [g[e] * (voltages[b.from_node] - voltages[b.to_node]) + j[e]
                for e, b in enumerate(net.branches)]
    worst = max((abs(r) for r in sys_.residuals(currents).values()), default=0.0)
    if worst > solve_tolerance:
        raise SolverError(f"residual {worst:.3e} exceeds tolerance "
                          f"{solve_tolerance:.3e}")
    return voltages


class NetworkSim:
    """Stateful stepper for one netlist: persistent device states, one
    nodal solve per step. ``run_transient`` drives it for single-shot runs;
    experiments that need state to survive across drive phases (the T-maze)
    hold one instance and call :meth:`run_phase` repeatedly.
    """

    def __init__(self, net: Netlist, dt: float, solve_tolerance: float = 1e-9,
                 rng: np.random.Generator | None = None):
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.net = net
        self.dt = dt
        self.solve_tolerance = solve_tolerance
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.sys = _NodalSystem(net)
        branches = net.branches
        self.n_b = len(branches)
        self.mem_idx = [e for e in range(self.n_b)
                        if isinstance(branches[e], MemristorBranch)]
        self._noisy = [e for e in self.mem_idx
                       if branches[e].params.noise_amp > 0.0]
        self.states: dict[int, DeviceState] = {
            e: DeviceState(x=branches[e].x0) for e in self.mem_idx}
        self._decays = {e: math.exp(-dt / branches[e].params.tau_ion)
                        for e in self.mem_idx}
        self._g = [0.0] * self.n_b
        self._j = [0.0] * self.n_b
        for e in range(self.n_b):
            if isinstance(branches[e], ResistorBranch):
                self._g[e] = 1.0 / branches[e].ohms
        self._fixed_v = {net.ground: 0.0}

    def state_of(self, branch_id: str) -> DeviceState:
        for e in self.mem_idx:
            if self.net.branches[e].id == branch_id:
                return self.states[e]
        raise KeyError(f"no memristor branch {branch_id!r}")

    def step(self, source_v: dict[str, float],
             when: str = "") -> tuple[dict[str, float], list[float]]:
        """Advance one step with the given source potentials; returns the
        node voltages and per-branch currents (declaration order)."""
        branches = self.net.branches
        fixed_v = self._fixed_v
        for s in self.net.sources:
            fixed_v[s.node] = source_v[s.node]
        noise = {e: branches[e].params.noise_amp * (2.0 * self.rng.random() - 1.0)
                 for e in self._noisy}
        g = self._g
        j = self._j
        for e in self.mem_idx:
            p = branches[e].params
            st = self.states[e]
            m = p.r_on * st.x + p.r_off * (1.0 - st.x)
            g[e] = p.polarity / m + p.gamma * p.kappa
            j[e] = p.gamma * (st.s * self._decays[e] - p.kappa * st.v_prev) \
                + noise.get(e, 0.0)

        voltages = self.sys.solve(g, j, fixed_v, when=when)

        currents = [0.0] * self.n_b
        for e in range(self.n_b):
            b = branches[e]
            v_e = voltages[b.from_node] - voltages[b.to_node]
            if e in self.states:
                try:
                    self.states[e], currents[e] = _step_core(
                        b.params, self.states[e], v_e, self.dt,
                        self._decays[e], noise.get(e, 0.0))
                except (ValueError, OverflowError) as err:
                    raise SolverError(
                        f"branch {b.id!r} failed{when}: {err}") from None
                if not math.isfinite(currents[e]):
                    raise SolverError(f"branch {b.id!r} current non-finite{when}")
            else:
                currents[e] = g[e] * v_e
        return voltages, currents

    def run_phase(self, waves: dict[str, "object"], n_steps: int
                  ) -> tuple[np.ndarray, dict[str, np.ndarray],
                             dict[str, np.ndarray]]:
        """Run ``n_steps`` with per-source waveforms evaluated on a local
        clock starting at 0. Returns (times, branch currents, transient s
        series per memristor branch); states persist afterwards."""
        net = self.net
        dt = self.dt
        times = np.arange(n_steps) * dt
        amps = np.empty((n_steps, self.n_b))
        ss = np.empty((n_steps, len(self.mem_idx)))
        src_v = {}
        for k in range(n_steps):
            t = k * dt
            for s in net.sources:
                src_v[s.node] = eval_waveform(waves[s.node], t)
            _, currents = self.step(src_v, when=f" at phase step {k}")
            amps[k, :] = currents
            for c, e in enumerate(self.mem_idx):
                ss[k, c] = self.states[e].s
        curr = {net.branches[e].id: amps[:, e] for e in range(self.n_b)}
        s_ser = {net.branches[e].id: ss[:, c]
                 for c, e in enumerate(self.mem_idx)}
        return times, curr, s_ser


def run_transient(net: Netlist, config: SimConfig,
                  record_state: bool = False) -> Trace:
    """Integrate the network from fresh device states over [0, t_end].

    Per step: evaluate the sources, assemble each memristor's affine
    current law at frozen state, solve the nodal system, then advance every
    device with its solved branch voltage. Samples are recorded every
    ``record_every`` steps, including step 0; recorded steps are
    residual-checked against ``solve_tolerance``.

    Deterministic for a fixed ``rng_seed`` (the rng is consumed only by
    branches with ``noise_amp > 0``, in declaration order).
    """
    sim = NetworkSim(net, config.dt, config.solve_tolerance,
                     rng=np.random.default_rng(config.rng_seed))
    dt = config.dt
    n_steps = int(math.floor(config.t_end / dt))
    n_rec = n_steps // config.record_every + 1

    branches = net.branches
    n_b = len(branches)
    mem_idx = sim.mem_idx
    node_ids = net.node_ids

    times = np.empty(n_rec)
    volts = np.empty((n_rec, len(node_ids)))
    amps = np.empty((n_rec, n_b))
    xs = np.empty((n_rec, len(mem_idx))) if record_state else None
    ss = np.empty((n_rec, len(mem_idx))) if record_state else None

    src_v = {}
    rec = 0
    for k in range(n_steps + 1):
        t = k * dt
        for s in net.sources:
            src_v[s.node] = eval_waveform(s.waveform, t)
        voltages, currents = sim.step(src_v, when=f" at t={t:.6g} s")

        if k % config.record_every == 0:
            worst = max((abs(r) for r in sim.sys.residuals(currents).values()),
                        default=0.0)
            if worst > config.solve_tolerance:
                raise SolverError(f"KCL residual {worst:.3e} exceeds tolerance "
                                  f"at t={t:.6g} s")
            times[rec] = t
            for c, n in enumerate(node_ids):
                volts[rec, c] = voltages[n]
            amps[rec, :] = currents
            if record_state:
                for c, e in enumerate(mem_idx):
                    xs[rec, c] = sim.states[e].x
                    ss[rec, c] = sim.states[e].s
            rec += 1

    trace = Trace(
        times=times,
        node_voltages={n: volts[:, c] for c, n in enumerate(node_ids)},
        branch_currents={branches[e].id: amps[:, e] for e in range(n_b)},
        metadata={"netlist_hash": netlist_hash(net), "config": config.to_dict()},
    )
    if record_state:
        trace.branch_x = {branches[e].id: xs[:, c] for c, e in enumerate(mem_idx)}
        trace.branch_s = {branches[e].id: ss[:, c] for c, e in enumerate(mem_idx)}
    return trace


def source_currents(net: Netlist, trace: Trace) -> dict[str, np.ndarray]:
    """Current delivered by each source into the network (A), from the
    recorded branch currents: positive when flowing out of the source node."""
    out: dict[str, np.ndarray] = {}
    for node in net.source_nodes():
        total = np.zeros_like(trace.times)
        for b in net.branches:
            if b.from_node == node:
                total = total + trace.branch_currents[b.id]
            if b.to_node == node:
                total = total - trace.branch_currents[b.id]
        out[node] = total
    return out


def kcl_residuals(net: Netlist, trace: Trace) -> dict[str, np.ndarray]:
    """Per-step signed current sums at every non-source, non-ground node."""
    internal = [n for n in net.node_ids
                if n != net.ground and n not in net.source_nodes()]
    sums = {n: np.zeros_like(trace.times) for n in internal}
    for b in net.branches:
        if b.from_node in sums:
            sums[b.from_node] -= trace.branch_currents[b.id]
        if b.to_node in sums:
            sums[b.to_node] += trace.branch_currents[b.id]
    return sums


def trace_to_csv(trace: Trace, node_order: list[str],
                 branch_order: list[str]) -> str:
    """Serialize as ``t,<node>...,<branch>...`` with round-trip floats."""
    header = ",".join(["t", *node_order, *branch_order])
    lines = [header]
    cols = [trace.times] + [trace.node_voltages[n] for n in node_order] \
        + [trace.branch_currents[b] for b in branch_order]
    for row in zip(*cols):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def trace_from_csv(text: str) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Parse a trace CSV into (times, named column arrays)."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines:
        raise ValueError("empty trace CSV")
    names = lines[0].split(",")
    if names[0] != "t":
        raise ValueError("trace CSV must start with a 't' column")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.size == 0:
        raise ValueError("trace CSV has no data rows")
    if data.shape[1] != len(names):
        raise ValueError("trace CSV row width does not match header")
    return data[:, 0], {names[c]: data[:, c] for c in range(1, len(names))}
