"""Use-driven learning network over note transitions.

Nodes are notes; every ordered pair of distinct notes is a directed
connection whose weight is read from a discretized conduction profile,
indexed by how many times that connection has been used. Never-used
connections sit at a small floor weight so every walk stays irreducible.
Learning happens purely through use: each traversal bumps the connection's
usage count, which moves its weight along the profile table. There is no
fitness signal anywhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .device import DeviceParams

__all__ = ["Profile", "NoteGraph", "seed_from_sequence", "generate",
           "kl_divergence", "transition_distribution"]


@dataclass(frozen=True)
class Profile:
    """Weight lookup table: entry k is the weight after k uses (saturating
    at the last entry). Entries lie in (0, 1] with peak exactly 1."""

    table: tuple[float, ...]
    source_params: DeviceParams

    def __post_init__(self):
        if len(self.table) < 2:
            raise ValueError("profile table needs at least 2 entries")
        if max(self.table) != 1.0:
            raise ValueError("profile table must be normalized to peak 1")
        if min(self.table) <= 0.0:
            raise ValueError("profile table entries must be positive")

    def weight_for_count(self, count: int, epsilon: float,
                         invert: bool) -> float:
        if count <= 0:
            return epsilon
        w = self.table[min(count, len(self.table) - 1)]
        if invert:
            return max(1.0 - w, epsilon)
        return w

    def to_dict(self) -> dict:
        return {"table": list(self.table),
                "source_params": self.source_params.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Profile":
        return cls(table=tuple(float(x) for x in d["table"]),
                   source_params=DeviceParams.from_dict(d["source_params"]))


@dataclass
class NoteGraph:
    """Directed transition graph with per-edge usage counts.

    Weights are always derived from the profile table through the usage
    counts, so mutating ``counts`` is the only way state evolves.
    """

    n_notes: int
    profile: Profile
    counts: np.ndarray
    epsilon: float = 0.01
    rng_seed: int = 0
    invert: bool = False
    empty_seed: bool = False
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_notes < 2:
            raise ValueError("need at least 2 notes")
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.counts.shape != (self.n_notes, self.n_notes):
            raise ValueError("counts matrix shape mismatch")
        if np.any(self.counts < 0):
            raise ValueError("usage counts cannot be negative")
        self._rng = np.random.default_rng(self.rng_seed)

    def weight(self, a: int, b: int) -> float:
        if a == b:
            return 0.0
        return self.profile.weight_for_count(int(self.counts[a, b]),
                                             self.epsilon, self.invert)

    def weight_matrix(self) -> np.ndarray:
        w = np.empty((self.n_notes, self.n_notes))
        for a in range(self.n_notes):
            for b in range(self.n_notes):
                w[a, b] = self.weight(a, b)
        return w

    def to_dict(self) -> dict:
        return {"n_notes": self.n_notes, "profile": self.profile.to_dict(),
                "counts": self.counts.tolist(), "epsilon": self.epsilon,
                "rng_seed": self.rng_seed, "invert": self.invert}

    @classmethod
    def from_dict(cls, d: dict) -> "NoteGraph":
        return cls(n_notes=int(d["n_notes"]),
                   profile=Profile.from_dict(d["profile"]),
                   counts=np.asarray(d["counts"], dtype=np.int64),
                   epsilon=float(d.get("epsilon", 0.01)),
                   rng_seed=int(d.get("rng_seed", 0)),
                   invert=bool(d.get("invert", False)))


def seed_from_sequence(seq: list[int], n_notes: int, profile: Profile,
                       epsilon: float = 0.01, rng_seed: int = 0,
                       invert: bool = False) -> NoteGraph:
    """Count the transitions of a seed melody into a fresh graph.

    Self-transitions (repeated notes) are dropped. An empty seed yields a
    uniform-epsilon graph, flagged and warned about.
    """
    counts = np.zeros((n_notes, n_notes), dtype=np.int64)
    for a, b in zip(seq, seq[1:]):
        if not (0 <= a < n_notes and 0 <= b < n_notes):
            raise ValueError(f"note index out of range: {a if a >= n_notes else b}")
    if seq and not (0 <= seq[0] < n_notes):
        raise ValueError(f"note index out of range: {seq[0]}")
    for a, b in zip(seq, seq[1:]):
        if a != b:
            counts[a, b] += 1
    empty = len(seq) == 0
    if empty:
        warnings.warn("empty seed sequence: all connections at the floor weight",
                      stacklevel=2)
    return NoteGraph(n_notes=n_notes, profile=profile, counts=counts,
                     epsilon=epsilon, rng_seed=rng_seed, invert=invert,
                     empty_seed=empty)


def generate(graph: NoteGraph, length: int, start: int,
             rng: np.random.Generator | None = None) -> list[int]:
    """Walk the graph for ``length`` notes (including ``start``), sampling
    successors by weight and bumping each traversed connection's usage.

    The graph keeps adapting as it plays: every step mutates the counts, so
    the weights the walk sees depend on the walk itself.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if not (0 <= start < graph.n_notes):
        raise ValueError(f"start note out of range: {start}")
    if rng is None:
        rng = graph._rng
    n = graph.n_notes
    out = [start]
    current = start
    weights = np.empty(n)
    for _ in range(length - 1):
        for b in range(n):
            weights[b] = graph.weight(current, b)
        total = weights.sum()
        nxt = int(rng.choice(n, p=weights / total))
        graph.counts[current, nxt] += 1
        out.append(nxt)
        current = nxt
    return out


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) in nats; q is smoothed by 1e-9 and renormalized, terms
    with p_i = 0 contribute nothing."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"support size mismatch: {p.shape} vs {q.shape}")
    p = p / p.sum()
    q = q + 1e-9
    q = q / q.sum()
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def transition_distribution(seq: list[int], n_notes: int) -> np.ndarray:
    """Empirical distribution over ordered note pairs (a, b), a != b,
    flattened row-major with the diagonal removed."""
    counts = np.zeros((n_notes, n_notes))
    for a, b in zip(seq, seq[1:]):
        if a != b:
            counts[a, b] += 1
    off_diag = ~np.eye(n_notes, dtype=bool)
    flat = counts[off_diag]
    total = flat.sum()
    if total == 0:
        raise ValueError("sequence has no transitions")
    return flat / total
