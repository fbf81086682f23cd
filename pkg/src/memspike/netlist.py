"""Netlist representation and JSON ingestion.

A netlist is a set of named nodes (one of them ground), two-terminal
branches (memristors or resistors), and ideal voltage sources tied from a
node to ground. The JSON document mirrors the in-memory structure
field-for-field; see the README for the schema.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Union

from .device import DeviceParams
from .waveforms import Waveform, waveform_from_dict, waveform_to_dict

__all__ = ["NetlistError", "MemristorBranch", "ResistorBranch", "Branch",
           "Source", "Netlist", "parse_netlist", "netlist_to_dict", "netlist_hash"]


class NetlistError(ValueError):
    """Malformed or semantically invalid netlist document."""


@dataclass(frozen=True)
class MemristorBranch:
    id: str
    from_node: str
    to_node: str
    params: DeviceParams
    x0: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.x0 <= 1.0):
            raise NetlistError(f"branch {self.id!r}: x0 outside [0, 1]: {self.x0}")


@dataclass(frozen=True)
class ResistorBranch:
    id: str
    from_node: str
    to_node: str
    ohms: float

    def __post_init__(self):
        if not self.ohms > 0.0:
            raise NetlistError(f"branch {self.id!r}: resistance must be positive, "
                               f"got {self.ohms}")


Branch = Union[MemristorBranch, ResistorBranch]


@dataclass(frozen=True)
class Source:
    node: str
    waveform: Waveform


@dataclass(frozen=True)
class Netlist:
    node_ids: tuple[str, ...]
    ground: str
    branches: tuple[Branch, ...]
    sources: tuple[Source, ...]

    def __post_init__(self):
        _validate(self)

    def memristor_branches(self) -> list[MemristorBranch]:
        return [b for b in self.branches if isinstance(b, MemristorBranch)]

    def source_nodes(self) -> list[str]:
        return [s.node for s in self.sources]


def _validate(net: Netlist) -> None:
    nodes = net.node_ids
    if len(set(nodes)) != len(nodes):
        dupes = sorted({n for n in nodes if nodes.count(n) > 1})
        raise NetlistError(f"duplicate node ids: {dupes}")
    if net.ground not in nodes:
        raise NetlistError(f"ground node {net.ground!r} not declared in node_ids")
    if not net.branches:
        raise NetlistError("netlist has no branches")
    if not net.sources:
        raise NetlistError("netlist has no voltage sources")

    node_set = set(nodes)
    seen_ids: set[str] = set()
    for b in net.branches:
        if b.id in seen_ids:
            raise NetlistError(f"duplicate branch id: {b.id!r}")
        seen_ids.add(b.id)
        for endpoint in (b.from_node, b.to_node):
            if endpoint not in node_set:
                raise NetlistError(
                    f"branch {b.id!r} references undeclared node {endpoint!r}")
        if b.from_node == b.to_node:
            raise NetlistError(f"branch {b.id!r} is a self-loop on {b.from_node!r}")

    seen_src: set[str] = set()
    for s in net.sources:
        if s.node not in node_set:
            raise NetlistError(f"source references undeclared node {s.node!r}")
        if s.node == net.ground:
            raise NetlistError("source attached to the ground node")
        if s.node in seen_src:
            raise NetlistError(f"multiple sources on node {s.node!r}")
        seen_src.add(s.node)


def _branch_from_dict(d: dict) -> Branch:
    try:
        kind = d["kind"]
        bid = d["id"]
        from_node = d["from_node"]
        to_node = d["to_node"]
    except KeyError as e:
        raise NetlistError(f"branch missing field {e.args[0]!r}: {d!r}") from None
    if kind == "memristor":
        try:
            params = DeviceParams.from_dict(d["params"])
        except KeyError:
            raise NetlistError(f"memristor branch {bid!r} missing 'params'") from None
        except (TypeError, ValueError) as e:
            raise NetlistError(f"branch {bid!r}: bad device params: {e}") from None
        return MemristorBranch(id=bid, from_node=from_node, to_node=to_node,
                               params=params, x0=float(d.get("x0", 0.5)))
    if kind == "resistor":
        try:
            ohms = float(d["ohms"])
        except KeyError:
            raise NetlistError(f"resistor branch {bid!r} missing 'ohms'") from None
        return ResistorBranch(id=bid, from_node=from_node, to_node=to_node, ohms=ohms)
    raise NetlistError(f"branch {bid!r}: unknown kind {kind!r}")


def parse_netlist(text: str) -> Netlist:
    """Parse and validate a JSON netlist document.

    Raises NetlistError with the offending field or id on any problem,
    including JSON syntax errors (with line/column).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistError(f"invalid JSON at line {e.lineno} column {e.colno}: "
                           f"{e.msg}") from None
    if not isinstance(doc, dict):
        raise NetlistError("netlist document must be a JSON object")
    for field in ("node_ids", "ground", "branches", "sources"):
        if field not in doc:
            raise NetlistError(f"netlist document missing field {field!r}")
    try:
        branches = tuple(_branch_from_dict(b) for b in doc["branches"])
        sources = tuple(
            Source(node=s["node"], waveform=waveform_from_dict(s["waveform"]))
            for s in doc["sources"])
    except NetlistError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise NetlistError(f"malformed netlist entry: {e}") from None
    return Netlist(node_ids=tuple(doc["node_ids"]), ground=doc["ground"],
                   branches=branches, sources=sources)


def netlist_to_dict(net: Netlist) -> dict:
    branches = []
    for b in net.branches:
        if isinstance(b, MemristorBranch):
            branches.append({"id": b.id, "from_node": b.from_node,
                             "to_node": b.to_node, "kind": "memristor",
                             "params": b.params.to_dict(), "x0": b.x0})
        else:
            branches.append({"id": b.id, "from_node": b.from_node,
                             "to_node": b.to_node, "kind": "resistor",
                             "ohms": b.ohms})
    return {
        "node_ids": list(net.node_ids),
        "ground": net.ground,
        "branches": branches,
        "sources": [{"node": s.node, "waveform": waveform_to_dict(s.waveform)}
                    for s in net.sources],
    }


def netlist_hash(net: Netlist) -> str:
    """SHA-256 of the canonical JSON form; stable across field ordering."""
    canon = json.dumps(netlist_to_dict(net), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
