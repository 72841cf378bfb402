"""DC/switch graph, shortest paths with deterministic tie-breaking, safe-target selection.

The routing metric is the per-link weight (1 per hop unless the file says
otherwise). Among equal-weight paths the lexicographically smallest node-label
sequence wins, so route choices are stable across runs and machines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from heapq import heappop, heappush
from pathlib import Path

import yaml

GBPS = 1e9  # bits per second; decimal convention, matching Gbps link ratings


class TopologyError(ValueError):
    pass


class NodeKind(Enum):
    DATA_CENTER = "dc"
    SWITCH = "switch"


@dataclass(frozen=True, slots=True)
class Node:
    label: str
    kind: NodeKind


@dataclass(frozen=True, slots=True)
class Link:
    a: str
    b: str
    capacity_bps: float
    weight: float = 1.0

    def __post_init__(self):
        if not self.capacity_bps > 0:
            raise TopologyError(f"link {self.a}-{self.b}: capacity must be > 0")
        if not self.weight > 0:
            raise TopologyError(f"link {self.a}-{self.b}: weight must be > 0")

    def other(self, label: str) -> str:
        return self.b if label == self.a else self.a


class Topology:
    """Immutable undirected graph of data centers and switches."""

    def __init__(self, nodes: list[Node], links: list[Link]):
        self.nodes: dict[str, Node] = {}
        for node in nodes:
            if node.label in self.nodes:
                raise TopologyError(f"duplicate node label {node.label!r}")
            self.nodes[node.label] = node
        self._adj: dict[str, dict[str, Link]] = {label: {} for label in self.nodes}
        self.links: list[Link] = []
        for link in links:
            for end in (link.a, link.b):
                if end not in self.nodes:
                    raise TopologyError(f"link references unknown node {end!r}")
            if link.a == link.b:
                raise TopologyError(f"self-link at {link.a!r}")
            if link.b in self._adj[link.a]:
                raise TopologyError(f"duplicate link {link.a}-{link.b}")
            self._adj[link.a][link.b] = link
            self._adj[link.b][link.a] = link
            self.links.append(link)
        self._check_connected()

    def _check_connected(self) -> None:
        if not self.nodes:
            raise TopologyError("empty topology")
        seen = set()
        stack = [next(iter(self.nodes))]
        while stack:
            label = stack.pop()
            if label in seen:
                continue
            seen.add(label)
            stack.extend(self._adj[label])
        if seen != set(self.nodes):
            missing = sorted(set(self.nodes) - seen)
            raise TopologyError(f"topology is not connected; unreachable: {missing}")

    @property
    def data_centers(self) -> list[str]:
        return sorted(n.label for n in self.nodes.values() if n.kind is NodeKind.DATA_CENTER)

    def neighbors(self, label: str) -> dict[str, Link]:
        return self._adj[label]

    def link(self, a: str, b: str) -> Link:
        try:
            return self._adj[a][b]
        except KeyError:
            raise TopologyError(f"no link between {a!r} and {b!r}") from None

    def with_uniform_capacity(self, capacity_bps: float) -> "Topology":
        """Copy with every link capacity replaced (the scenario bandwidth factor)."""
        links = [Link(l.a, l.b, capacity_bps, l.weight) for l in self.links]
        return Topology(list(self.nodes.values()), links)

    # --- file format ---------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        try:
            raw_nodes = data["nodes"]
            raw_links = data["links"]
        except (KeyError, TypeError):
            raise TopologyError("topology file needs 'nodes' and 'links' lists") from None
        nodes = []
        for entry in raw_nodes:
            try:
                kind = NodeKind(entry["kind"])
            except ValueError:
                raise TopologyError(
                    f"node {entry.get('label')!r}: kind must be 'dc' or 'switch'"
                ) from None
            nodes.append(Node(str(entry["label"]), kind))
        links = []
        for entry in raw_links:
            links.append(
                Link(
                    str(entry["a"]),
                    str(entry["b"]),
                    capacity_bps=float(entry["capacity_gbps"]) * GBPS,
                    weight=float(entry.get("weight", 1.0)),
                )
            )
        return cls(nodes, links)

    @classmethod
    def from_file(cls, path: str | Path) -> "Topology":
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
        return cls.from_dict(data)


def shortest_path(topo: Topology, src: str, dst: str) -> tuple[list[str], float]:
    """Minimum-weight path from src to dst and its weight.

    Dijkstra keyed on (weight, label sequence): with positive weights the
    lexicographic component breaks ties exactly, because equal-weight paths
    to one node are never prefixes of each other.
    """
    for label in (src, dst):
        if label not in topo.nodes:
            raise TopologyError(f"unknown node {label!r}")
    if src == dst:
        return [src], 0.0
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (src,))]
    done: set[str] = set()
    while heap:
        weight, path = heappop(heap)
        node = path[-1]
        if node in done:
            continue
        if node == dst:
            return list(path), weight
        done.add(node)
        for neighbor, link in topo.neighbors(node).items():
            if neighbor not in done:
                heappush(heap, (weight + link.weight, path + (neighbor,)))
    raise TopologyError(f"{dst!r} unreachable from {src!r}")


def path_weight(topo: Topology, path: list[str]) -> float:
    return sum(topo.link(a, b).weight for a, b in zip(path, path[1:]))


def nearest_safe_dc(
    topo: Topology, threatened: str, risk_set: set[str]
) -> tuple[str, list[str], float]:
    """The data center outside the risk set closest to the threatened one.

    Ties on path weight go to the smallest DC label. Raises when every DC is
    at risk (the caller records total loss for that DC).
    """
    node = topo.nodes.get(threatened)
    if node is None or node.kind is not NodeKind.DATA_CENTER:
        raise TopologyError(f"{threatened!r} is not a data center")
    if threatened not in risk_set:
        raise TopologyError(f"{threatened!r} is not in the risk set")
    candidates = [dc for dc in topo.data_centers if dc not in risk_set]
    if not candidates:
        raise TopologyError(f"no safe data center exists for {threatened!r}")
    best: tuple[float, str, list[str]] | None = None
    for dc in candidates:
        path, weight = shortest_path(topo, threatened, dc)
        if best is None or (weight, dc) < (best[0], best[1]):
            best = (weight, dc, path)
    return best[1], best[2], best[0]


def bottleneck_capacity(topo: Topology, path: list[str]) -> float:
    """Minimum link capacity along a path, in bits per second."""
    if len(path) < 2:
        return math.inf
    return min(topo.link(a, b).capacity_bps for a, b in zip(path, path[1:]))


def canonical_topology(capacity_gbps: float = 10.0) -> Topology:
    """Four DCs hanging off a four-switch line: DCi-Si, S1-S2-S3-S4, unit weights."""
    nodes = [Node(f"DC{i}", NodeKind.DATA_CENTER) for i in range(1, 5)]
    nodes += [Node(f"S{i}", NodeKind.SWITCH) for i in range(1, 5)]
    cap = capacity_gbps * GBPS
    links = [Link(f"DC{i}", f"S{i}", cap) for i in range(1, 5)]
    links += [Link(f"S{i}", f"S{i+1}", cap) for i in range(1, 4)]
    return Topology(nodes, links)
