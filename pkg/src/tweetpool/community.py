"""Louvain community detection by greedy modularity maximisation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Optional

import numpy as np

from .graph import WeightedGraph

PASS_TOLERANCE = 1e-10
_MOVE_EPS = 1e-14


@dataclass
class Partition:
    assignment: dict

    def __post_init__(self):
        ids = sorted(set(self.assignment.values()))
        if ids != list(range(len(ids))):
            raise ValueError("community ids must be dense 0..C-1")

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def __getitem__(self, node) -> int:
        return self.assignment[node]

    def __contains__(self, node) -> bool:
        return node in self.assignment

    def __len__(self) -> int:
        return len(self.assignment)

    def communities(self) -> list[list]:
        out: list[list] = [[] for _ in range(self.n_communities)]
        for node, c in self.assignment.items():
            out[c].append(node)
        return out

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for node, c in self.assignment.items():
                fh.write(f"{node} {c}\n")

    @classmethod
    def from_labels(cls, labels: Mapping[Hashable, Hashable]) -> "Partition":
        """Relabel arbitrary community keys densely by first appearance."""
        dense: dict = {}
        return cls({n: dense.setdefault(c, len(dense)) for n, c in labels.items()})

    @classmethod
    def singletons(cls, graph: WeightedGraph) -> "Partition":
        return cls({n: i for i, n in enumerate(graph.nodes)})


def modularity(graph: WeightedGraph, partition: Partition | Mapping, resolution: float = 1.0) -> float:
    assignment = partition.assignment if isinstance(partition, Partition) else partition
    for n in graph.nodes:
        if n not in assignment:
            raise KeyError(f"node {n!r} missing from partition")
    m = graph.total_weight()
    if m == 0:
        return 0.0
    inner: dict = {}
    degree: dict = {}
    for n in graph.nodes:
        c = assignment[n]
        degree[c] = degree.get(c, 0.0) + graph.degree(n)
        inner[c] = inner.get(c, 0.0) + graph.self_weight.get(n, 0.0)
    for u, v, w in graph.edges():
        if assignment[u] == assignment[v]:
            inner[assignment[u]] += w
    return sum(inner[c] / m - resolution * (degree[c] / (2.0 * m)) ** 2 for c in degree)


def local_move_phase(graph: WeightedGraph, partition: Partition, seed: int = 0,
                     resolution: float = 1.0) -> tuple[Partition, bool]:
    """Move single nodes to the neighbouring community with the best gain.

    Sweeps repeat, visiting nodes in a freshly shuffled order each time,
    until a sweep moves nothing or gains less than ``PASS_TOLERANCE`` in total.
    """
    nodes = graph.nodes
    n = len(nodes)
    m = graph.total_weight()
    if n == 0 or m == 0:
        return partition, False
    index = {node: i for i, node in enumerate(nodes)}
    nbrs = [[(index[v], w) for v, w in graph.neighbors(node).items()] for node in nodes]
    k = np.array([graph.degree(node) for node in nodes])
    comm = np.array([partition[node] for node in nodes])
    tot = np.zeros(max(n, comm.max() + 1))
    np.add.at(tot, comm, k)
    scale = resolution / (2.0 * m)
    rng = np.random.default_rng(seed)

    improved = False
    while True:
        moved = 0
        pass_gain = 0.0
        for i in rng.permutation(n):
            ci = comm[i]
            ki = k[i]
            links: dict[int, float] = {}
            for j, w in nbrs[i]:
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            own = links.get(ci, 0.0) - tot[ci] * ki * scale
            best_c, best = ci, own
            for c in sorted(links):
                gain = links[c] - tot[c] * ki * scale
                if gain > best + _MOVE_EPS:
                    best_c, best = c, gain
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                moved += 1
                pass_gain += (best - own) / m
        if moved:
            improved = True
        if moved == 0 or pass_gain < PASS_TOLERANCE:
            break
    return Partition.from_labels({node: int(comm[i]) for i, node in enumerate(nodes)}), improved


def aggregate_graph(graph: WeightedGraph, partition: Partition) -> WeightedGraph:
    agg = WeightedGraph(range(partition.n_communities))
    for node in graph.nodes:
        agg.add_self_weight(partition[node], graph.self_weight.get(node, 0.0))
    for u, v, w in graph.edges():
        cu, cv = partition[u], partition[v]
        if cu == cv:
            agg.add_self_weight(cu, w)
        else:
            agg.add_edge(cu, cv, w)
    return agg


def louvain(graph: WeightedGraph, resolution: float = 1.0, seed: int = 0,
            trace: Optional[list] = None) -> Partition:
    """Louvain community detection.

    If ``trace`` is a list, one ``(q_before, q_after)`` pair per local-move
    phase is appended to it.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    rng = np.random.default_rng(seed)
    membership = {node: node for node in graph.nodes}
    level = graph
    while len(level):
        start = Partition.singletons(level)
        q_before = modularity(level, start, resolution)
        part, improved = local_move_phase(level, start, int(rng.integers(2**32)), resolution)
        q_after = modularity(level, part, resolution)
        if q_after < q_before - 1e-12:
            raise AssertionError(f"modularity decreased in local move: {q_before} -> {q_after}")
        if trace is not None:
            trace.append((q_before, q_after))
        if not improved:
            break
        membership = {node: part[c] for node, c in membership.items()}
        if part.n_communities == len(level):
            break
        level = aggregate_graph(level, part)
    return Partition.from_labels(membership)
