"""User-interaction structures: retweet graph, conversation forest, reply/mention groups."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional

from .corpus import Corpus

log = logging.getLogger(__name__)


class WeightedGraph:
    """Undirected weighted graph without self-loop edges.

    Aggregated graphs produced during Louvain carry the weight folded inside
    each super-node in ``self_weight``; it counts twice towards the degree,
    like a self-loop would.
    """

    def __init__(self, nodes: Iterable[Hashable] = ()):
        self._adj: dict[Hashable, dict[Hashable, float]] = {}
        self.self_weight: dict[Hashable, float] = {}
        self.dropped_edges = 0
        for n in nodes:
            self.add_node(n)

    def add_node(self, node: Hashable) -> None:
        self._adj.setdefault(node, {})

    def add_edge(self, u: Hashable, v: Hashable, weight: float = 1.0) -> None:
        if u == v:
            raise ValueError(f"self-loop on {u!r}")
        if weight <= 0:
            raise ValueError("edge weights must be positive")
        self.add_node(u)
        self.add_node(v)
        self._adj[u][v] = self._adj[u].get(v, 0.0) + weight
        self._adj[v][u] = self._adj[v].get(u, 0.0) + weight

    def add_self_weight(self, node: Hashable, weight: float) -> None:
        self.add_node(node)
        if weight > 0:
            self.self_weight[node] = self.self_weight.get(node, 0.0) + weight

    @property
    def nodes(self) -> list:
        return list(self._adj)

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, node) -> bool:
        return node in self._adj

    def neighbors(self, node) -> dict:
        return self._adj[node]

    def weight(self, u, v) -> float:
        return self._adj.get(u, {}).get(v, 0.0)

    def edges(self) -> list[tuple]:
        """Each undirected edge once, as ``(u, v, w)`` in node insertion order."""
        order = {n: i for i, n in enumerate(self._adj)}
        out = []
        for u, nbrs in self._adj.items():
            for v, w in nbrs.items():
                if order[u] < order[v]:
                    out.append((u, v, w))
        return out

    def degree(self, node) -> float:
        return sum(self._adj[node].values()) + 2.0 * self.self_weight.get(node, 0.0)

    def total_weight(self) -> float:
        """Sum of edge weights plus folded self weights (the ``m`` of modularity)."""
        return sum(w for _, _, w in self.edges()) + sum(self.self_weight.values())

    def connected_components(self) -> list[set]:
        seen: set = set()
        comps = []
        for start in self._adj:
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for v in self._adj[u]:
                    if v not in comp:
                        comp.add(v)
                        stack.append(v)
            seen |= comp
            comps.append(comp)
        return comps

    def write_edgelist(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for u, v, w in self.edges():
                fh.write(f"{u} {v} {w:g}\n")

    def __repr__(self) -> str:
        return f"WeightedGraph({len(self)} nodes, {len(self.edges())} edges)"


def build_retweet_graph(corpus: Corpus) -> WeightedGraph:
    """Retweet network over all authors; edge weight counts retweets between a pair."""
    g = WeightedGraph(sorted({t.author_id for t in corpus}))
    for t in corpus:
        if t.retweet_of is None:
            continue
        original = corpus.get(t.retweet_of)
        if original is None:
            g.dropped_edges += 1
            continue
        if original.author_id != t.author_id:
            g.add_edge(t.author_id, original.author_id, 1.0)
    if g.dropped_edges:
        log.info("skipped %d retweets of out-of-corpus tweets", g.dropped_edges)
    return g


@dataclass
class ConversationForest:
    roots: list[str]
    parent: dict[str, str]
    broken_edges: list[tuple[str, str]] = field(default_factory=list)

    def root_of(self, tweet_id: str) -> str:
        while tweet_id in self.parent:
            tweet_id = self.parent[tweet_id]
        return tweet_id

    def trees(self, corpus: Corpus) -> dict[str, list[str]]:
        """Members of every tree keyed by root, both in corpus order."""
        out: dict[str, list[str]] = {r: [] for r in self.roots}
        for t in corpus:
            out[self.root_of(t.id)].append(t.id)
        return out


def build_conversation_forest(corpus: Corpus) -> ConversationForest:
    parent = {t.id: t.reply_to for t in corpus if t.reply_to is not None and t.reply_to in corpus}
    broken = []
    state: dict[str, int] = {}  # 1 = on current path, 2 = done
    for t in corpus:
        path = []
        node: Optional[str] = t.id
        while node is not None and state.get(node) is None:
            state[node] = 1
            path.append(node)
            nxt = parent.get(node)
            if nxt is not None and state.get(nxt) == 1:
                broken.append((node, nxt))
                del parent[node]
                nxt = None
            node = nxt
        for n in path:
            state[n] = 2
    if broken:
        log.warning("broke %d reply cycles", len(broken))
    roots = [t.id for t in corpus if t.id not in parent]
    return ConversationForest(roots, parent, broken)


class UnionFind:
    def __init__(self, items: Iterable[Hashable] = ()):
        self._parent: dict = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        self._parent.setdefault(x, x)

    def find(self, x):
        self.add(x)
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller representative wins; keeps results order-independent
            if rb < ra:
                ra, rb = rb, ra
            self._parent[rb] = ra

    def groups(self) -> list[list]:
        out: dict = {}
        for x in self._parent:
            out.setdefault(self.find(x), []).append(x)
        return sorted((sorted(g) for g in out.values()), key=lambda g: g[0])


def build_reply_mention_groups(corpus: Corpus) -> list[list[str]]:
    """Partition users into network-pooling groups.

    Every conversation root seeds a set: its author, its mentions, and the
    authors and mentions of its direct replies. Overlapping seed sets merge.
    Users appearing in no seed set stay on their own.
    """
    uf = UnionFind()
    for t in corpus:
        uf.add(t.author_id)
        for m in t.mentions:
            uf.add(m)
    direct: dict[str, list] = {}
    for t in corpus:
        if t.reply_to is not None and t.reply_to in corpus:
            direct.setdefault(t.reply_to, []).append(t)
    for t in corpus:
        if t.reply_to is not None and t.reply_to in corpus:
            continue
        seed = [t.author_id, *t.mentions]
        for r in direct.get(t.id, ()):
            seed.append(r.author_id)
            seed.extend(r.mentions)
        for u in seed[1:]:
            uf.union(seed[0], u)
    return uf.groups()
