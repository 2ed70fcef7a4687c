"""Descriptive statistics of a country network.

Path lengths are hop counts (weights ignored); modularity uses weights.
Communities come from greedy agglomeration: starting from singletons, the
pair of linked communities with the largest modularity gain is merged until
no merge improves modularity. Gains tied within 1e-12 are broken by a
seeded random ranking of the communities, so results depend only on the
seed and the node order.
"""

from collections import deque
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graph
from .centrality import connected_components

GAIN_TOL = 1e-12
APL_SCOPES = ("components", "giant")
COMMUNITY_METHODS = ("greedy", "components")


@dataclass(frozen=True)
class NetworkSummary:
    nodes: int
    edges: int
    mean_degree: float
    mean_weighted_degree: float
    modularity: Optional[float]
    connected_components: int
    average_path_length: Optional[float]
    non_isolated_nodes: int

    def as_dict(self):
        return asdict(self)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def count_components(g):
    uf = _UnionFind(g.nodes)
    for i, j, _ in g.edges():
        uf.union(i, j)
    return len({uf.find(n) for n in g.nodes})


def _bfs_hops(g, source):
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in g.neighbors(v):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def average_path_length(g, scope="components"):
    """Mean hop distance over reachable unordered pairs.

    ``scope="giant"`` restricts the average to the largest component (ties
    go to the component with the smallest node). Returns None when there is
    no pair to average over.
    """
    if scope not in APL_SCOPES:
        raise ValueError(f"scope must be one of {APL_SCOPES}, got {scope!r}")
    nodes = g.nodes
    if scope == "giant":
        comps = connected_components(g)
        nodes = max(comps, key=len) if comps else ()
    total = pairs = 0
    for s in nodes:
        for t, d in _bfs_hops(g, s).items():
            if t > s:
                total += d
                pairs += 1
    return total / pairs if pairs else None


def modularity(g, partition):
    """Weighted modularity ``sum_c (e_c / m - (d_c / 2m) ** 2)``.

    ``partition`` is an iterable of node collections covering the graph.
    Returns None for an edgeless graph.
    """
    m = float(sum(float(w) for w in g.weights.values()))
    if m == 0:
        return None
    partition = [tuple(block) for block in partition]
    label = {}
    for c, block in enumerate(partition):
        for n in block:
            label[n] = c
    if set(label) != set(g.nodes) or sum(map(len, partition)) != len(g.nodes):
        raise ValueError("partition must cover every node exactly once")
    internal = np.zeros(len(partition))
    strength = np.zeros_like(internal)
    for i, j, w in g.edges():
        w = float(w)
        strength[label[i]] += w
        strength[label[j]] += w
        if label[i] == label[j]:
            internal[label[i]] += w
    return float(np.sum(internal / m - (strength / (2 * m)) ** 2))


def detect_communities(g, seed=0, method="greedy"):
    """Partition as a list of sorted node tuples, ordered by first node.

    ``method="components"`` returns the connected components instead of
    running the greedy agglomeration.
    """
    check_graph(g)
    if method not in COMMUNITY_METHODS:
        raise ValueError(f"method must be one of {COMMUNITY_METHODS}, got {method!r}")
    if method == "components":
        return connected_components(g)
    n = len(g.nodes)
    m = float(sum(float(w) for w in g.weights.values()))
    if m == 0:
        return [(v,) for v in g.nodes]
    rank = np.random.default_rng(seed).permutation(n)
    members = {c: [v] for c, v in enumerate(g.nodes)}
    a = {c: float(g.strength(v)) / (2 * m) for c, v in enumerate(g.nodes)}
    # e[c][d]: fraction of edge ends between communities c and d (c != d)
    e = {c: {} for c in members}
    for i, j, w in g.edges():
        ci, cj = g.index[i], g.index[j]
        half = float(w) / (2 * m)
        e[ci][cj] = e[ci].get(cj, 0.0) + half
        e[cj][ci] = e[cj].get(ci, 0.0) + half
    while True:
        best = None
        for c in sorted(e):
            for d, e_cd in e[c].items():
                if d <= c:
                    continue
                gain = 2.0 * (e_cd - a[c] * a[d])
                key = (min(rank[c], rank[d]), max(rank[c], rank[d]))
                if best is None or gain > best[0] + GAIN_TOL or (
                    abs(gain - best[0]) <= GAIN_TOL and key < best[1]
                ):
                    best = (gain, key, c, d)
        if best is None or best[0] <= GAIN_TOL:
            break
        _, _, c, d = best
        members[c].extend(members.pop(d))
        a[c] += a.pop(d)
        for x, e_dx in e.pop(d).items():
            if x == c:
                continue
            e[x].pop(d)
            e[c][x] = e[c].get(x, 0.0) + e_dx
            e[x][c] = e[x].get(c, 0.0) + e_dx
        e[c].pop(d, None)
    return sorted(tuple(sorted(block)) for block in members.values())


def summarize(g, seed=0, apl_scope="components", community_method="greedy"):
    """Table-1 style statistics of ``g``."""
    check_graph(g)
    n = len(g.nodes)
    edges = g.n_edges
    total_w = float(sum(float(w) for w in g.weights.values()))
    parts = detect_communities(g, seed=seed, method=community_method)
    touched = {v for e in g.weights for v in e}
    return NetworkSummary(
        nodes=n,
        edges=edges,
        mean_degree=2.0 * edges / n,
        mean_weighted_degree=2.0 * total_w / n,
        modularity=modularity(g, parts),
        connected_components=count_components(g),
        average_path_length=average_path_length(g, apl_scope),
        non_isolated_nodes=len(touched),
    )


NETSTATS_COLUMNS = ("category", "nodes", "edges", "degree", "weighted_degree",
                    "modularity", "cc", "apl", "non_isolated_nodes")


def _fmt(x):
    return "NA" if x is None else repr(x)


def write_netstats(rows, fh):
    """``rows`` is an iterable of ``(category, NetworkSummary)``."""
    fh.write("\t".join(NETSTATS_COLUMNS) + "\n")
    for category, s in rows:
        fh.write("\t".join([
            category, str(s.nodes), str(s.edges), _fmt(s.mean_degree), _fmt(s.mean_weighted_degree),
            _fmt(s.modularity), str(s.connected_components), _fmt(s.average_path_length),
            str(s.non_isolated_nodes),
        ]) + "\n")


class GreedyModularity(BaseEstimator):
    """``fit(g)`` sets ``communities_``, ``labels_`` (node -> block index) and
    ``modularity_``."""

    def __init__(self, random_state=0):
        self.random_state = random_state

    def fit(self, g, y=None):
        self.communities_ = detect_communities(g, seed=self.random_state)
        self.labels_ = {v: c for c, block in enumerate(self.communities_) for v in block}
        self.modularity_ = modularity(g, self.communities_)
        return self

    def predict(self, g=None):
        check_is_fitted(self, "labels_")
        return [self.labels_[v] for v in sorted(self.labels_)]
