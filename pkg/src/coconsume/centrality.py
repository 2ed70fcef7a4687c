"""Alpha-tuned shortest paths, closeness, betweenness and eigenvector centrality.

An edge of weight ``w`` costs ``1 / w ** alpha``. ``alpha = 0`` makes every
edge cost 1 (hop counts), ``alpha = 1`` is plain Dijkstra on reciprocal
weights. Path costs are compared with a relative tolerance of 1e-12 so that
equal-cost routes built from irrational edge costs are counted together.
"""

import heapq
import math
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_alpha, check_count, check_graph, check_node
from .exceptions import ConvergenceError, DisconnectedGraphError, GraphError

TIE_RTOL = 1e-12
DEFAULT_ALPHA = 0.5


def _costs(g, alpha):
    """Adjacency with per-edge traversal costs; validates weights."""
    out = {}
    for node in g.nodes:
        nbrs = {}
        for other, w in g.neighbors(node).items():
            w = float(w)
            if not w > 0:
                raise GraphError(f"non-positive weight on edge {node}-{other}")
            nbrs[other] = 1.0 if alpha == 0 else w ** -alpha
        out[node] = nbrs
    return out


def _same_cost(a, b):
    return abs(a - b) <= TIE_RTOL * max(abs(a), abs(b))


@dataclass(frozen=True)
class ShortestPaths:
    """Single-source result.

    ``distance[v]`` is ``math.inf`` for unreachable nodes, ``sigma[v]`` the
    number of minimum-cost paths and ``predecessors[v]`` the nodes that
    precede ``v`` on them. ``order`` lists reachable nodes by
    non-decreasing distance.
    """

    source: str
    distance: MappingProxyType
    sigma: MappingProxyType
    predecessors: MappingProxyType
    order: tuple


def _dijkstra(costs, source):
    dist = {source: 0.0}
    sigma = {source: 1}
    preds = {source: []}
    done = set()
    order = []
    heap = [(0.0, 0, source)]
    tick = 1
    while heap:
        d, _, v = heapq.heappop(heap)
        if v in done or d > dist[v]:
            continue
        done.add(v)
        order.append(v)
        for u, c in costs[v].items():
            if u in done:
                continue
            cand = d + c
            best = dist.get(u)
            if best is None or (cand < best and not _same_cost(cand, best)):
                dist[u] = cand
                sigma[u] = sigma[v]
                preds[u] = [v]
                heapq.heappush(heap, (cand, tick, u))
                tick += 1
            elif _same_cost(cand, best):
                sigma[u] += sigma[v]
                preds[u].append(v)
    return dist, sigma, preds, order


def alpha_distances(g, source, alpha=DEFAULT_ALPHA):
    """Minimum alpha-cost from ``source`` to every node, with path counts."""
    check_graph(g)
    check_node(g, source)
    alpha = check_alpha(alpha)
    dist, sigma, preds, order = _dijkstra(_costs(g, alpha), source)
    full_dist = {n: dist.get(n, math.inf) for n in g.nodes}
    full_sigma = {n: sigma.get(n, 0) for n in g.nodes}
    full_preds = {n: tuple(sorted(preds.get(n, ()))) for n in g.nodes}
    return ShortestPaths(
        source,
        MappingProxyType(full_dist),
        MappingProxyType(full_sigma),
        MappingProxyType(full_preds),
        tuple(order),
    )


def connected_components(g):
    """Components as sorted tuples, ordered by their smallest node."""
    seen = set()
    comps = []
    for start in g.nodes:
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in g.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        comps.append(tuple(sorted(comp)))
    return sorted(comps)


def component_sizes(g):
    return {n: len(c) for c in connected_components(g) for n in c}


def closeness(g, alpha=DEFAULT_ALPHA, component_restrict=False):
    """Inverse sum of alpha-distances to all other nodes.

    A disconnected graph raises :class:`DisconnectedGraphError` unless
    ``component_restrict`` is set, in which case sums run inside each node's
    component (see :func:`component_sizes`). A node alone in its component
    scores 0.
    """
    check_graph(g)
    alpha = check_alpha(alpha)
    if not component_restrict and len(connected_components(g)) > 1:
        raise DisconnectedGraphError(
            "closeness is undefined on a disconnected graph; use component_restrict"
        )
    costs = _costs(g, alpha)
    scores = {}
    for node in g.nodes:
        dist = _dijkstra(costs, node)[0]
        total = sum(dist.values())
        scores[node] = 1.0 / total if total > 0 else 0.0
    return scores


def betweenness(g, alpha=DEFAULT_ALPHA):
    """Sum over unordered pairs {s, t} of the fraction of their
    minimum-cost paths passing through each node (no normalization)."""
    check_graph(g)
    alpha = check_alpha(alpha)
    costs = _costs(g, alpha)
    cb = dict.fromkeys(g.nodes, 0.0)
    for s in g.nodes:
        _, sigma, preds, order = _dijkstra(costs, s)
        delta = dict.fromkeys(order, 0.0)
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                cb[w] += delta[w]
    # every unordered pair was visited from both ends
    return {n: v / 2.0 for n, v in cb.items()}


def eigenvector_centrality(g, tol=1e-10, max_iter=10_000):
    """Dominant eigenvector of the weight matrix, scaled to a unit maximum.

    Power iteration runs on ``A + I`` (same eigenvectors, no oscillation on
    bipartite graphs) until the sup-norm change drops below ``tol``.

    Parameters
    ----------
    g : WeightedCountryGraph or square array-like
        Connected, non-negative, symmetric weights.
    """
    if isinstance(g, (np.ndarray, list)):
        a = np.asarray(g, dtype=float)
        nodes = list(range(a.shape[0]))
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise GraphError("weight matrix must be square and non-empty")
        if np.any(a < 0) or not np.allclose(a, a.T):
            raise GraphError("weight matrix must be symmetric and non-negative")
        reach = _matrix_reach(a)
    else:
        check_graph(g)
        a = g.to_numpy()
        nodes = list(g.nodes)
        reach = len(connected_components(g)) == 1
    if not reach:
        raise DisconnectedGraphError("eigenvector centrality requires a connected graph")
    max_iter = check_count(max_iter, "max_iter")
    m = a + np.eye(a.shape[0])
    x = np.ones(a.shape[0])
    residual = math.inf
    for _ in range(max_iter):
        nxt = m @ x
        nxt /= nxt.max()
        residual = float(np.max(np.abs(nxt - x)))
        x = nxt
        if residual < tol:
            return dict(zip(nodes, x.tolist()))
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual,
    )


def _matrix_reach(a):
    n = a.shape[0]
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in np.flatnonzero(a[v]):
            if u not in seen:
                seen.add(int(u))
                stack.append(int(u))
    return len(seen) == n


@dataclass(frozen=True)
class CentralityScores:
    closeness: MappingProxyType
    betweenness: MappingProxyType
    alpha: float
    fingerprint: str
    component_size: MappingProxyType

    def to_frame(self):
        df = pd.DataFrame(
            {
                "closeness": pd.Series(dict(self.closeness)),
                "betweenness": pd.Series(dict(self.betweenness)),
                "component_size": pd.Series(dict(self.component_size)),
            }
        )
        df.index.name = "country"
        df["alpha"] = self.alpha
        return df.sort_index()


def centrality_scores(g, alpha=DEFAULT_ALPHA, component_restrict=False):
    return CentralityScores(
        MappingProxyType(closeness(g, alpha, component_restrict)),
        MappingProxyType(betweenness(g, alpha)),
        check_alpha(alpha),
        g.fingerprint(),
        MappingProxyType(component_sizes(g)),
    )


def alpha_grid(g, alphas, component_restrict=False):
    """Centralities over several alpha values, as one long table."""
    frames = [centrality_scores(g, a, component_restrict).to_frame() for a in alphas]
    return pd.concat(frames).reset_index().sort_values(["alpha", "country"], kind="stable")


def write_centrality(scores, fh, with_component_size=False):
    """TSV with columns country, closeness, betweenness, alpha.

    ``scores`` is one :class:`CentralityScores` or a list of them (alpha grid).
    """
    if isinstance(scores, CentralityScores):
        scores = [scores]
    cols = ["country", "closeness", "betweenness", "alpha"]
    if with_component_size:
        cols.append("component_size")
    fh.write("\t".join(cols) + "\n")
    for sc in scores:
        for n in sorted(sc.closeness):
            row = [n, repr(sc.closeness[n]), repr(sc.betweenness[n]), repr(sc.alpha)]
            if with_component_size:
                row.append(str(sc.component_size[n]))
            fh.write("\t".join(row) + "\n")


class AlphaCentrality(BaseEstimator):
    """Closeness and betweenness of a weighted graph for one alpha.

    Attributes
    ----------
    closeness_, betweenness_ : dict
    scores_ : CentralityScores
    """

    def __init__(self, alpha=DEFAULT_ALPHA, component_restrict=False):
        self.alpha = alpha
        self.component_restrict = component_restrict

    def fit(self, g, y=None):
        self.scores_ = centrality_scores(g, self.alpha, self.component_restrict)
        self.closeness_ = dict(self.scores_.closeness)
        self.betweenness_ = dict(self.scores_.betweenness)
        return self

    def transform(self, g=None):
        check_is_fitted(self, "scores_")
        return self.scores_.to_frame()

    def fit_transform(self, g, y=None):
        return self.fit(g).transform()
