"""Disparity-filter backbone of a weighted country graph.

At an endpoint with degree ``k`` and strength ``s`` the normalized weight
``p = w / s`` of an edge is compared with a null model in which the node's
strength is split by ``k - 1`` uniform break points. The probability of a
share at least ``p`` is ``(1 - p) ** (k - 1)``; the Monte-Carlo mode samples
the same null directly. An edge is kept when either endpoint finds it
significant.
"""

import zlib
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_graph, check_node, check_significance
from .exceptions import GraphError
from .projection import WeightedCountryGraph, _edge_key, format_weight

METHODS = ("analytic", "montecarlo")
MIN_MC_SAMPLES = 1000


def _mc_seed(seed, edge, endpoint):
    # per-(edge, endpoint) stream, independent of evaluation order
    tag = zlib.crc32(f"{edge[0]}|{edge[1]}|{endpoint}".encode())
    return np.random.SeedSequence([int(seed), tag])


def disparity_pvalue(share, degree):
    """Closed-form tail probability ``(1 - share) ** (degree - 1)``."""
    if degree <= 1:
        return 1.0
    return float((1.0 - share) ** (degree - 1))


def montecarlo_pvalue(share, degree, samples, rng):
    """Fraction of uniform-split null draws giving this edge a share >= ``share``.

    ``degree - 1`` uniform points cut [0, 1] into ``degree`` pieces; the
    piece adjacent to 0 is the edge's share, whose length is the minimum of
    the break points.
    """
    if degree <= 1:
        return 1.0
    cuts = rng.random((samples, degree - 1))
    return float(np.mean(cuts.min(axis=1) >= share))


def edge_significance(g, edge, endpoint, method="analytic", samples=100_000, seed=0):
    """p-value of ``edge`` seen from ``endpoint``.

    Parameters
    ----------
    g : WeightedCountryGraph
    edge : pair of countries
    endpoint : one of the two countries of ``edge``
    method : {"analytic", "montecarlo"}
    samples : int
        Null draws for the Monte-Carlo mode (at least 1000).
    seed : int
        Root seed of the Monte-Carlo mode.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    i, j = edge
    key = _edge_key(i, j)
    if endpoint not in key:
        raise GraphError(f"endpoint {endpoint!r} is not on edge {key}")
    check_node(g, endpoint)
    w = g.weight(i, j)
    if not w > 0:
        raise GraphError(f"{key} is not an edge of the graph")
    strength = g.strength(endpoint)
    if not strength > 0:
        raise GraphError(f"endpoint {endpoint!r} has zero strength")
    k = g.degree(endpoint)
    share = float(w / strength)
    if method == "analytic":
        return disparity_pvalue(share, k)
    samples = check_count(samples, "samples", minimum=MIN_MC_SAMPLES)
    rng = np.random.default_rng(_mc_seed(seed, key, endpoint))
    return montecarlo_pvalue(share, k, samples, rng)


@dataclass(frozen=True)
class BackboneGraph:
    """Projection edges annotated with per-endpoint p-values.

    ``pvalues[(i, j)] = (p_i, p_j)`` for every projection edge with
    ``i < j``; ``retained`` holds the kept edge keys. ``graph`` is the
    backbone itself: all projection nodes, retained edges only.
    """

    projection: WeightedCountryGraph
    pvalues: MappingProxyType
    retained: frozenset
    significance: float
    method: str

    @property
    def nodes(self):
        return self.projection.nodes

    @property
    def graph(self):
        return self.projection.subgraph_edges(self.retained)

    def rows(self):
        """``(i, j, weight, p_i, p_j, retained)`` tuples in edge order."""
        return [
            (i, j, w, *self.pvalues[(i, j)], (i, j) in self.retained)
            for i, j, w in self.projection.edges()
        ]

    def non_isolated_nodes(self):
        return tuple(sorted({n for e in self.retained for n in e}))


def extract_backbone(g, significance=0.05, method="analytic", samples=100_000, seed=0):
    """Keep edges significant at ``significance`` from at least one endpoint."""
    check_graph(g)
    significance = check_significance(significance)
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if method == "montecarlo":
        check_count(samples, "samples", minimum=MIN_MC_SAMPLES)
    pvalues = {}
    retained = set()
    for i, j, _ in g.edges():
        p_i = edge_significance(g, (i, j), i, method, samples, seed)
        p_j = edge_significance(g, (i, j), j, method, samples, seed)
        pvalues[(i, j)] = (p_i, p_j)
        if min(p_i, p_j) < significance:
            retained.add((i, j))
    return BackboneGraph(g, MappingProxyType(pvalues), frozenset(retained), significance, method)


def write_backbone(bb, fh):
    fh.write("i\tj\tweight\tp_i\tp_j\tretained\n")
    for i, j, w, p_i, p_j, kept in bb.rows():
        fh.write(f"{i}\t{j}\t{format_weight(w)}\t{p_i!r}\t{p_j!r}\t{int(kept)}\n")


class DisparityFilter(BaseEstimator):
    """Estimator form of :func:`extract_backbone`.

    ``fit`` scores every edge (``backbone_``); ``transform`` returns the
    backbone graph for the fitted input.
    """

    def __init__(self, significance=0.05, method="analytic", samples=100_000, random_state=0):
        self.significance = significance
        self.method = method
        self.samples = samples
        self.random_state = random_state

    def fit(self, g, y=None):
        self.backbone_ = extract_backbone(
            g, self.significance, self.method, self.samples, self.random_state or 0
        )
        self.n_retained_ = len(self.backbone_.retained)
        return self

    def transform(self, g=None):
        check_is_fitted(self, "backbone_")
        if g is not None and g != self.backbone_.projection:
            raise GraphError("transform received a different graph than fit; refit first")
        return self.backbone_.graph

    def fit_transform(self, g, y=None):
        return self.fit(g).transform()
