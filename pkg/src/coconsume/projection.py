"""Country projection of the bipartite incidence with inverse-popularity weights.

The tie between countries ``i`` and ``j`` sums ``1 / (n_k - 1)`` over every
item ``k`` both of them list, ``n_k`` being the number of countries listing
``k``. Weights are accumulated as :class:`fractions.Fraction` so they stay
exact; callers convert to float at the analytics boundary.
"""

import hashlib
import json
import numbers
from collections import defaultdict
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from types import MappingProxyType

from ._validation import check_node
from .exceptions import EmptyGraphError, GraphError


def _edge_key(i, j):
    if i == j:
        raise GraphError(f"self-loop on {i!r}")
    return (i, j) if i < j else (j, i)


def format_weight(w):
    """Exact text form: ``7/4`` for rationals, ``repr`` for floats."""
    if isinstance(w, Fraction):
        return str(w)
    return repr(float(w))


def parse_weight(text):
    text = text.strip()
    if "/" in text or text.isdigit():
        return Fraction(text)
    return float(text)


class WeightedCountryGraph:
    """Undirected weighted graph on country codes.

    Parameters
    ----------
    nodes : iterable of str
        Node set; kept even when a node has no incident edge.
    weights : mapping {(i, j): weight}
        Positive weights (``Fraction`` or real). Keys are normalized so that
        ``i < j``; both orientations of the same pair may not be given.
    """

    def __init__(self, nodes, weights):
        self.nodes = tuple(sorted(set(nodes)))
        self.index = {n: i for i, n in enumerate(self.nodes)}
        norm = {}
        for (i, j), w in weights.items():
            key = _edge_key(i, j)
            if key in norm:
                raise GraphError(f"duplicate edge {key}")
            if i not in self.index or j not in self.index:
                raise GraphError(f"edge {key} references a node outside the node set")
            if not isinstance(w, numbers.Real) or not w > 0:
                raise GraphError(f"edge {key} has non-positive weight {w!r}")
            norm[key] = w
        self.weights = MappingProxyType(dict(sorted(norm.items())))

    def __repr__(self):
        return f"WeightedCountryGraph(n_nodes={len(self.nodes)}, n_edges={len(self.weights)})"

    def __eq__(self, other):
        if not isinstance(other, WeightedCountryGraph):
            return NotImplemented
        return self.nodes == other.nodes and dict(self.weights) == dict(other.weights)

    __hash__ = None

    @cached_property
    def _adjacency(self):
        adj = {n: {} for n in self.nodes}
        for (i, j), w in self.weights.items():
            adj[i][j] = w
            adj[j][i] = w
        return MappingProxyType({n: MappingProxyType(nbrs) for n, nbrs in adj.items()})

    def neighbors(self, node):
        """Mapping neighbor -> weight."""
        check_node(self, node)
        return self._adjacency[node]

    def weight(self, i, j):
        """Weight of the edge {i, j}, or 0 when absent."""
        check_node(self, i)
        check_node(self, j)
        return self.weights.get(_edge_key(i, j), 0)

    def degree(self, node):
        return len(self.neighbors(node))

    def strength(self, node):
        return sum(self.neighbors(node).values(), 0)

    @property
    def n_edges(self):
        return len(self.weights)

    def edges(self):
        """Sorted ``(i, j, weight)`` triples with ``i < j``."""
        return [(i, j, w) for (i, j), w in self.weights.items()]

    def subgraph_edges(self, keep):
        """Same node set restricted to the edges in ``keep``."""
        return WeightedCountryGraph(self.nodes, {e: self.weights[e] for e in keep})

    def to_float(self):
        return WeightedCountryGraph(self.nodes, {e: float(w) for e, w in self.weights.items()})

    def to_numpy(self):
        """Dense symmetric float weight matrix in ``nodes`` order."""
        import numpy as np

        a = np.zeros((len(self.nodes), len(self.nodes)))
        for (i, j), w in self.weights.items():
            a[self.index[i], self.index[j]] = a[self.index[j], self.index[i]] = float(w)
        return a

    def fingerprint(self):
        """SHA-256 of the canonical edge-list text (nodes included)."""
        h = hashlib.sha256()
        h.update(("\n".join(self.nodes) + "\n--\n").encode())
        h.update(edge_list_text(self).encode())
        return h.hexdigest()


def edge_weight(b, i, j):
    """Exact co-consumption weight between countries ``i`` and ``j``.

    Items listed by a single country cannot be co-listed and never
    contribute. Returns ``Fraction(0)`` when the two share nothing.
    """
    if i == j:
        raise GraphError("edge weight requires two distinct countries")
    for c in (i, j):
        if c not in b:
            raise GraphError(f"unknown country {c!r}")
    shared = b.items_by_country[i] & b.items_by_country[j]
    return sum((Fraction(1, b.out_degree[k] - 1) for k in shared), Fraction(0))


def project(b):
    """Project a :class:`BipartiteGraph` onto countries.

    Every pair co-listing at least one item gets an edge; countries without
    any co-listed item are retained as isolates.
    """
    if not b.countries:
        raise EmptyGraphError("bipartite graph is empty")
    acc = defaultdict(Fraction)
    for item, listers in b.countries_by_item.items():
        n_k = len(listers)
        if n_k < 2:
            continue
        share = Fraction(1, n_k - 1)
        for i, j in combinations(sorted(listers), 2):
            acc[(i, j)] += share
    return WeightedCountryGraph(b.countries, acc)


def edge_list_text(g):
    """``i<TAB>j<TAB>weight`` lines, sorted, ``i < j`` within a line."""
    return "".join(f"{i}\t{j}\t{format_weight(w)}\n" for i, j, w in g.edges())


def write_edge_list(g, fh, header=False):
    if header:
        fh.write("i\tj\tweight\n")
    fh.write(edge_list_text(g))


def read_edge_list(fh, nodes=None):
    """Inverse of :func:`write_edge_list`; a header line is skipped if present."""
    weights = {}
    seen = set(nodes or ())
    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\n")
        if not line or (lineno == 1 and line.startswith("i\tj\t")):
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise GraphError(f"line {lineno}: expected i<TAB>j<TAB>weight")
        i, j, w = parts[0], parts[1], parse_weight(parts[2])
        weights[(i, j)] = w
        seen.update((i, j))
    return WeightedCountryGraph(seen, weights)


def to_json(g):
    """JSON document mirroring the edge list (exact and float weights)."""
    doc = {
        "nodes": list(g.nodes),
        "edges": [
            {"i": i, "j": j, "weight": format_weight(w), "weight_float": float(w)}
            for i, j, w in g.edges()
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def from_json(text):
    doc = json.loads(text)
    return WeightedCountryGraph(
        doc["nodes"], {(e["i"], e["j"]): parse_weight(e["weight"]) for e in doc["edges"]}
    )
