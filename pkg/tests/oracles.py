"""Brute-force reference implementations used only by the tests.

Nothing here imports the code under test's algorithms; inputs are plain
dicts and sets.
"""

import math
from fractions import Fraction
from itertools import combinations

import numpy as np

TOL = 1e-12


def projection_weights(incidence, countries):
    """W_ij by a double loop over country pairs and every item."""
    items = sorted({k for _, k in incidence})
    lists = {c: {k for cc, k in incidence if cc == c} for c in countries}
    n = {k: sum(1 for c in countries if k in lists[c]) for k in items}
    out = {}
    for a, b in combinations(sorted(countries), 2):
        w = Fraction(0)
        for k in items:
            if k in lists[a] and k in lists[b]:
                w += Fraction(1, n[k] - 1)
        if w:
            out[(a, b)] = w
    return out


def simple_paths(adj, s, t):
    """Every simple path from s to t as a node list (DFS enumeration)."""
    out = []
    stack = [(s, [s])]
    while stack:
        v, path = stack.pop()
        if v == t:
            out.append(path)
            continue
        for u in adj[v]:
            if u not in path:
                stack.append((u, path + [u]))
    return out


def path_cost(adj, path, alpha):
    return sum(1.0 if alpha == 0 else float(adj[a][b]) ** -alpha for a, b in zip(path, path[1:]))


def shortest_by_enumeration(adj, s, t, alpha):
    """(min cost, list of min-cost paths) or (inf, [])."""
    paths = simple_paths(adj, s, t)
    if not paths:
        return math.inf, []
    costs = [path_cost(adj, p, alpha) for p in paths]
    best = min(costs)
    return best, [p for p, c in zip(paths, costs) if abs(c - best) <= TOL * max(best, 1e-300)]


def closeness_by_enumeration(adj, alpha):
    out = {}
    for i in adj:
        total = sum(shortest_by_enumeration(adj, i, j, alpha)[0] for j in adj if j != i)
        out[i] = 1.0 / total
    return out


def betweenness_by_enumeration(adj, alpha):
    out = dict.fromkeys(adj, 0.0)
    for s, t in combinations(sorted(adj), 2):
        _, paths = shortest_by_enumeration(adj, s, t, alpha)
        if not paths:
            continue
        for v in adj:
            if v in (s, t):
                continue
            through = sum(1 for p in paths if v in p)
            out[v] += through / len(paths)
    return out


def openness_triple_loop(incidence, focal):
    """Composite openness by explicit loops over countries and items."""
    countries = sorted({c for c, _ in incidence})
    lists = {c: {k for cc, k in incidence if cc == c} for c in countries}

    def partners(x):
        return {y for y in countries if y != x and lists[x] & lists[y]}

    nbrs = sorted(partners(focal))
    if len(nbrs) <= 1:
        return 0.0
    overlap = {i: len(lists[focal] & lists[i]) for i in nbrs}
    total = sum(overlap.values())
    score = 0.0
    for a in range(len(nbrs)):
        for b in range(a + 1, len(nbrs)):
            i, j = nbrs[a], nbrs[b]
            ni, nj = partners(i), partners(j)
            d = 1.0 - len(ni & nj) / len(ni | nj)
            score += (overlap[i] / total) * (overlap[j] / total) * d
    return score


def aux_r2(y, X):
    """R^2 of y on [1, X] via the normal equations (independent of QR/lstsq paths)."""
    A = np.column_stack([np.ones(len(y)), X])
    beta = np.linalg.solve(A.T @ A, A.T @ y)
    resid = y - A @ beta
    return 1.0 - (resid @ resid) / np.sum((y - y.mean()) ** 2)


def all_simple_paths(adj):
    """{(s, t): [paths]} for every unordered pair s < t."""
    return {(s, t): simple_paths(adj, s, t) for s, t in combinations(sorted(adj), 2)}


def enumeration_report(adj, paths, alpha):
    """Distances, shortest-path counts, closeness and betweenness from a
    precomputed path list (see ``all_simple_paths``)."""
    dist, count = {}, {}
    between = dict.fromkeys(adj, 0.0)
    for (s, t), ps in paths.items():
        if not ps:
            dist[(s, t)], count[(s, t)] = math.inf, 0
            continue
        costs = [path_cost(adj, p, alpha) for p in ps]
        best = min(costs)
        short = [p for p, c in zip(ps, costs) if abs(c - best) <= TOL * max(best, 1e-300)]
        dist[(s, t)], count[(s, t)] = best, len(short)
        for v in adj:
            if v not in (s, t):
                between[v] += sum(1 for p in short if v in p) / len(short)
    close = {}
    for i in adj:
        total = sum(dist[tuple(sorted((i, j)))] for j in adj if j != i)
        close[i] = 1.0 / total
    return dist, count, close, between


def bfs_hops(adj, s):
    hops = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in hops:
                    hops[u] = hops[v] + 1
                    nxt.append(u)
        frontier = nxt
    return hops
