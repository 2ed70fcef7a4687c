import random
from fractions import Fraction
from pathlib import Path

import pytest

from coconsume.ingest import parse_listings
from coconsume.projection import WeightedCountryGraph

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def example_records():
    with open(DATA / "worked_example.jsonl", "rb") as fh:
        return parse_listings(fh, "jsonl").records


def graph(edges, nodes=None):
    """Build a WeightedCountryGraph from ``[(i, j, w), ...]``."""
    nodes = set(nodes or ()) | {n for i, j, _ in edges for n in (i, j)}
    return WeightedCountryGraph(nodes, {(i, j): w for i, j, w in edges})


def random_connected_graph(rng, n_nodes, p_extra=0.4, weights=(0.2, 5.0), rational=False):
    """Random spanning tree plus extra edges; node names 'N0', 'N1', ..."""
    nodes = [f"N{k}" for k in range(n_nodes)]
    edges = {}

    def w():
        if rational:
            return Fraction(rng.randint(1, 4), rng.randint(1, 4))
        return rng.uniform(*weights)

    order = nodes[:]
    rng.shuffle(order)
    for k in range(1, n_nodes):
        a, b = order[k], order[rng.randrange(k)]
        edges[tuple(sorted((a, b)))] = w()
    for a in range(n_nodes):
        for b in range(a + 1, n_nodes):
            key = tuple(sorted((nodes[a], nodes[b])))
            if key not in edges and rng.random() < p_extra:
                edges[key] = w()
    return WeightedCountryGraph(nodes, edges)


def random_incidence(rng, n_countries, n_items, density=0.3):
    countries = [f"C{chr(65 + k // 26)}{chr(65 + k % 26)}" for k in range(n_countries)]
    pairs = {(c, f"i{k}") for c in countries for k in range(n_items) if rng.random() < density}
    return pairs


@pytest.fixture
def rng():
    return random.Random(20161019)


# filled by test_acceptance.py, echoed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
