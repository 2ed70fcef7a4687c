import random

import pytest
from conftest import random_incidence
from oracles import openness_triple_loop

from coconsume.exceptions import GraphError
from coconsume.ingest import BipartiteGraph
from coconsume.openness import (
    CompositeOpenness,
    composite_openness,
    jaccard_dissimilarity,
    neighbor_overlaps,
    openness_table,
    rao_stirling,
)


def bip(lists):
    return BipartiteGraph.from_pairs((c, k) for c, items in lists.items() for k in items)


def test_overlap_counts():
    b = bip({"CCC": ["a", "b", "z"], "III": ["a", "b"], "JJJ": ["b"], "KKK": ["q"]})
    assert neighbor_overlaps(b, "CCC") == {"III": 2, "JJJ": 1}
    assert neighbor_overlaps(b, "KKK") == {}
    with pytest.raises(GraphError):
        neighbor_overlaps(b, "XXX")


def test_identical_lists_overlap_symmetric():
    items = [f"v{k}" for k in range(5)]
    b = bip({"AAA": items, "BBB": items})
    assert neighbor_overlaps(b, "AAA") == {"BBB": 5}
    assert neighbor_overlaps(b, "BBB") == {"AAA": 5}


def test_jaccard_examples():
    # N(I) = {A, B, C}, N(J) = {B, C, D}
    b = bip({"III": ["ia", "ib", "ic"], "JJJ": ["jb", "jc", "jd"],
             "AAA": ["ia"], "BBB": ["ib", "jb"], "CCC": ["ic", "jc"], "DDD": ["jd"]})
    assert jaccard_dissimilarity(b, "III", "JJJ") == 0.5
    assert jaccard_dissimilarity(b, "AAA", "AAA") == 0.0
    # disjoint partner sets
    b2 = bip({"III": ["x"], "AAA": ["x"], "JJJ": ["y"], "BBB": ["y"]})
    assert jaccard_dissimilarity(b2, "III", "JJJ") == 1.0
    # both empty -> undefined
    b3 = bip({"III": ["x"], "JJJ": ["y"]})
    with pytest.raises(GraphError):
        jaccard_dissimilarity(b3, "III", "JJJ")


def test_breadth_one_scores_zero():
    b = bip({"CCC": ["a"], "III": ["a"], "JJJ": ["b"]})
    s = composite_openness(b, "CCC")
    assert s.breadth == 1 and s.score == 0.0 and s.neighbor_weights == {"III": 1.0}


def test_equal_weights_disjoint_sets_quarter():
    # single unordered pair: 0.5 * 0.5 * 1
    assert rao_stirling({"i": 0.5, "j": 0.5}, lambda a, b: 1.0) == 0.25
    # realized on data once the focal country is left out of the partner sets
    b = bip({"CCC": ["ci", "cj"], "III": ["ci", "ix"], "JJJ": ["cj", "jy"], "XXX": ["ix"], "YYY": ["jy"]})
    assert composite_openness(b, "CCC", exclude_focal=True).score == 0.25
    # with the focal country kept, both sets contain CCC: d = 1 - 1/3
    assert composite_openness(b, "CCC").score == pytest.approx(0.25 * (2 / 3))


def test_identical_partner_sets_score_zero():
    b = bip({"CCC": ["a", "b"], "III": ["a"], "JJJ": ["b"]})
    s = composite_openness(b, "CCC")
    assert s.breadth == 2 and s.score == 0.0


@pytest.mark.parametrize("seed", range(8))
def test_matches_triple_loop(seed):
    r = random.Random(seed)
    pairs = random_incidence(r, r.randint(2, 12), r.randint(3, 40), density=r.uniform(0.05, 0.4))
    if not pairs:
        return
    b = BipartiteGraph.from_pairs(pairs)
    for s in openness_table(b):
        assert s.score == pytest.approx(openness_triple_loop(pairs, s.country), abs=1e-12)
        assert 0.0 <= s.score <= 0.5
        if s.breadth >= 1:
            assert sum(s.neighbor_weights.values()) == pytest.approx(1.0, abs=1e-12)


def test_duplication_invariance():
    r = random.Random(3)
    pairs = random_incidence(r, 8, 20)
    b1 = BipartiteGraph.from_pairs(pairs)
    b2 = BipartiteGraph.from_pairs(list(pairs) + list(pairs))
    assert [s.score for s in openness_table(b1)] == [s.score for s in openness_table(b2)]


def test_uniform_weights_maximize_spread():
    labels = list("abcde")
    uniform = {k: 0.2 for k in labels}
    base = rao_stirling(uniform, lambda a, b: 1.0)
    r = random.Random(0)
    for _ in range(50):
        eps = [r.uniform(-0.05, 0.05) for _ in labels]
        shift = sum(eps) / len(eps)
        w = {k: 0.2 + e - shift for k, e in zip(labels, eps)}
        assert rao_stirling(w, lambda a, b: 1.0) <= base + 1e-15


def test_estimator():
    b = bip({"CCC": ["a", "b"], "III": ["a"], "JJJ": ["b"]})
    df = CompositeOpenness().fit_transform(b)
    assert list(df.columns) == ["breadth", "openness_score"]
    assert df.loc["CCC", "breadth"] == 2
