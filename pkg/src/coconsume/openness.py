"""Composite openness: a Rao-Stirling style diversity over co-listing partners.

For a focal country ``C`` with co-listing partners ``N(C)``:

* ``w(C, i)`` is the share of ``C``'s item overlaps that fall on partner ``i``;
* ``d(i, j)`` is the Jaccard dissimilarity of the partner sets ``N(i)`` and
  ``N(j)``;
* the score sums ``w(C, i) * w(C, j) * d(i, j)`` over unordered partner pairs,
  hence lies in ``[0, 0.5]``.

Partner sets come from the bipartite incidence (equivalently, the unfiltered
projection), never from a backbone.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import GraphError


def neighbor_overlaps(b, country):
    """Map partner -> number of items shared with ``country``."""
    if country not in b:
        raise GraphError(f"unknown country {country!r}")
    counts = Counter()
    for item in b.items_by_country[country]:
        for other in b.countries_by_item[item]:
            if other != country:
                counts[other] += 1
    return dict(sorted(counts.items()))


def neighbor_set(b, country):
    return frozenset(neighbor_overlaps(b, country))


def _jaccard(a, c):
    union = a | c
    if not union:
        raise GraphError("Jaccard dissimilarity of two empty neighbor sets is undefined")
    return 1.0 - len(a & c) / len(union)


def jaccard_dissimilarity(b, i, j):
    """``1 - |N(i) & N(j)| / |N(i) | N(j)|`` over co-listing partner sets."""
    return _jaccard(neighbor_set(b, i), neighbor_set(b, j))


def rao_stirling(weights, dissimilarity):
    """``sum_{i<j} weights[i] * weights[j] * dissimilarity(i, j)``.

    ``weights`` maps labels to shares; ``dissimilarity`` is a callable on two
    labels.
    """
    labels = sorted(weights)
    return sum(
        (weights[i] * weights[j] * dissimilarity(i, j) for i, j in combinations(labels, 2)),
        0.0,
    )


@dataclass(frozen=True)
class OpennessScore:
    country: str
    breadth: int
    score: float
    neighbor_weights: dict = field(compare=False)


def composite_openness(b, country, exclude_focal=False, _neighbor_sets=None):
    """Openness score of ``country``.

    Parameters
    ----------
    b : BipartiteGraph
    country : str
    exclude_focal : bool
        Drop ``country`` itself from the partner sets before taking Jaccard
        dissimilarities. Two partners left with empty sets then count as
        identical (dissimilarity 0).
    """
    overlaps = neighbor_overlaps(b, country)
    total = sum(overlaps.values())
    weights = {i: Fraction(c, total) for i, c in overlaps.items()}
    if len(overlaps) <= 1:
        return OpennessScore(country, len(overlaps), 0.0, {i: float(w) for i, w in weights.items()})
    sets = _neighbor_sets if _neighbor_sets is not None else {}
    for i in overlaps:
        if i not in sets:
            sets[i] = neighbor_set(b, i)

    def dissim(i, j):
        a, c = sets[i], sets[j]
        if exclude_focal:
            a, c = a - {country}, c - {country}
            if not a and not c:
                return 0.0
        return _jaccard(a, c)

    float_w = {i: float(w) for i, w in weights.items()}
    return OpennessScore(country, len(overlaps), rao_stirling(float_w, dissim), float_w)


def openness_table(b, exclude_focal=False):
    """Scores for every country, sorted by country code."""
    cache = {}
    return [composite_openness(b, c, exclude_focal, cache) for c in b.countries]


def write_openness(scores, fh):
    fh.write("country\tbreadth\topenness_score\n")
    for s in sorted(scores, key=lambda s: s.country):
        fh.write(f"{s.country}\t{s.breadth}\t{s.score!r}\n")


class CompositeOpenness(BaseEstimator):
    """Estimator wrapper: ``fit(bipartite)`` fills ``scores_`` (country -> score)."""

    def __init__(self, exclude_focal=False):
        self.exclude_focal = exclude_focal

    def fit(self, b, y=None):
        self.results_ = openness_table(b, self.exclude_focal)
        self.scores_ = {s.country: s.score for s in self.results_}
        self.breadth_ = {s.country: s.breadth for s in self.results_}
        return self

    def transform(self, b=None):
        import pandas as pd

        check_is_fitted(self, "scores_")
        df = pd.DataFrame({"breadth": self.breadth_, "openness_score": self.scores_})
        df.index.name = "country"
        return df.sort_index()

    def fit_transform(self, b, y=None):
        return self.fit(b).transform()
