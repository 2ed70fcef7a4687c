"""Parse popularity listings and assemble the country-item incidence.

Two wire formats are accepted:

* JSONL, one object per line with keys ``date``, ``country``, ``item_id`` and
  an optional ``category``; any other keys are kept as pass-through metadata.
* CSV with a header row naming at least ``date,country,item_id``.

Malformed lines do not abort parsing. They are collected as
``(line_number, reason)`` rejects which can be written out as TSV.
"""

import csv
import datetime as dt
import io
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

from sklearn.base import BaseEstimator

from ._validation import check_count
from .exceptions import EmptyGraphError, IngestError

COUNTRY_RE = re.compile(r"[A-Z]{3}")
REQUIRED_FIELDS = ("date", "country", "item_id")
FORMATS = ("jsonl", "csv")


@dataclass(frozen=True)
class ListingRecord:
    """One (date, country, item) observation from a popular-items list."""

    date: dt.date
    country: str
    item_id: str
    category: Optional[str] = None
    extra: Mapping = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.date, dt.date):
            raise ValueError(f"date must be a datetime.date, got {self.date!r}")
        if not isinstance(self.country, str) or not COUNTRY_RE.fullmatch(self.country):
            raise ValueError(f"country must be an upper-case alpha-3 code, got {self.country!r}")
        if not isinstance(self.item_id, str) or not self.item_id:
            raise ValueError("item_id must be a non-empty string")

    def to_json(self):
        obj = {"date": self.date.isoformat(), "country": self.country, "item_id": self.item_id}
        if self.category is not None:
            obj["category"] = self.category
        return obj


@dataclass(frozen=True)
class Reject:
    line_number: int
    reason: str


@dataclass
class ParseResult:
    records: list
    rejects: list

    def __iter__(self):
        # allows ``records, rejects = parse_listings(...)``
        return iter((self.records, self.rejects))


def _record_from_mapping(obj):
    """Build a record from a decoded row; raises ValueError with a reason."""
    missing = [k for k in REQUIRED_FIELDS if obj.get(k) in (None, "")]
    if missing:
        raise ValueError(f"missing field(s): {','.join(missing)}")
    raw_date, country, item_id = obj["date"], obj["country"], obj["item_id"]
    if not isinstance(raw_date, str):
        raise ValueError(f"date is not a string: {raw_date!r}")
    try:
        day = dt.date.fromisoformat(raw_date.strip())
    except ValueError:
        raise ValueError(f"invalid date {raw_date!r}") from None
    if not isinstance(country, str) or not COUNTRY_RE.fullmatch(country):
        raise ValueError(f"invalid country code {country!r}")
    if not isinstance(item_id, (str, int)) or isinstance(item_id, bool):
        raise ValueError(f"invalid item_id {item_id!r}")
    item_id = str(item_id)
    category = obj.get("category")
    if category == "":
        category = None
    if category is not None and not isinstance(category, str):
        raise ValueError(f"invalid category {category!r}")
    extra = {k: v for k, v in obj.items() if k not in REQUIRED_FIELDS and k != "category"}
    return ListingRecord(day, country, item_id, category, extra)


def _iter_jsonl(text):
    for lineno, line in enumerate(text, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield lineno, None, f"invalid JSON: {exc.msg}"
            continue
        if not isinstance(obj, dict):
            yield lineno, None, "line is not a JSON object"
            continue
        yield lineno, obj, None


def _iter_csv(text):
    reader = csv.DictReader(text)
    header = reader.fieldnames
    if header is None:
        return
    absent = [k for k in REQUIRED_FIELDS if k not in header]
    if absent:
        raise IngestError(f"CSV header lacks required column(s): {','.join(absent)}")
    for row in reader:
        if None in row:
            yield reader.line_num, None, "too many fields"
            continue
        yield reader.line_num, row, None


def parse_listings(source, format="jsonl", strict=False):
    """Parse a UTF-8 byte stream of listings.

    Parameters
    ----------
    source : binary file-like or bytes
    format : {"jsonl", "csv"}
    strict : bool
        Raise :class:`IngestError` on the first malformed line instead of
        collecting it.

    Returns
    -------
    ParseResult
        ``records`` in input order and ``rejects`` as :class:`Reject` items.
    """
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {format!r}")
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    text = io.TextIOWrapper(source, encoding="utf-8", newline="")
    rows = _iter_jsonl(text) if format == "jsonl" else _iter_csv(text)
    records, rejects = [], []
    try:
        for lineno, obj, reason in rows:
            if reason is None:
                try:
                    records.append(_record_from_mapping(obj))
                    continue
                except ValueError as exc:
                    reason = str(exc)
            if strict:
                raise IngestError(f"line {lineno}: {reason}")
            rejects.append(Reject(lineno, reason))
    except UnicodeDecodeError as exc:
        raise IngestError(f"stream is not valid UTF-8: {exc}") from exc
    except (OSError, csv.Error) as exc:
        raise IngestError(f"unreadable stream: {exc}") from exc
    finally:
        text.detach()
    return ParseResult(records, rejects)


def write_rejects(rejects, fh):
    """Write the rejects report as TSV (line_number, reason)."""
    fh.write("line_number\treason\n")
    for rej in rejects:
        reason = rej.reason.replace("\t", " ").replace("\n", " ")
        fh.write(f"{rej.line_number}\t{reason}\n")


@dataclass(frozen=True)
class BipartiteGraph:
    """Binary country x item incidence with per-item out-degree.

    ``countries`` and ``items`` are sorted tuples, ``incidence`` the set of
    ``(country, item)`` pairs and ``out_degree[item]`` the number of
    countries listing the item.
    """

    countries: tuple
    items: tuple
    incidence: frozenset
    out_degree: Mapping

    @classmethod
    def from_pairs(cls, pairs):
        incidence = frozenset(pairs)
        counts = defaultdict(int)
        for _, item in incidence:
            counts[item] += 1
        return cls(
            countries=tuple(sorted({c for c, _ in incidence})),
            items=tuple(sorted(counts)),
            incidence=incidence,
            out_degree=MappingProxyType(dict(sorted(counts.items()))),
        )

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self.countries == other.countries
            and self.items == other.items
            and self.incidence == other.incidence
            and dict(self.out_degree) == dict(other.out_degree)
        )

    def __hash__(self):
        return hash((self.countries, self.items, self.incidence))

    @cached_property
    def items_by_country(self):
        out = defaultdict(set)
        for c, k in self.incidence:
            out[c].add(k)
        return MappingProxyType({c: frozenset(out[c]) for c in self.countries})

    @cached_property
    def countries_by_item(self):
        out = defaultdict(set)
        for c, k in self.incidence:
            out[k].add(c)
        return MappingProxyType({k: frozenset(out[k]) for k in self.items})

    def __contains__(self, country):
        return country in self.items_by_country


def build_bipartite(records: Iterable[ListingRecord], category_filter=None, min_countries_per_item=1):
    """Collapse listing records into a binary country-item incidence.

    Repeat listings of the same item by the same country (e.g. on different
    days) count once. Items listed by fewer than ``min_countries_per_item``
    countries are dropped; countries left without any item disappear.
    """
    min_countries_per_item = check_count(min_countries_per_item, "min_countries_per_item")
    pairs = {
        (r.country, r.item_id)
        for r in records
        if category_filter is None or r.category == category_filter
    }
    if min_countries_per_item > 1:
        counts = defaultdict(int)
        for _, item in pairs:
            counts[item] += 1
        pairs = {(c, k) for c, k in pairs if counts[k] >= min_countries_per_item}
    if not pairs:
        raise EmptyGraphError("no (country, item) pairs survived filtering")
    return BipartiteGraph.from_pairs(pairs)


class BipartiteBuilder(BaseEstimator):
    """Estimator wrapper around :func:`build_bipartite`.

    ``fit(records)`` stores the incidence in ``bipartite_``; ``transform``
    returns the weighted country projection.
    """

    def __init__(self, category=None, min_countries_per_item=1):
        self.category = category
        self.min_countries_per_item = min_countries_per_item

    def fit(self, records, y=None):
        self.bipartite_ = build_bipartite(
            records, category_filter=self.category, min_countries_per_item=self.min_countries_per_item
        )
        self.n_countries_ = len(self.bipartite_.countries)
        self.n_items_ = len(self.bipartite_.items)
        return self

    def transform(self, records=None):
        from sklearn.utils.validation import check_is_fitted

        from .projection import project

        check_is_fitted(self, "bipartite_")
        b = self.bipartite_ if records is None else build_bipartite(
            records, category_filter=self.category, min_countries_per_item=self.min_countries_per_item
        )
        return project(b)

    def fit_transform(self, records, y=None):
        return self.fit(records).transform()
