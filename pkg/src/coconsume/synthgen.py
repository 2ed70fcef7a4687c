"""Synthetic listings with planted block structure.

Every block owns a pool of items. A regular country fills its list by
drawing, slot by slot, from its own block's pool (``intra_block_share``),
from another block's pool (``inter_block_share``) or from a private pool of
local items nobody else lists (the remainder). Bridge countries replace the
own/other/local split by explicit per-block mixing weights (normalized to
sum to one, so a bridge lists no local items). Within a pool, items
are drawn uniformly or with Zipf-like popularity.

Country codes: block ``b`` uses the letter ``chr(65 + b)`` followed by two
letters (``AAA``, ``AAB``, ...); bridges use ``Z`` (``ZAA``, ...).
"""

import csv
import datetime as dt
import json
from dataclasses import dataclass, field
from string import ascii_uppercase

import numpy as np

from ._validation import check_count, check_share
from .ingest import ListingRecord

MAX_BLOCKS = 25
POPULARITY = ("uniform", "zipf")
START_DATE = dt.date(2016, 1, 1)


@dataclass(frozen=True)
class PlantedConfig:
    """Generator settings.

    ``blocks`` lists ``(block_id, country_count)``; ``bridge_countries``
    lists per-block mixing weights, one tuple per bridge (normalized on
    use).
    """

    blocks: tuple = ((0, 10), (1, 10))
    items_per_country: int = 30
    intra_block_share: float = 0.6
    inter_block_share: float = 0.0
    bridge_countries: tuple = ()
    pool_size: int = 100
    popularity: str = "uniform"
    zipf_exponent: float = 1.0
    days: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("at least one block is required")
        if len(self.blocks) > MAX_BLOCKS:
            raise ValueError(f"at most {MAX_BLOCKS} blocks are supported")
        ids = [b for b, _ in self.blocks]
        if len(set(ids)) != len(ids):
            raise ValueError("block ids must be unique")
        for _, count in self.blocks:
            check_count(count, "block country count")
        check_count(self.items_per_country, "items_per_country")
        check_count(self.pool_size, "pool_size")
        check_count(self.days, "days")
        check_share(self.intra_block_share, "intra_block_share")
        check_share(self.inter_block_share, "inter_block_share")
        if self.intra_block_share + self.inter_block_share > 1.0 + 1e-12:
            raise ValueError("intra_block_share + inter_block_share must not exceed 1")
        if self.inter_block_share > 0 and len(self.blocks) < 2:
            raise ValueError("inter_block_share > 0 needs at least two blocks")
        for mix in self.bridge_countries:
            if len(mix) != len(self.blocks):
                raise ValueError("each bridge needs one mixing weight per block")
            if any(m < 0 for m in mix) or not sum(mix) > 0:
                raise ValueError("bridge mixing weights must be non-negative with a positive sum")
        if self.popularity not in POPULARITY:
            raise ValueError(f"popularity must be one of {POPULARITY}")
        if not self.zipf_exponent >= 0:
            raise ValueError("zipf_exponent must be >= 0")
        if self.items_per_country > self.pool_size:
            raise ValueError("items_per_country cannot exceed pool_size")


@dataclass(frozen=True)
class GroundTruth:
    country: str
    block: str
    is_bridge: bool
    mixing: tuple = field(default=())


def _code(prefix, k):
    return prefix + ascii_uppercase[k // 26 % 26] + ascii_uppercase[k % 26]


def _pool_probs(size, cfg):
    if cfg.popularity == "uniform":
        return None
    ranks = np.arange(1, size + 1, dtype=float)
    p = ranks ** -cfg.zipf_exponent
    return p / p.sum()


def generate(cfg):
    """Return ``(records, truth)``.

    ``records`` is a list of :class:`ListingRecord` sorted by date, country
    and item; ``truth`` a list of :class:`GroundTruth` sorted by country.
    """
    rng = np.random.default_rng(cfg.seed)
    n_blocks = len(cfg.blocks)
    pools = [[f"b{bid}-{k:05d}" for k in range(cfg.pool_size)] for bid, _ in cfg.blocks]
    probs = _pool_probs(cfg.pool_size, cfg)
    local = 1.0 - cfg.intra_block_share - cfg.inter_block_share

    plan = []
    for b, (bid, count) in enumerate(cfg.blocks):
        src = np.zeros(n_blocks + 1)
        src[b] = cfg.intra_block_share
        src[-1] = max(local, 0.0)
        if n_blocks > 1:
            src[:-1][np.arange(n_blocks) != b] += cfg.inter_block_share / (n_blocks - 1)
        for k in range(count):
            plan.append((_code(ascii_uppercase[b], k), src, GroundTruth(
                _code(ascii_uppercase[b], k), str(bid), False,
                (cfg.intra_block_share, cfg.inter_block_share))))
    for k, mix in enumerate(cfg.bridge_countries):
        mix = np.asarray(mix, dtype=float)
        mix = mix / mix.sum()
        src = np.append(mix, 0.0)
        code = _code("Z", k)
        plan.append((code, src, GroundTruth(code, "bridge", True, tuple(float(m) for m in mix))))

    listed = []
    for code, src, _ in plan:
        counts = rng.multinomial(cfg.items_per_country, src / src.sum())
        items = []
        for b in range(n_blocks):
            if counts[b]:
                picked = rng.choice(cfg.pool_size, size=counts[b], replace=False, p=probs)
                items += [pools[b][i] for i in sorted(picked)]
        items += [f"{code}-local-{k:05d}" for k in range(counts[-1])]
        for item in items:
            first = int(rng.integers(cfg.days))
            span = int(rng.integers(1, cfg.days - first + 1))
            for d in range(first, first + span):
                listed.append(ListingRecord(START_DATE + dt.timedelta(days=d), code, item))
    listed.sort(key=lambda r: (r.date, r.country, r.item_id))
    truth = sorted((t for _, _, t in plan), key=lambda t: t.country)
    return listed, truth


def write_records_jsonl(records, fh):
    for r in records:
        fh.write(json.dumps(r.to_json(), sort_keys=True) + "\n")


def write_truth_csv(truth, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["country", "block", "is_bridge", "mixing"])
    for t in truth:
        w.writerow([t.country, t.block, int(t.is_bridge), ";".join(repr(m) for m in t.mixing)])


_INT_KEYS = ("items_per_country", "pool_size", "days", "seed")
_FLOAT_KEYS = ("intra_block_share", "inter_block_share", "zipf_exponent")


def parse_config(text, **overrides):
    """Parse ``key = value`` lines into a :class:`PlantedConfig`.

    ``blocks`` is a comma list of country counts (ids 0, 1, ...) or of
    ``id:count`` pairs; ``bridges`` a semicolon list of colon-separated
    per-block weights, e.g. ``bridges = 0.5:0.5``. ``#`` starts a comment.
    """
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "blocks":
            blocks = []
            for b, tok in enumerate(value.split(",")):
                tok = tok.strip()
                if ":" in tok:
                    bid, cnt = tok.split(":")
                    blocks.append((int(bid), int(cnt)))
                else:
                    blocks.append((b, int(tok)))
            kw["blocks"] = tuple(blocks)
        elif key in ("bridges", "bridge_countries"):
            kw["bridge_countries"] = tuple(
                tuple(float(x) for x in part.split(":")) for part in value.split(";") if part.strip()
            )
        elif key in _INT_KEYS:
            kw[key] = int(value)
        elif key in _FLOAT_KEYS:
            kw[key] = float(value)
        elif key == "popularity":
            kw[key] = value
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return PlantedConfig(**kw)
