"""Co-consumption network analysis from popular-item listings.

Subcommands: ingest-check, project, backbone, centrality, openness,
netstats, regress, synth, pipeline. Exit codes: 0 success, 1 analysis
error, 2 usage or I/O error.
"""

import argparse
import hashlib
import io
import json
import logging
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .backbone import METHODS, extract_backbone, write_backbone
from .centrality import DEFAULT_ALPHA, centrality_scores, write_centrality
from .exceptions import AnalysisError, UsageError
from .inference import MODELS, OUTCOMES, format_models, models_to_frame, read_covariates, run_models
from .ingest import FORMATS, build_bipartite, parse_listings, write_rejects
from .netstats import APL_SCOPES, COMMUNITY_METHODS, summarize, write_netstats
from .openness import openness_table, write_openness
from .projection import project, to_json, write_edge_list
from .synthgen import generate, parse_config, write_records_jsonl, write_truth_csv

log = logging.getLogger("coconsume")


@dataclass
class PipelineConfig:
    inputs: list
    format: str = "jsonl"
    category: str = None
    min_countries_per_item: int = 1
    alpha: float = DEFAULT_ALPHA
    alpha_grid: list = field(default_factory=list)
    significance: float = 0.05
    backbone_method: str = "analytic"
    mc_samples: int = 100_000
    seed: int = 0
    on_projection: bool = False
    component_restrict: bool = False
    covariates: str = None
    outcomes: list = field(default_factory=lambda: list(OUTCOMES))
    models: list = field(default_factory=lambda: list(MODELS))
    extra_controls: list = field(default_factory=list)
    out_dir: str = "."
    emit: str = "tsv"
    strict: bool = False

    def validate(self):
        for path in self.inputs + ([self.covariates] if self.covariates else []):
            if not Path(path).is_file():
                raise UsageError(f"input file not found: {path}")
        if self.alpha < 0 or any(a < 0 for a in self.alpha_grid):
            raise UsageError("alpha must be >= 0")
        if not 0 < self.significance < 1:
            raise UsageError("significance must lie in (0, 1)")
        if self.min_countries_per_item < 1:
            raise UsageError("--min-countries-per-item must be >= 1")


# ---------------------------------------------------------------- helpers

def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _cell(text):
    if text == "NA":
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def tsv_to_json(text):
    """Rows of a TSV table as JSON objects (numbers parsed, NA -> null)."""
    lines = text.splitlines()
    if not lines:
        return "[]\n"
    header = lines[0].split("\t")
    rows = [dict(zip(header, map(_cell, line.split("\t")))) for line in lines[1:]]
    return json.dumps(rows, indent=2) + "\n"


class _Staging:
    """Collects outputs in a temporary directory; moves them into ``out_dir``
    only when the whole command succeeds."""

    def __init__(self, out_dir, emit):
        self.out_dir = Path(out_dir)
        self.emit = emit
        self.written = []

    def __enter__(self):
        parent = self.out_dir.resolve().parent
        parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".coconsume-", dir=parent))
        return self

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                self.out_dir.mkdir(parents=True, exist_ok=True)
                for name in self.written:
                    os.replace(self.tmp / name, self.out_dir / name)
        finally:
            shutil.rmtree(self.tmp, ignore_errors=True)
        return False

    def text(self, name, content):
        with open(self.tmp / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        self.written.append(name)

    def table(self, stem, writer, *args, **kwargs):
        buf = io.StringIO()
        writer(*args, buf, **kwargs)
        if self.emit == "json":
            self.text(f"{stem}.json", tsv_to_json(buf.getvalue()))
        else:
            self.text(f"{stem}.tsv", buf.getvalue())


def _load_records(cfg):
    records, rejects = [], []
    for path in cfg.inputs:
        try:
            with open(path, "rb") as fh:
                res = parse_listings(fh, cfg.format, strict=cfg.strict)
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc
        records += res.records
        rejects += res.rejects
        if res.rejects:
            log.warning("%s: %d rejected line(s)", path, len(res.rejects))
    return records, rejects


def _analysis_graph(cfg, g):
    bb = extract_backbone(g, cfg.significance, cfg.backbone_method, cfg.mc_samples, cfg.seed)
    return bb, (g if cfg.on_projection else bb.graph)


def _write_graph(stage, stem, g):
    if stage.emit == "json":
        stage.text(f"{stem}.json", to_json(g))
    else:
        stage.table(stem, write_edge_list, g, header=True)


def _scores_frame(cent, open_scores):
    df = cent.to_frame()[["closeness", "betweenness"]]
    df["composite_openness"] = pd.Series({s.country: s.score for s in open_scores})
    return df


def _write_regressions(stage, cfg, scores):
    cov = read_covariates(cfg.covariates)
    for outcome in cfg.outcomes:
        results = run_models(cov, scores, outcome, cfg.extra_controls, models=cfg.models)
        frame = models_to_frame(results)
        buf = io.StringIO()
        frame.to_csv(buf, sep="\t", index=False, na_rep="NA", float_format="%.17g", lineterminator="\n")
        if stage.emit == "json":
            stage.text(f"regression_{outcome}.json", tsv_to_json(buf.getvalue()))
        else:
            stage.text(f"regression_{outcome}.tsv", buf.getvalue())
        stage.text(f"regression_{outcome}.txt", format_models(results, title=f"OLS regression of {outcome}"))


def _manifest(cfg, command, outputs, extra=None):
    params = {k: v for k, v in cfg.__dict__.items() if k not in ("inputs", "covariates", "out_dir")}
    params.update(extra or {})
    doc = {
        "tool": "coconsume",
        "version": __version__,
        "command": command,
        "parameters": params,
        "root_seed": cfg.seed,
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in cfg.inputs],
        "covariates": {"path": str(cfg.covariates), "sha256": _sha256(cfg.covariates)} if cfg.covariates else None,
        "outputs": sorted(outputs),
        "environment": {"numpy": np.__version__, "pandas": pd.__version__},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- commands

def cmd_ingest_check(cfg, args):
    records, rejects = _load_records(cfg)
    with _Staging(cfg.out_dir, cfg.emit) as stage:
        stage.table("rejects", write_rejects, rejects)
    countries = sorted({r.country for r in records})
    items = {r.item_id for r in records}
    print(f"records\t{len(records)}\nrejects\t{len(rejects)}\ncountries\t{len(countries)}\nitems\t{len(items)}")
    return 0


def cmd_project(cfg, args):
    records, _ = _load_records(cfg)
    g = project(build_bipartite(records, cfg.category, cfg.min_countries_per_item))
    with _Staging(cfg.out_dir, cfg.emit) as stage:
        _write_graph(stage, "projection", g)
    return 0


def cmd_backbone(cfg, args):
    records, _ = _load_records(cfg)
    g = project(build_bipartite(records, cfg.category, cfg.min_countries_per_item))
    bb = extract_backbone(g, cfg.significance, cfg.backbone_method, cfg.mc_samples, cfg.seed)
    with _Staging(cfg.out_dir, cfg.emit) as stage:
        stage.table("backbone", write_backbone, bb)
    return 0


def _centralities(cfg, graph):
    main = centrality_scores(graph, cfg.alpha, cfg.component_restrict)
    grid = [centrality_scores(graph, a, cfg.component_restrict) for a in cfg.alpha_grid]
    return main, grid


def cmd_centrality(cfg, args):
    records, _ = _load_records(cfg)
    g = project(build_bipartite(records, cfg.category, cfg.min_countries_per_item))
    _, graph = _analysis_graph(cfg, g)
    main, grid = _centralities(cfg, graph)
    with _Staging(cfg.out_dir, cfg.emit) as stage:
        stage.table("centrality", write_centrality, grid or main, with_component_size=cfg.component_restrict)
    return 0


def cmd_openness(cfg, args):
    records, _ = _load_records(cfg)
    b = build_bipartite(records, cfg.category, cfg.min_countries_per_item)
    with _Staging(cfg.out_dir, cfg.emit) as stage:
        stage.table("openness", write_openness, openness_table(b))
    return 0


def _netstats_rows(cfg, records, args):
    cats = [cfg.category] if cfg.category else [None] + sorted({r.category for r in records if r.category})
    rows = []
    for cat in cats:
        try:
            b = build_bipartite(records, cat, cfg.min_countries_per_item)
        except AnalysisError:
            if cat is None or cfg.category:
                raise
            continue
        g = project(b)
        _, graph = _analysis_graph(cfg, g)
        rows.append((cat or "all", summarize(graph, cfg.seed, args.apl_scope, args.community_method)))
    return rows


def cmd_netstats(cfg, args):
    records, _ = _load_records(cfg)
    rows = _netstats_rows(cfg, records, args)
    with _Staging(cfg.out_dir, cfg.emit) as stage:
        stage.table("netstats", write_netstats, rows)
    return 0


def cmd_regress(cfg, args):
    frames = []
    for path in args.scores:
        if not Path(path).is_file():
            raise UsageError(f"scores file not found: {path}")
        df = pd.read_csv(path, sep="\t", dtype={"country": str})
        if "alpha" in df.columns and df["alpha"].nunique() > 1:
            df = df[np.isclose(df["alpha"], cfg.alpha)]
        df = df.set_index("country").drop(columns=["alpha", "component_size", "breadth"], errors="ignore")
        frames.append(df.rename(columns={"openness_score": "composite_openness"}))
    scores = pd.concat(frames, axis=1)
    with _Staging(cfg.out_dir, cfg.emit) as stage:
        _write_regressions(stage, cfg, scores)
    return 0


def cmd_synth(cfg, args):
    text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    over = {"seed": cfg.seed, "items_per_country": args.items_per_country,
            "intra_block_share": args.intra_block_share, "inter_block_share": args.inter_block_share,
            "pool_size": args.pool_size, "popularity": args.popularity, "days": args.days}
    if args.blocks:
        over["blocks"] = tuple(enumerate(int(x) for x in args.blocks.split(",")))
    if args.bridges:
        over["bridge_countries"] = tuple(
            tuple(float(x) for x in part.split(":")) for part in args.bridges.split(";") if part)
    pc = parse_config(text, **over)
    records, truth = generate(pc)
    with _Staging(cfg.out_dir, "tsv") as stage:
        buf = io.StringIO()
        write_records_jsonl(records, buf)
        stage.text("listings.jsonl", buf.getvalue())
        buf = io.StringIO()
        write_truth_csv(truth, buf)
        stage.text("truth.csv", buf.getvalue())
    return 0


def cmd_pipeline(cfg, args):
    """Full run: projection, backbone, centralities, openness, netstats,
    optional regressions, plus a manifest."""
    records, rejects = _load_records(cfg)
    b = build_bipartite(records, cfg.category, cfg.min_countries_per_item)
    g = project(b)
    bb, graph = _analysis_graph(cfg, g)
    main, grid = _centralities(cfg, graph)
    open_scores = openness_table(b)
    stats_rows = [(cfg.category or "all", summarize(graph, cfg.seed, args.apl_scope, args.community_method))]
    with _Staging(cfg.out_dir, cfg.emit) as stage:
        stage.table("rejects", write_rejects, rejects)
        _write_graph(stage, "projection", g)
        stage.table("backbone", write_backbone, bb)
        stage.table("centrality", write_centrality, main, with_component_size=cfg.component_restrict)
        if grid:
            stage.table("centrality_grid", write_centrality, grid, with_component_size=cfg.component_restrict)
        stage.table("openness", write_openness, open_scores)
        stage.table("netstats", write_netstats, stats_rows)
        if cfg.covariates:
            _write_regressions(stage, cfg, _scores_frame(main, open_scores))
        extra = {"apl_scope": args.apl_scope, "community_method": args.community_method}
        stage.text("manifest.json", _manifest(cfg, "pipeline", stage.written + ["manifest.json"], extra))
    return 0


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "project": cmd_project,
    "backbone": cmd_backbone,
    "centrality": cmd_centrality,
    "openness": cmd_openness,
    "netstats": cmd_netstats,
    "regress": cmd_regress,
    "synth": cmd_synth,
    "pipeline": cmd_pipeline,
}


# ---------------------------------------------------------------- parser

def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _names(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="coconsume", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory receiving the outputs")
    common.add_argument("--emit", choices=("tsv", "json"), default="tsv")
    common.add_argument("--seed", type=int, default=0, help="root seed for every random step")
    common.add_argument("-v", "--verbose", action="store_true")

    listing = argparse.ArgumentParser(add_help=False)
    listing.add_argument("--input", action="append", required=True, help="listing file (repeatable)")
    listing.add_argument("--format", choices=FORMATS, default=None,
                         help="defaults to the input file extension")
    listing.add_argument("--strict", action="store_true", help="fail on the first malformed line")
    listing.add_argument("--category", default=None)
    listing.add_argument("--min-countries-per-item", type=int, default=1)

    bb = argparse.ArgumentParser(add_help=False)
    bb.add_argument("--significance", type=float, default=0.05)
    bb.add_argument("--backbone-method", choices=METHODS, default="analytic")
    bb.add_argument("--mc-samples", type=int, default=100_000)
    bb.add_argument("--on-projection", action="store_true",
                    help="analyse the unfiltered projection instead of the backbone")

    cent = argparse.ArgumentParser(add_help=False)
    cent.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    cent.add_argument("--alpha-grid", type=_floats, default=[])
    cent.add_argument("--component-restrict", action="store_true")

    stats = argparse.ArgumentParser(add_help=False)
    stats.add_argument("--apl-scope", choices=APL_SCOPES, default="components")
    stats.add_argument("--community-method", choices=COMMUNITY_METHODS, default="greedy")

    reg = argparse.ArgumentParser(add_help=False)
    reg.add_argument("--outcome", choices=OUTCOMES, action="append", default=None)
    reg.add_argument("--model", choices=MODELS + ("all",), default="all")
    reg.add_argument("--extra-controls", type=_names, default=[])

    sub.add_parser("ingest-check", parents=[common, listing], help="parse listings, report rejects")
    sub.add_parser("project", parents=[common, listing], help="weighted country projection")
    sub.add_parser("backbone", parents=[common, listing, bb], help="disparity-filter backbone")
    sub.add_parser("centrality", parents=[common, listing, bb, cent], help="alpha closeness/betweenness")
    sub.add_parser("openness", parents=[common, listing], help="composite openness scores")
    sub.add_parser("netstats", parents=[common, listing, bb, stats], help="network summary per category")
    p = sub.add_parser("regress", parents=[common, reg], help="OLS models on covariates")
    p.add_argument("--covariates", required=True)
    p.add_argument("--scores", action="append", required=True,
                   help="score TSV (country + outcome columns), repeatable")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                   help="alpha rows to use when a scores file holds a grid")
    p = sub.add_parser("synth", parents=[common], help="planted-structure synthetic listings")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--blocks", default=None, help="comma list of block sizes")
    p.add_argument("--bridges", default=None, help="e.g. 0.5:0.5;0.2:0.8")
    p.add_argument("--items-per-country", type=int, default=None)
    p.add_argument("--intra-block-share", type=float, default=None)
    p.add_argument("--inter-block-share", type=float, default=None)
    p.add_argument("--pool-size", type=int, default=None)
    p.add_argument("--popularity", choices=("uniform", "zipf"), default=None)
    p.add_argument("--days", type=int, default=None)
    p = sub.add_parser("pipeline", parents=[common, listing, bb, cent, stats, reg], help="run every stage")
    p.add_argument("--covariates", default=None)
    return parser


def _config_from_args(args):
    inputs = list(getattr(args, "input", None) or [])
    fmt = getattr(args, "format", None)
    if fmt is None and inputs:
        fmt = "csv" if Path(inputs[0]).suffix.lower() == ".csv" else "jsonl"
    model = getattr(args, "model", "all")
    cfg = PipelineConfig(
        inputs=inputs,
        format=fmt or "jsonl",
        category=getattr(args, "category", None),
        min_countries_per_item=getattr(args, "min_countries_per_item", 1),
        alpha=getattr(args, "alpha", DEFAULT_ALPHA),
        alpha_grid=getattr(args, "alpha_grid", []),
        significance=getattr(args, "significance", 0.05),
        backbone_method=getattr(args, "backbone_method", "analytic"),
        mc_samples=getattr(args, "mc_samples", 100_000),
        seed=args.seed,
        on_projection=getattr(args, "on_projection", False),
        component_restrict=getattr(args, "component_restrict", False),
        covariates=getattr(args, "covariates", None),
        outcomes=getattr(args, "outcome", None) or list(OUTCOMES),
        models=list(MODELS) if model == "all" else [model],
        extra_controls=getattr(args, "extra_controls", []),
        out_dir=args.out_dir,
        emit=args.emit,
        strict=getattr(args, "strict", False),
    )
    cfg.validate()
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = _config_from_args(args)
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"coconsume: error: {exc}", file=sys.stderr)
        return 2
    except (AnalysisError, ValueError, KeyError) as exc:
        print(f"coconsume: analysis error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"coconsume: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
