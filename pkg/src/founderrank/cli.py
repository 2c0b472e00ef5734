"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 success, 1 domain error (one JSON line on stderr), 2 usage
error. Every run appends a manifest line to the run log.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from . import graph as graphmod
from .errors import FounderRankError, InputError
from .fileio import atomic_write_text, read_csv, read_json, write_csv, write_json

RUN_LOG_ENV = "FOUNDERRANK_RUN_LOG"
DEFAULT_RUN_LOG = Path(".founderrank") / "runs.jsonl"

# options that name files read by a subcommand, recorded in the manifest
INPUT_OPTIONS = ("events", "state", "targets", "deltas", "labels", "base", "funding", "identity", "graph",
                 "profiles", "metrics", "weights", "baseline", "candidate", "catalog", "query", "profile",
                 "timelines", "spec", "csv", "config")
# options that do not change what a run computes
UNHASHED_OPTIONS = ("run_log", "handler")


class UsageError(Exception):
    """Bad flag combination detected after parsing."""


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# -- subcommands -----------------------------------------------------------

def cmd_ingest(args) -> dict:
    from .ingest import IngestState, ingest_events, load_config, read_event_log

    events = read_event_log(args.events)
    config = load_config(args.config)
    state = IngestState.load(args.state)
    targets = None
    if args.targets:
        targets = {row["address"]: (row.get("stage") or None) for row in read_csv(args.targets)}
    since = None
    if args.window_days is not None:
        stamps = [e.timestamp for e in events if hasattr(e, "timestamp")]
        if stamps:
            since = max(stamps) - args.window_days * 86400.0
    result = ingest_events(events, args.founder, state, config, targets, since)
    write_json(args.out, result.delta.to_dict())
    state.save(args.state)
    if args.updates:
        atomic_write_text(args.updates, "".join(json.dumps(u.to_dict(), sort_keys=True) + "\n"
                                                for u in result.updates))
    stats = result.stats.to_dict()
    sys.stdout.write(json.dumps(stats, sort_keys=True) + "\n")
    return stats


def _load_funding(path):
    from .ranking import build_funding_graph

    kinds = {"investment": [], "cofounding": [], "coinvesting": []}
    for n, row in enumerate(read_csv(path), 1):
        kind = (row.get("kind") or "").strip()
        if kind not in kinds:
            raise InputError(f"{path} row {n}: kind must be one of {sorted(kinds)}")
        a, b = (row.get("source") or "").strip(), (row.get("target") or "").strip()
        kinds[kind].append((graphmod.public_id(a), graphmod.public_id(b)))
    return build_funding_graph(kinds["investment"], kinds["cofounding"], kinds["coinvesting"])


def cmd_build(args) -> dict:
    from .graph import CommGraph, GraphDelta, apply_delta, prune_outliers, remove_orphans
    from .ranking import overlay

    g = graphmod.load(args.base) if args.base else CommGraph()
    delta = GraphDelta({}, {})
    for path in args.deltas or ():
        delta = delta.merge(GraphDelta.from_dict(read_json(path)))
    if args.labels:
        delta = delta.merge(GraphDelta({}, graphmod.read_labels(args.labels)))
    g = apply_delta(g, delta)
    if args.funding:
        identity = {}
        if args.identity:
            identity = {graphmod.public_id(r["person_id"].strip()): r["address"].strip().lower()
                        for r in read_csv(args.identity)}
        g = overlay(g, _load_funding(args.funding), identity)
    if not args.keep_orphans:
        g = remove_orphans(g)
    g = prune_outliers(g, args.outlier_percentile)
    graphmod.save(g, args.out)
    summary = {"nodes": len(g), "edges": g.number_of_edges(), "total_weight": g.total_weight()}
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return summary


def cmd_metrics(args) -> dict:
    from .centrality import METRICS_FIELDS, compute_metrics, metric_rows

    g = graphmod.load(args.graph)
    table = compute_metrics(g, args.damping, args.tol, args.max_iter)
    write_csv(args.out, METRICS_FIELDS, metric_rows(table))
    return {"nodes": len(g)}


def cmd_communities(args) -> dict:
    from .communities import community_stats, label_propagation, louvain

    g = graphmod.load(args.graph)
    if args.method == "lpa":
        part = label_propagation(g, seed=args.seed, max_iter=args.max_iter)
    else:
        part = louvain(g, seed=args.seed)
    write_csv(args.out, ["node_id", "community"],
              [{"node_id": n, "community": c} for n, c in part.assignment.items()])
    stats = community_stats(part, g.labels).to_dict()
    sys.stdout.write(json.dumps(stats, sort_keys=True) + "\n")
    return stats


def _metric_table(args):
    from .centrality import compute_metrics, table_from_rows

    if args.metrics:
        return table_from_rows(read_csv(args.metrics))
    if args.graph:
        return compute_metrics(graphmod.load(args.graph))
    raise UsageError("--graph or --metrics is required for this method")


def _weights(path):
    data = read_json(path)
    if isinstance(data, dict):
        return sorted(data.items())
    if isinstance(data, list) and all(isinstance(p, list) and len(p) == 2 for p in data):
        return [tuple(p) for p in data]
    raise InputError(f"{path}: weights must be an object or a list of [metric, weight] pairs")


def _founders(args, profiles):
    if profiles:
        return [p.founder_id for p in profiles]
    if args.graph:
        return graphmod.load(args.graph).nodes_with_label(graphmod.FOUNDER)
    raise UsageError("--profiles or --graph is required to know which founders to rank")


def cmd_rank(args) -> dict:
    from .ranking import (EMAIL_BASELINE_WEIGHTS, FRI_BASELINE_WEIGHTS, baseline_rank, load_profiles,
                          load_ranking, nfr_rank, random_rank, save_ranking, wfr_rank)

    profiles = load_profiles(args.profiles) if args.profiles else None
    info: dict = {"method": args.method}
    if args.method in ("baseline", "fri-baseline"):
        if not profiles:
            raise UsageError(f"--profiles is required for {args.method}")
        default = EMAIL_BASELINE_WEIGHTS if args.method == "baseline" else FRI_BASELINE_WEIGHTS
        weights = _weights(args.weights) if args.weights else default
        ranking = baseline_rank(profiles, weights, args.method)
    elif args.method == "random":
        ranking = random_rank(_founders(args, profiles), args.seed)
    elif args.method == "nfr":
        ranking = nfr_rank(_founders(args, profiles), _metric_table(args))
    else:
        if args.baseline:
            base = load_ranking(args.baseline)
        elif profiles:
            base = baseline_rank(profiles, _weights(args.weights) if args.weights else EMAIL_BASELINE_WEIGHTS)
        else:
            raise UsageError("wfr needs --baseline or --profiles")
        names = tuple(n.strip() for n in args.features.split(",") if n.strip())
        ranking, fit = wfr_rank(base, _metric_table(args), names)
        info["fit"] = fit.to_dict()
        if args.fit_out:
            write_json(args.fit_out, fit.to_dict())
        sys.stdout.write(json.dumps(fit.to_dict(), sort_keys=True) + "\n")
    save_ranking(ranking, args.out)
    info["founders"] = len(ranking)
    return info


def cmd_eval(args) -> dict:
    from .evaluation import evaluate
    from .ranking import load_ranking

    report = evaluate(load_ranking(args.candidate), load_ranking(args.baseline), args.p_at, args.trials,
                      args.seed, args.linear_gain)
    _emit(report.to_text(args.p_at), args.out)
    return report.to_dict()


def cmd_path(args) -> dict:
    from .ingest import normalize_address
    from .paths import firm_intro_paths, top_intro_paths

    g = graphmod.load(args.graph)
    source = normalize_address(args.source) if "@" in args.source else args.source
    if args.catalog:
        from .discovery.catalog import load_catalog

        catalog = load_catalog(args.catalog)
        if args.to in catalog.firms:
            emails = [i.email for i in catalog.firms[args.to].investors if i.email]
            if not emails:
                raise InputError(f"firm {args.to} has no investor addresses")
            paths = firm_intro_paths(g, source, emails, args.max_hops, args.k)
        else:
            paths = top_intro_paths(g, source, normalize_address(args.to), args.max_hops, args.k)
    else:
        target = normalize_address(args.to) if "@" in args.to else args.to
        paths = top_intro_paths(g, source, target, args.max_hops, args.k)
    lines = ["hops\tstrength\tpath"]
    lines += [f"{p.hops}\t{p.total_strength}\t{' -> '.join(p.nodes)}" for p in paths]
    _emit("\n".join(lines) + "\n", args.out)
    return {"paths": len(paths)}


FILTER_FLAG_FIELDS = {
    "stage": "stages", "industry": "industries", "city": "cities", "related": "related_companies",
    "topic": "topics",
}


def _query_from_args(args):
    from .discovery.engine import FilterQuery

    data = dict(read_json(args.query)) if args.query else {}
    for flag, key in FILTER_FLAG_FIELDS.items():
        values = getattr(args, flag)
        if values:
            data[key] = sorted(set(data.get(key, [])) | set(values))
    for flag, key in (("industries_and", "industries_and"), ("invested_in", "cities_invested_in"),
                      ("similar", "related_similar"), ("us_only", "us_only"), ("descending", "descending")):
        if getattr(args, flag):
            data[key] = True
    if args.search is not None:
        data["search"] = args.search
    if args.sort_by is not None:
        data["sort_by"] = args.sort_by
    return FilterQuery.from_dict(data)


FILTER_OUT_FIELDS = ["position", "firm_id", "name", "hq_city", "stages", "pace", "top_industries",
                     "partner_id", "partner_name"]


def cmd_filter(args) -> dict:
    from .discovery.catalog import STAGE_RANK, load_catalog
    from .discovery.engine import FounderContext, best_partner_match, filter_and_search, top_industries

    catalog = load_catalog(args.catalog)
    query = _query_from_args(args)
    ctx = FounderContext.from_dict(read_json(args.profile) if args.profile else None)
    firms = filter_and_search(catalog, ctx, query)
    rows = []
    for pos, f in enumerate(firms):
        partner = best_partner_match(f, query)
        rows.append({
            "position": pos, "firm_id": f.firm_id, "name": f.name, "hq_city": f.hq_city,
            "stages": ";".join(sorted(f.stages, key=STAGE_RANK.get)), "pace": f.investments_last_year,
            "top_industries": ";".join(top_industries(catalog, f)),
            "partner_id": partner.investor_id if partner else "",
            "partner_name": partner.full_name if partner else "",
        })
    write_csv(args.out, FILTER_OUT_FIELDS, rows)
    return {"results": len(rows)}


def cmd_analyze(args) -> dict:
    from .analytics import analysis_report, read_timelines

    timelines = read_timelines(args.timelines)
    _emit(analysis_report(timelines), args.out)
    return {"timelines": len(timelines)}


def cmd_synth(args) -> dict:
    from dataclasses import replace

    from .synth import SynthSpec, generate, write_world

    spec = SynthSpec.load(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    world = generate(spec)
    paths = write_world(world, args.out)
    summary = {"nodes": len(world.graph), "edges": world.graph.number_of_edges(),
               "events": len(world.events), "mailbox_owner": world.mailbox_owner}
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return {"outputs": paths, **summary}


def cmd_import(args) -> dict:
    import csv

    from .discovery.importer import CANONICAL_FIELDS, guess_column_mapping

    try:
        with open(args.csv, encoding="utf-8", newline="") as fh:
            headers = next(csv.reader(fh), None)
    except OSError as exc:
        raise InputError(f"cannot read {args.csv}: {exc}") from exc
    if not headers:
        raise InputError(f"{args.csv} has no header row")
    mapping = guess_column_mapping(headers, CANONICAL_FIELDS)
    lines = ["column\theader\tfield"]
    lines += [f"{i}\t{h}\t{mapping.get(i, '-')}" for i, h in enumerate(headers)]
    sys.stdout.write("\n".join(lines) + "\n")
    return {"mapped": len(mapping), "columns": len(headers)}


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="founderrank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--run-log", help=f"manifest log (default ${RUN_LOG_ENV} or {DEFAULT_RUN_LOG})")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ingest", help="turn an email event log into a graph delta")
    p.add_argument("--events", required=True)
    p.add_argument("--founder", required=True, help="mailbox owner address")
    p.add_argument("--state", required=True, help="directory holding state.json")
    p.add_argument("--out", required=True, help="delta file (JSON)")
    p.add_argument("--targets", help="CSV with address, stage of tracked investors")
    p.add_argument("--updates", help="write conversation updates here (JSONL)")
    p.add_argument("--window-days", type=float, help="only events this many days before the newest one")
    p.add_argument("--config", help="rules config JSON overriding the defaults")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("build", help="merge deltas and labels into a graph snapshot")
    p.add_argument("--deltas", nargs="*", default=[])
    p.add_argument("--labels", help="CSV: node_id, role, employed_by_fund")
    p.add_argument("--base", help="existing snapshot to extend")
    p.add_argument("--funding", help="CSV: kind, source, target (public funding records)")
    p.add_argument("--identity", help="CSV: person_id, address linking public people to addresses")
    p.add_argument("--outlier-percentile", type=float)
    p.add_argument("--keep-orphans", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("metrics", help="PageRank, betweenness and closeness per node")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=1000)
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("communities", help="detect communities")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", choices=("lpa", "louvain"), default="lpa")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_communities)

    p = sub.add_parser("rank", help="rank founders")
    p.add_argument("--method", required=True, choices=("baseline", "fri-baseline", "random", "nfr", "wfr"))
    p.add_argument("--graph")
    p.add_argument("--profiles")
    p.add_argument("--metrics")
    p.add_argument("--baseline", help="ranking file to fit wfr against")
    p.add_argument("--weights", help="JSON weights for the baseline")
    p.add_argument("--features", default="pagerank,betweenness,closeness")
    p.add_argument("--fit-out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_rank)

    p = sub.add_parser("eval", help="compare a candidate ranking with a baseline")
    p.add_argument("--candidate", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--p-at", type=_csv_ints, default=(5, 10, 20))
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--linear-gain", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("path", help="warm-introduction paths")
    p.add_argument("--graph", required=True)
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", required=True, help="investor address or firm id (with --catalog)")
    p.add_argument("--catalog")
    p.add_argument("--max-hops", type=int, default=4)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_path)

    p = sub.add_parser("filter", help="filter, search and order the investor catalog")
    p.add_argument("--catalog", required=True)
    p.add_argument("--query", help="query JSON file; flags below add to it")
    p.add_argument("--stage", action="append")
    p.add_argument("--industry", action="append")
    p.add_argument("--industries-and", action="store_true")
    p.add_argument("--city", action="append")
    p.add_argument("--invested-in", action="store_true")
    p.add_argument("--related", action="append")
    p.add_argument("--similar", action="store_true")
    p.add_argument("--topic", action="append")
    p.add_argument("--us-only", action="store_true")
    p.add_argument("--search")
    p.add_argument("--sort-by")
    p.add_argument("--descending", action="store_true")
    p.add_argument("--profile", help="founder JSON with industries and cities")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_filter)

    p = sub.add_parser("analyze", help="fundraising period and email-volume curve")
    p.add_argument("--timelines", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("synth", help="generate a synthetic world")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("import", help="guess the column mapping of an investor spreadsheet")
    p.add_argument("--csv", required=True)
    p.add_argument("--mapping-preview", action="store_true", required=True)
    p.set_defaults(handler=cmd_import)
    return parser


# -- manifest --------------------------------------------------------------

def config_hash(options: dict) -> str:
    """Hash of the options that affect results; key order and list order of set-like flags ignored."""
    clean = {}
    for k, v in options.items():
        if k in UNHASHED_OPTIONS or v is None or v is False or v == [] or v == ():
            continue
        if isinstance(v, (list, tuple)) and k in ("stage", "industry", "city", "related", "topic"):
            v = sorted(set(v))
        clean[k] = v
    blob = json.dumps(clean, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _inputs(options: dict) -> list[str]:
    found = []
    for k in INPUT_OPTIONS:
        v = options.get(k)
        if isinstance(v, (list, tuple)):
            found += [str(x) for x in v]
        elif v:
            found.append(str(v))
    return found


def _append_manifest(path, record: dict) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    except OSError as exc:
        sys.stderr.write(f"warning: cannot write run log {path}: {exc}\n")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    options = {k: v for k, v in vars(args).items() if k != "handler"}
    started = time.perf_counter()
    code = 1  # stays 1 if the handler dies with an unexpected exception
    error = None
    try:
        args.handler(args)
        code = 0
    except UsageError as exc:
        sys.stderr.write(f"founderrank {args.command}: error: {exc}\n")
        code = 2
    except FounderRankError as exc:
        error = exc.to_dict()
    except ValueError as exc:
        error = {"error": "InvalidArgument", "message": str(exc)}
    finally:
        if error is not None:
            sys.stderr.write(json.dumps(error, sort_keys=True) + "\n")
        log_path = args.run_log or os.environ.get(RUN_LOG_ENV) or DEFAULT_RUN_LOG
        _append_manifest(log_path, {
            "subcommand": args.command,
            "inputs": _inputs(options),
            "config_hash": config_hash(options),
            "seed": options.get("seed"),
            "tool_version": __version__,
            "duration_s": round(time.perf_counter() - started, 6),
            "exit_code": code,
        })
    return code


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
