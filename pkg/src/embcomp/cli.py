"""Command-line entry point.

Subcommands:
    synth      generate a deterministic clustered embedding file
    subsample  build a nested corpus manifest from TREC runs + qrels
    run        execute a codec sweep and write per-cell result JSONs
    report     codec x size table for one metric (txt + csv + png)
    pareto     compression-ratio frontier csv + png
    scaling    metric vs corpus-size csv + png
"""

import argparse
import json
import sys

from . import corpus as corpus_mod
from . import reports
from .pipeline import ExperimentConfig, run as run_experiment
from .store import SyntheticSpec, generate_synthetic, write_matrix


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        seed=args.seed,
        dim=args.dim,
        n_clusters=args.clusters,
        cluster_spread=args.spread,
        count=args.count,
    )
    write_matrix(generate_synthetic(spec), args.out)
    print(f"wrote {args.count} x {args.dim} embeddings to {args.out}")
    return 0


def _cmd_subsample(args: argparse.Namespace) -> int:
    from .metrics import parse_qrels

    qrels = parse_qrels(args.qrels)
    pool = corpus_mod.load_run_pool(args.runs)
    kept = corpus_mod.filter_runs(pool, qrels, drop_fraction=args.drop_fraction)
    fused = corpus_mod.rrf_fuse(kept, k_rrf=args.k_rrf)
    distractors = corpus_mod.mine_distractors(fused, qrels, n_distractors=args.distractors)
    with open(args.universe, encoding="utf-8") as f:
        universe = [line.strip() for line in f if line.strip()]
    manifest = corpus_mod.assemble(
        qrels,
        distractors,
        universe,
        sizes=args.sizes,
        seed=args.seed,
        k_rrf=args.k_rrf,
    )
    manifest.write(args.out)
    print(
        f"manifest: sizes={manifest.sizes} mandatory={manifest.counts['mandatory']} "
        f"runs kept={len(kept)}/{len(pool)} -> {args.out}"
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_json_file(args.config)
    if args.output_dir:
        config.output_dir = args.output_dir
    results, failures = run_experiment(config)
    print(f"{len(results)} cells ok, {len(failures)} failed -> {config.output_dir}")
    for f in failures:
        print(f"FAILED {f.label} @ {f.corpus_size}: {f.error}", file=sys.stderr)
    return 0 if not failures else 1


def _load(args: argparse.Namespace):
    return reports.load_results(args.results)


def _cmd_report(args: argparse.Namespace) -> int:
    docs = _load(args)
    text, rows = reports.report_table(docs, args.metric)
    print(text, end="")
    reports.write_csv(rows, args.out + ".csv")
    written = [args.out + ".csv"]
    if not args.no_figure:
        reports.save_table_figure(rows, args.metric, args.out + ".png")
        written.append(args.out + ".png")
    print("wrote " + ", ".join(written))
    return 0


def _cmd_pareto(args: argparse.Namespace) -> int:
    docs = _load(args)
    rows = reports.pareto_rows(docs, args.metric)
    reports.write_csv(rows, args.out + ".csv")
    written = [args.out + ".csv"]
    if not args.no_figure:
        reports.save_pareto_figure(rows, args.metric, args.out + ".png")
        written.append(args.out + ".png")
    print("wrote " + ", ".join(written))
    return 0


def _cmd_scaling(args: argparse.Namespace) -> int:
    docs = _load(args)
    rows = reports.scaling_rows(docs, args.metric)
    reports.write_csv(rows, args.out + ".csv")
    written = [args.out + ".csv"]
    if not args.no_figure:
        reports.save_scaling_figure(rows, args.metric, args.out + ".png")
        written.append(args.out + ".png")
    print("wrote " + ", ".join(written))
    return 0


def _add_report_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--results", required=True, help="glob over result JSONs")
    p.add_argument("--metric", default="recall@100", help="metric key, e.g. ndcg@10")
    p.add_argument("--out", required=True, help="output base path (writes .csv/.png)")
    p.add_argument("--no-figure", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embcomp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a clustered synthetic embedding file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--spread", type=float, default=0.1)
    p.add_argument("--count", type=int, default=1000)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("subsample", help="build a nested corpus manifest from runs")
    p.add_argument("--runs", nargs="+", required=True, help="TREC run files")
    p.add_argument("--qrels", required=True)
    p.add_argument("--universe", required=True, help="file of candidate doc ids, one per line")
    p.add_argument("--sizes", type=int, nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop-fraction", type=float, default=corpus_mod.DEFAULT_DROP_FRACTION)
    p.add_argument("--distractors", type=int, default=corpus_mod.DEFAULT_N_DISTRACTORS)
    p.add_argument("--k-rrf", type=int, default=corpus_mod.DEFAULT_K_RRF)
    p.set_defaults(func=_cmd_subsample)

    p = sub.add_parser("run", help="run a codec sweep from a JSON config")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON file")
    p.add_argument("--output-dir", default=None, help="override config output_dir")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="render the codec x size metric table")
    _add_report_args(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("pareto", help="compression-ratio frontier")
    _add_report_args(p)
    p.set_defaults(func=_cmd_pareto)

    p = sub.add_parser("scaling", help="metric vs corpus size")
    _add_report_args(p)
    p.set_defaults(func=_cmd_scaling)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
