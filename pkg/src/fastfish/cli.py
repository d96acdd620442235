"""Command-line interface.

Subcommands: ``synth`` (generate a synthetic dataset), ``run`` (execute an
experiment config), ``bench-fim`` (timing table), ``report`` (summarize
results files), ``inspect`` (print a dataset header). Exit codes: 0 success,
1 runtime failure with a one-line ``error: <type>: <message>`` on stderr,
2 usage error. ``--threads`` (or FASTFISH_THREADS) caps both seed-level and
BLAS parallelism; diagnostics go to stderr, tabular output to files or stdout.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__, bench, harness, results
from .config import config_hash, protocol_hash, read_config, strategy_id
from .data import atomic_write_text, read_embeddings, write_embeddings
from .exceptions import FastfishError

log = logging.getLogger("fastfish")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fastfish", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, default=None, help="cap parallelism globally")
    parser.add_argument(
        "--log", choices=("quiet", "info", "debug"), default="quiet", help="stderr verbosity"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic Gaussian-mixture dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sep", type=float, default=3.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-out", default=None, help="also write a held-out split here")
    p.add_argument("--test-frac", type=float, default=0.5, help="fraction for --test-out")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bench-fim", help="time per-instance matrices and candidate scoring")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", required=True, help="comma-separated class counts, e.g. 10,50,200")
    p.add_argument("--kinds", required=True, help="comma-separated kinds, e.g. exact,topc:2,binary")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=("auto", "py", "ext"), default="auto")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("report", help="summarize results files into tables")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--baseline", default="random")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("inspect", help="print a dataset header and basic stats")
    p.add_argument("path")
    p.set_defaults(func=_cmd_inspect)
    return parser


def _cmd_synth(args) -> None:
    ds = harness.gen_synthetic(args.n, args.d, args.k, args.sep, args.noise, args.seed)
    if args.test_out is not None:
        n_first = max(1, min(ds.n - 1, round(ds.n * (1.0 - args.test_frac))))
        train, test = harness.split_dataset(ds, n_first)
        write_embeddings(train, args.out)
        write_embeddings(test, args.test_out)
        log.info("wrote %s (%d rows) and %s (%d rows)", args.out, train.n, args.test_out, test.n)
    else:
        write_embeddings(ds, args.out)
        log.info("wrote %s (%d rows)", args.out, ds.n)


def _cmd_run(args) -> None:
    config = read_config(args.config)
    records_by_seed = harness.run_experiment(config, threads=args.threads)
    if not records_by_seed:
        raise FastfishError("all seeds failed; see log for diagnostics")
    header = results.make_header(
        config_hash=config_hash(config),
        protocol_hash=protocol_hash(config),
        strategy=strategy_id(config.strategy),
    )
    flat = [rec for seed in sorted(records_by_seed) for rec in records_by_seed[seed]]
    results.write_results(flat, args.out, header)
    log.info("wrote %d records to %s", len(flat), args.out)


def _cmd_bench(args) -> None:
    k_list = [int(tok) for tok in args.k.split(",") if tok]
    kind_list = [tok for tok in args.kinds.split(",") if tok]
    rows = bench.bench_fim(
        args.d, k_list, args.n, kind_list, args.reps, backend=args.backend
    )
    atomic_write_text(args.out, bench.rows_to_csv(rows))
    log.info("wrote %d bench rows to %s", len(rows), args.out)


def _cmd_report(args) -> None:
    summary = results.summarize(args.inputs, baseline=args.baseline)
    table = summary.table_csv()
    atomic_write_text(args.out, table)
    base, ext = os.path.splitext(args.out)
    curves_path = f"{base}.curves{ext or '.csv'}"
    atomic_write_text(curves_path, summary.curves_csv())
    sys.stdout.write(table)
    log.info("wrote %s and %s", args.out, curves_path)


def _cmd_inspect(args) -> None:
    ds = read_embeddings(args.path)
    counts = np.bincount(ds.labels, minlength=ds.n_classes + 1)[1:]
    print(f"path: {args.path}")
    print(f"n: {ds.n}")
    print(f"d: {ds.dim}")
    print(f"k: {ds.n_classes}")
    print(f"labels: min={int(ds.labels.min())} max={int(ds.labels.max())}")
    print(f"class_counts: {counts.tolist()}")
    print(
        "features: "
        f"min={float(ds.features.min()):.6g} max={float(ds.features.max()):.6g} "
        f"mean={float(ds.features.mean()):.6g} std={float(ds.features.std()):.6g}"
    )
    print(f"metadata: {json.dumps(ds.metadata, sort_keys=True)}")


def _thread_limits(threads: int | None):
    if threads is None:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=max(1, threads))
    except ImportError:
        log.debug("threadpoolctl unavailable; BLAS pools left unlimited")
        return contextlib.nullcontext()


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help
        return int(exc.code or 0)
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}[args.log]
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        env = os.environ.get("FASTFISH_THREADS")
        if env is not None:
            try:
                args.threads = int(env)
            except ValueError:
                print("error: ConfigError: FASTFISH_THREADS must be an integer", file=sys.stderr)
                return 1
    try:
        with _thread_limits(args.threads):
            args.func(args)
    except (FastfishError, OSError) as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
