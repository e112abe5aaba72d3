# app/cli.py
"""
Command line entry point.

    python -m app.cli generate --system henon --K 5 --C 0.2 --n 512 --seed 1 --out data/henon.txt
    python -m app.cli measure --input data/henon.txt --measure TE --param m=2 --out R.txt
    python -m app.cli test --matrix R.txt --criterion density=6 --out est.txt
    python -m app.cli evaluate --truth data/henon.adj.txt --estimate est.txt
    python -m app.cli bench --config configs/henon_k5_demo.json
    python -m app.cli report --results artifacts/bench_results.csv

Exit codes: 0 success, 1 computation error, 2 invalid configuration or arguments.
"""
import argparse
import json
import logging
import sys
import traceback
import uuid
from typing import List, Optional

from app.bench import read_results, report_rankings, run_experiment, write_results
from app.config import load_config
from app.errors import CausalityError, ConfigError, InvalidParameter
from app.evaluation import evaluate
from app.measures import MEASURES, compute_measure, measure_id
from app.significance import (
    DEFAULT_SURROGATES,
    binarize_density,
    binarize_magnitude,
    binarize_pmime,
    binarize_significance,
    surrogate_pvalues,
)
from app.storage import (
    get_artifact_path,
    matrix_path,
    read_adjacency,
    read_matrix,
    save_artifact,
    sidecar_path,
    write_adjacency,
    write_matrix,
)
from app.systems import SYSTEMS, generate_system
from app.timeseries import load_timeseries, save_timeseries
from app.utils.run_logger import agent_log


def _parse_params(items: Optional[List[str]]) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"parameter '{item}' must look like key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        params[key.strip()] = value
    return params


def _parse_criterion(text: str):
    if text == "pmime":
        return "pmime", None
    kind, _, raw = text.partition("=")
    if kind not in ("alpha", "density", "magnitude") or not raw:
        raise ConfigError(f"criterion '{text}' must be alpha=<a>, density=<edges>, magnitude=<th> or pmime")
    try:
        return kind, float(raw)
    except ValueError:
        raise ConfigError(f"criterion value '{raw}' is not a number")


# ---------------------------------------
#  SUBCOMMANDS
# ---------------------------------------
def cmd_generate(args) -> int:
    ts, graph = generate_system(args.system, args.K, args.C, args.n, args.seed,
                                delta=args.delta, A=args.A, order=args.order)
    out = args.out or matrix_path(None, f"{args.system}_K{args.K}_C{args.C:g}_n{args.n}_s{args.seed}.txt")
    save_timeseries(out, ts, header=not args.no_header)
    adj = write_adjacency(sidecar_path(out), graph.adjacency)
    agent_log("cli", f"generated {args.system} K={args.K} C={args.C} n={args.n} seed={args.seed} -> {out}", agent="cli")
    print(f"{out}\n{adj}")
    return 0


def cmd_measure(args) -> int:
    ts = load_timeseries(args.input, standardize_input=not args.raw)
    params = _parse_params(args.param)
    cm = compute_measure(args.measure, ts, params)
    out = args.out or get_artifact_path("cli", f"{args.measure}.txt")
    write_matrix(out, cm.values)
    agent_log("cli", f"{measure_id(args.measure, params)} on {args.input} -> {out}", agent="cli")
    print(out)
    return 0


def cmd_test(args) -> int:
    kind, value = _parse_criterion(args.criterion)
    if kind == "alpha":
        if not (args.input and args.measure):
            raise ConfigError("alpha criterion needs --input and --measure for the surrogate test")
        ts = load_timeseries(args.input, standardize_input=not args.raw)
        params = _parse_params(args.param)
        pvals = surrogate_pvalues(args.measure, ts, params, args.surrogates, args.seed, run_id="cli")
        if args.pvalues:
            write_matrix(args.pvalues, pvals)
        net = binarize_significance(pvals, value)
    else:
        if not args.matrix:
            raise ConfigError(f"{kind} criterion needs --matrix")
        values = read_matrix(args.matrix)
        if kind == "pmime":
            net = binarize_pmime(values)
        elif kind == "density":
            net = binarize_density(values, int(value))
        else:
            net = binarize_magnitude(values, value)
    out = args.out or get_artifact_path("cli", "adjacency.txt")
    write_adjacency(out, net.adjacency)
    print(f"{out} ({net.edges} edges, {net.label})")
    return 0


def cmd_evaluate(args) -> int:
    report = evaluate(read_adjacency(args.truth), read_adjacency(args.estimate))
    c = report.counts
    print(f"TP={c.TP} FP={c.FP} FN={c.FN} TN={c.TN}")
    print(f"sens={report.sens:.3f} spec={report.spec:.3f} prec={report.prec:.3f} "
          f"MCC={report.MCC:.3f} FM={report.FM:.3f} HD={report.HD}")
    return 0


def cmd_bench(args) -> int:
    cfg = load_config(args.config)
    if args.workers:
        cfg.workers = args.workers
    run_id = args.run_id or f"bench_{uuid.uuid4().hex[:8]}"
    table = run_experiment(cfg, run_id)
    results = write_results(table, run_id, cfg.output_dir)
    report = report_rankings(table, seed=cfg.seed)
    report_path = save_artifact(run_id, "report.txt", report)
    print(f"{results}\n{report_path}")
    return 0


def cmd_report(args) -> int:
    text = report_rankings(read_results(args.results), seed=args.seed, top=args.top)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalnet", description="Granger causality network benchmark")
    parser.add_argument("-v", "--verbose", action="store_true", help="echo run log lines to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a system and write data plus adjacency")
    p.add_argument("--system", choices=SYSTEMS, required=True)
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--C", type=float, default=0.2, help="coupling strength")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=100.0, help="Mackey-Glass delay (default: 100)")
    p.add_argument("--A", type=float, default=3.45, help="neural mass excitation (default: 3.45)")
    p.add_argument("--order", type=int, default=3, help="sparse VAR order (default: 3)")
    p.add_argument("--out", help="output file (default: DATA_DIR/<system>_...txt)")
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("measure", help="compute a causality matrix from a data file")
    p.add_argument("--input", required=True)
    p.add_argument("--measure", choices=MEASURES, required=True)
    p.add_argument("--param", action="append", help="key=value, e.g. p=3, m=2, L=5, band=alpha")
    p.add_argument("--raw", action="store_true", help="skip standardization")
    p.add_argument("--out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("test", help="binarize a causality matrix")
    p.add_argument("--criterion", required=True, help="alpha=<a> | density=<edges> | magnitude=<th> | pmime")
    p.add_argument("--matrix", help="causality matrix file (density, magnitude, pmime)")
    p.add_argument("--input", help="data file (alpha)")
    p.add_argument("--measure", choices=MEASURES)
    p.add_argument("--param", action="append")
    p.add_argument("--surrogates", type=int, default=DEFAULT_SURROGATES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pvalues", help="also write the p-value matrix here")
    p.add_argument("--raw", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("evaluate", help="compare an estimated network with the truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--estimate", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="run a sweep from a JSON experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--run-id")
    p.add_argument("--workers", type=int, help="override BENCH_WORKERS / config workers")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="rankings and scores from a results table")
    p.add_argument("--results", required=True)
    p.add_argument("--seed", type=int, default=0, help="tie-breaking seed of the ordinal ranking")
    p.add_argument("--top", type=int, help="show only the best N per scenario")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidParameter) as e:
        agent_log("cli", f"{args.command}: {e}", agent="cli", level="ERROR")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except CausalityError as e:
        agent_log("cli", f"{args.command}: {e.code}: {e}\n{traceback.format_exc()}", agent="cli", level="ERROR")
        print(f"error [{e.code}]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
