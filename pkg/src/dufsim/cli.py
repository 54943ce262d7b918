"""Command line front end: ``dufsim {decode,bench,verify,replay}``."""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from pathlib import Path


from .correction import DecoderError
from .distributed import LivenessError
from .graph import GraphConfig, build_decoding_graph
from .harness import (ExperimentConfig, InvariantViolation, ReplayError, decode,
                      experiment_graph, format_report, replay, run_experiment,
                      schedule_seed, sweep, verify_shot)
from .noise import Syndrome, sample_errors, syndrome_from_errors


def _common(p: argparse.ArgumentParser, multi: bool = False):
    nargs = "+" if multi else None
    p.add_argument("--d", type=int, nargs=nargs, required=True, help="code distance")
    p.add_argument("--rounds", type=int, default=None, help="measurement rounds (default d)")
    p.add_argument("--p", type=float, nargs=nargs, default=[0.001] if multi else 0.001,
                   help="physical error rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weighted", action="store_true", help="non-identical edge weights")
    p.add_argument("--mean", type=float, default=0.001)
    p.add_argument("--stddev", type=float, default=0.0005)
    p.add_argument("--wmax", type=int, nargs=nargs, default=[2] if multi else 2)
    p.add_argument("--clock-ns", type=float, default=10.0)
    p.add_argument("--dump-graph", type=Path, default=None, help="write the graph as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dufsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode a single shot")
    _common(p)
    p.add_argument("--trial", type=int, default=0, help="trial index of the sampled shot")
    p.add_argument("--defects", type=int, nargs="*", default=None,
                   help="explicit defect ids instead of sampling")
    p.add_argument("--mode", choices=("serial", "staged", "sync", "verify"), default="sync")
    p.add_argument("--trace", type=Path, default=None, help="write the cycle trace as CSV")

    p = sub.add_parser("bench", help="sweep distances, error rates and weights")
    _common(p, multi=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--mode", choices=("serial", "staged", "sync", "verify"), default="sync")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("verify", help="check serial, staged and synchronous decoders agree")
    _common(p, multi=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--log", type=Path, default=None, help="per-trial JSON lines")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("replay", help="re-decode recorded shots from a JSON-lines file")
    p.add_argument("input", type=Path)
    p.add_argument("--d", type=int, default=None, help="override the record's distance")
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--mode", choices=("serial", "staged", "sync", "verify"), default="sync")
    p.add_argument("--trace", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)
    return parser


def _configs(args, mode: str) -> list[ExperimentConfig]:
    wmaxes = args.wmax if args.weighted else [2]
    return [ExperimentConfig(d=d, rounds=args.rounds, p=p, trials=args.trials, seed=args.seed,
                             mode=mode, weighted=args.weighted, mean=args.mean,
                             stddev=args.stddev, w_max=w, clock_ns=args.clock_ns)
            for d, p, w in itertools.product(args.d, args.p, wmaxes)]


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _trace_writer(path):
    if path is None:
        return None, None
    fh = path.open("w", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(("cycle", "vertex_id", "field", "old", "new"))
    return fh, writer.writerow


def cmd_decode(args) -> int:
    config = ExperimentConfig(d=args.d, rounds=args.rounds, p=args.p, trials=1, seed=args.seed,
                              mode=args.mode, weighted=args.weighted, mean=args.mean,
                              stddev=args.stddev, w_max=args.wmax, clock_ns=args.clock_ns)
    graph, p = experiment_graph(config)
    if args.dump_graph:
        args.dump_graph.write_text(graph.dumps())
    if args.defects is not None:
        syndrome = Syndrome(args.defects)
    else:
        syndrome = syndrome_from_errors(graph, sample_errors(graph, p, args.seed, args.trial))
    fh, trace = _trace_writer(args.trace)
    try:
        if args.mode == "verify":
            result, problems = verify_shot(graph, syndrome, schedule_seed(args.seed, args.trial))
            if problems:
                print("; ".join(problems), file=sys.stderr)
                return 1
        else:
            result = decode(graph, syndrome, args.mode, schedule_seed(args.seed, args.trial),
                            trace=trace)
    finally:
        if fh:
            fh.close()
    summary = {
        "defects": syndrome.defects.tolist(),
        "flipped": syndrome.errors.flipped.tolist() if syndrome.errors is not None else None,
        "clusters": [sorted(c) for c in result.clusters(graph.n_real) if len(c) > 1],
        "correction": result.correction.tolist(),
        "growth_iterations": result.growth_iterations,
        "cycles": getattr(result, "cycles", None),
    }
    print(json.dumps(summary))
    return 0


def cmd_bench(args) -> int:
    if args.dump_graph:
        cfg = GraphConfig(args.d[0], args.rounds)
        args.dump_graph.write_text(build_decoding_graph(cfg).dumps())
    stats = sweep(_configs(args, args.mode), workers=args.workers)
    _emit(format_report(stats, args.format), args.out)
    return 1 if any(s.mismatches for s in stats) else 0


def cmd_verify(args) -> int:
    configs = _configs(args, "verify")
    stats = []
    for i, cfg in enumerate(configs):
        log = None
        if args.log is not None:
            log = args.log if len(configs) == 1 else args.log.with_suffix(f".{i}.jsonl")
        stats.append(run_experiment(cfg, workers=args.workers, log=log, strict=False))
    _emit(format_report(stats, args.format), args.out)
    bad = sum(s.mismatches for s in stats)
    if bad:
        print(f"{bad} mismatching trials", file=sys.stderr)
    return 1 if bad else 0


def cmd_replay(args) -> int:
    graph = None
    if args.d is not None:
        graph = build_decoding_graph(GraphConfig(args.d, args.rounds))
    fh, trace = _trace_writer(args.trace)
    try:
        outcomes = replay(args.input, graph, args.mode, trace=trace)
    finally:
        if fh:
            fh.close()
    _emit("".join(o.to_json() + "\n" for o in outcomes), args.out)
    return 0 if all(o.annihilated for o in outcomes) else 1


COMMANDS = {"decode": cmd_decode, "bench": cmd_bench, "verify": cmd_verify, "replay": cmd_replay}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InvariantViolation, DecoderError, LivenessError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (ReplayError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
