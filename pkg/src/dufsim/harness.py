"""Monte-Carlo experiments over the decoders.

A trial samples errors, derives the syndrome, decodes it in the configured
mode, peels a correction and scores it. Trials are keyed by
``(seed, trial_index)``, so a run split across worker processes reproduces
the single-process run exactly; per-trial results are merged in index order
before any statistic is taken.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .correction import check_annihilation
from .distributed import run_staged, run_synchronous
from .graph import DecodingGraph, GraphConfig, build_decoding_graph, logical_cut_mask
from .noise import (ErrorPattern, Syndrome, sample_errors, sample_weighted_probabilities,
                    syndrome_from_errors)
from .serial import decode_serial

MODES = ("serial", "staged", "sync", "verify")
PERCENTILES = {"p50": 50, "p90": 90, "p99": 99, "p999": 99.9, "p9999": 99.99}
CSV_COLUMNS = ("d", "rounds", "p", "mode", "trials", "mean_cycles", "p50", "p90", "p99",
               "p999", "p9999", "ns_per_round", "logical_rate", "mismatches")


class InvariantViolation(RuntimeError):
    """A trial failed annihilation or the decoders disagreed."""

    def __init__(self, message: str, seed: int, trial: int):
        super().__init__(f"{message} (seed={seed}, trial={trial})")
        self.seed = seed
        self.trial = trial


class ReplayError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    d: int
    rounds: Optional[int] = None
    p: float = 0.001
    trials: int = 10_000
    seed: int = 0
    mode: str = "sync"
    weighted: bool = False
    mean: float = 0.001
    stddev: float = 0.0005
    w_max: int = 2
    clock_ns: float = 10.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        if self.rounds is None:
            object.__setattr__(self, "rounds", self.d)
        self.graph_config()  # validates d / rounds / w_max

    def graph_config(self) -> GraphConfig:
        return GraphConfig(self.d, self.rounds, weighted=self.weighted, w_max=self.w_max)


def experiment_graph(config: ExperimentConfig) -> tuple[DecodingGraph, Union[float, np.ndarray]]:
    """Decoding graph and the error probability (scalar or per edge) of an experiment."""
    gc = config.graph_config()
    if not config.weighted:
        return build_decoding_graph(gc), config.p
    base = build_decoding_graph(gc)
    probs = sample_weighted_probabilities(base, config.mean, config.stddev, config.seed)
    return build_decoding_graph(gc, probs), probs


def schedule_seed(seed: int, trial: int) -> int:
    return (int(seed) * 0x9E3779B1 + int(trial) + 1) % (1 << 63)


@dataclass
class TrialRecord:
    trial: int
    defects: list
    flipped: list
    growth_iterations: int
    cycles: Optional[int]
    logical_failure: bool
    mismatch: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def decode(graph: DecodingGraph, syndrome: Syndrome, mode: str, trial_seed: int = 0, trace=None):
    if mode == "serial":
        return decode_serial(graph, syndrome)
    if mode == "staged":
        return run_staged(graph, syndrome, trial_seed)
    if mode == "sync":
        return run_synchronous(graph, syndrome, trace=trace)
    raise ValueError(f"unknown decode mode {mode!r}")


def verify_shot(graph: DecodingGraph, syndrome: Syndrome, trial_seed: int = 0):
    """Decode with all three decoders; returns (sync result, list of disagreements)."""
    a = decode_serial(graph, syndrome)
    b = run_staged(graph, syndrome, trial_seed)
    c = run_synchronous(graph, syndrome)
    problems = []
    ref = a.partition(graph.n_real)
    for name, r in (("staged", b), ("sync", c)):
        if not np.array_equal(ref, r.partition(graph.n_real)):
            problems.append(f"{name} partition differs from serial")
        if r.growth_iterations != a.growth_iterations:
            problems.append(f"{name} growth iterations {r.growth_iterations} != "
                            f"serial {a.growth_iterations}")
    for name, r in (("serial", a), ("staged", b), ("sync", c)):
        if syndrome.errors is not None and not check_annihilation(
                graph, syndrome.errors.flipped, r.correction):
            problems.append(f"{name} correction does not annihilate")
    return c, problems


def _run_block(config: ExperimentConfig, start: int, stop: int, keep_shots: bool,
               strict: bool) -> list[TrialRecord]:
    graph, p = experiment_graph(config)
    cut = logical_cut_mask(graph)
    out = []
    for t in range(start, stop):
        errors = sample_errors(graph, p, config.seed, t)
        syndrome = syndrome_from_errors(graph, errors)
        mismatch = False
        if config.mode == "verify":
            result, problems = verify_shot(graph, syndrome, schedule_seed(config.seed, t))
            mismatch = bool(problems)
            if mismatch and strict:
                raise InvariantViolation("; ".join(problems), config.seed, t)
        else:
            result = decode(graph, syndrome, config.mode, schedule_seed(config.seed, t))
        residual = np.zeros(graph.n_edges, dtype=bool)
        residual[errors.flipped] = True
        residual[result.correction] ^= True
        if not check_annihilation(graph, errors.flipped, result.correction):
            raise InvariantViolation("correction does not annihilate the syndrome",
                                     config.seed, t)
        out.append(TrialRecord(
            trial=t,
            defects=syndrome.defects.tolist() if keep_shots else [],
            flipped=errors.flipped.tolist() if keep_shots else [],
            growth_iterations=result.growth_iterations,
            cycles=getattr(result, "cycles", None),
            logical_failure=bool(np.count_nonzero(residual & cut) & 1),
            mismatch=mismatch,
        ))
    return out


@dataclass
class TrialStats:
    """Aggregate of an experiment, recomputable from its per-trial records."""

    config: ExperimentConfig
    trials: int
    growth_iterations: np.ndarray = field(repr=False)
    cycles: Optional[np.ndarray] = field(repr=False)
    logical_failures: int
    mismatches: int

    @classmethod
    def from_records(cls, config: ExperimentConfig, records: Sequence[TrialRecord]) -> "TrialStats":
        iters = np.array([r.growth_iterations for r in records], dtype=np.int64)
        cyc = [r.cycles for r in records]
        cycles = None if any(c is None for c in cyc) else np.array(cyc, dtype=np.int64)
        return cls(config=config, trials=len(records), growth_iterations=iters, cycles=cycles,
                   logical_failures=sum(r.logical_failure for r in records),
                   mismatches=sum(r.mismatch for r in records))

    @property
    def mean_cycles(self) -> float:
        return float(self.cycles.mean()) if self.cycles is not None else math.nan

    @property
    def ns_per_round(self) -> float:
        return self.mean_cycles * self.config.clock_ns / self.config.rounds

    @property
    def logical_rate(self) -> float:
        return self.logical_failures / self.trials

    def percentiles(self) -> dict:
        if self.cycles is None:
            return {k: math.nan for k in PERCENTILES}
        vals = np.percentile(self.cycles, list(PERCENTILES.values()), method="inverted_cdf")
        return {k: float(v) for k, v in zip(PERCENTILES, vals)}

    def cycle_histogram(self) -> dict:
        if self.cycles is None:
            return {}
        vals, counts = np.unique(self.cycles, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    def iteration_histogram(self) -> dict:
        vals, counts = np.unique(self.growth_iterations, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    def fraction_iterations_at_most(self, k: int) -> float:
        return float(np.mean(self.growth_iterations <= k))

    def row(self) -> dict:
        c = self.config
        row = {"d": c.d, "rounds": c.rounds, "p": c.mean if c.weighted else c.p, "mode": c.mode,
               "trials": self.trials, "mean_cycles": self.mean_cycles}
        row.update(self.percentiles())
        row.update(ns_per_round=self.ns_per_round, logical_rate=self.logical_rate,
                   mismatches=self.mismatches)
        return row

    def to_dict(self) -> dict:
        out = self.row()
        out.update(weighted=self.config.weighted, w_max=self.config.w_max,
                   stddev=self.config.stddev if self.config.weighted else None,
                   seed=self.config.seed, clock_ns=self.config.clock_ns,
                   logical_failures=self.logical_failures,
                   mean_growth_iterations=float(self.growth_iterations.mean()),
                   growth_iteration_histogram={str(k): v for k, v in
                                               self.iteration_histogram().items()},
                   cycle_histogram={str(k): v for k, v in self.cycle_histogram().items()})
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()}


def run_trials(config: ExperimentConfig, workers: int = 1, keep_shots: bool = False,
               strict: bool = True) -> list[TrialRecord]:
    """Per-trial records in trial order.

    ``strict`` turns the first verify mismatch into :class:`InvariantViolation`;
    annihilation failures always raise.
    """
    if workers <= 1 or config.trials < 2 * workers:
        return _run_block(config, 0, config.trials, keep_shots, strict)
    bounds = np.linspace(0, config.trials, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_block, config, int(a), int(b), keep_shots, strict)
                   for a, b in zip(bounds[:-1], bounds[1:])]
        blocks = [f.result() for f in futures]
    return [r for block in blocks for r in block]


def run_experiment(config: ExperimentConfig, workers: int = 1, log: Optional[Union[str, Path]] = None,
                   strict: bool = True) -> TrialStats:
    """Run every trial of ``config`` and aggregate.

    ``log`` writes one JSON line per trial (defects, flipped edges, iterations,
    cycles, logical failure) from which the statistics can be recomputed.
    """
    records = run_trials(config, workers, keep_shots=log is not None, strict=strict)
    if log is not None:
        write_log(log, config, records)
    return TrialStats.from_records(config, records)


def write_log(path: Union[str, Path], config: ExperimentConfig, records: Iterable[TrialRecord]):
    path = Path(path)
    try:
        with path.open("w") as fh:
            for r in records:
                line = asdict(r)
                line.update(d=config.d, rounds=config.rounds)
                fh.write(json.dumps(line, separators=(",", ":")) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trial log {path}: {exc}") from exc


def stats_from_log(config: ExperimentConfig, path: Union[str, Path]) -> TrialStats:
    records = []
    for lineno, rec in read_records(path):
        records.append(TrialRecord(
            trial=rec["trial"], defects=rec.get("defects", []), flipped=rec.get("flipped", []),
            growth_iterations=rec["growth_iterations"], cycles=rec.get("cycles"),
            logical_failure=rec["logical_failure"], mismatch=rec.get("mismatch", False)))
    return TrialStats.from_records(config, records)


# ---------------------------------------------------------------------------
# sweeps and reports

def sweep(configs: Sequence[ExperimentConfig], out: Optional[Union[str, Path]] = None,
          fmt: str = "csv", workers: int = 1) -> list[TrialStats]:
    """Run each config and optionally write a CSV or JSON report."""
    if not configs:
        raise ValueError("sweep needs at least one config")
    stats = [run_experiment(c, workers=workers) for c in configs]
    if out is not None:
        text = format_report(stats, fmt)
        path = Path(out)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report {path}: {exc}") from exc
    return stats


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return repr(round(v, 10))
    return str(v)


def format_report(stats: Sequence[TrialStats], fmt: str = "csv") -> str:
    """Report text; columns and key order are fixed so output is byte-stable."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for s in stats:
            row = s.row()
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([s.to_dict() for s in stats], indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# replay

def read_records(path: Union[str, Path]):
    """Yield ``(line_number, record)`` from a JSON-lines syndrome file."""
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ReplayError(f"line {lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or "defects" not in rec:
                raise ReplayError(f"line {lineno}: record needs a 'defects' list")
            if not isinstance(rec["defects"], list) or not isinstance(rec.get("flipped", []), list):
                raise ReplayError(f"line {lineno}: 'defects' and 'flipped' must be lists")
            yield lineno, rec


@dataclass
class ReplayOutcome:
    trial: Optional[int]
    annihilated: bool
    logical_failure: Optional[bool]
    correction: list
    clusters: list
    growth_iterations: int
    cycles: Optional[int]

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def replay_record(graph: DecodingGraph, rec: dict, mode: str = "sync", trace=None,
                  lineno: int = 0) -> ReplayOutcome:
    """Decode one recorded shot.

    When the record carries its flipped edges the defects are checked
    against them, and the logical outcome is scored; otherwise only
    annihilation of the defect set is checked.
    """
    try:
        defects = np.asarray(rec["defects"], dtype=np.int64)
        flipped = rec.get("flipped")
        errors = ErrorPattern(flipped) if flipped is not None else None
        if errors is not None:
            derived = syndrome_from_errors(graph, errors)
            if not np.array_equal(derived.defects, np.unique(defects)):
                raise ReplayError(f"line {lineno}: defects do not match flipped edges")
        syndrome = Syndrome(defects, errors)
        syndrome.mask(graph)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ReplayError):
            raise
        raise ReplayError(f"line {lineno}: {exc}") from None
    trial = rec.get("trial")
    seed = schedule_seed(0, trial or 0)
    if mode == "verify":
        result, problems = verify_shot(graph, syndrome, seed)
        if problems:
            raise InvariantViolation("; ".join(problems), 0, trial or 0)
    else:
        result = decode(graph, syndrome, mode, seed, trace=trace)
    if errors is not None:
        residual = errors.flipped
        ok = check_annihilation(graph, residual, result.correction)
        logical = None
        if ok:
            res = np.zeros(graph.n_edges, dtype=bool)
            res[errors.flipped] = True
            res[result.correction] ^= True
            logical = bool(np.count_nonzero(res & logical_cut_mask(graph)) & 1)
    else:
        # correction alone must reproduce the defect set
        corrected = syndrome_from_errors(graph, ErrorPattern(result.correction))
        ok = np.array_equal(corrected.defects, syndrome.defects)
        logical = None
    clusters = [sorted(c) for c in result.clusters(graph.n_real) if len(c) > 1]
    return ReplayOutcome(trial=trial, annihilated=bool(ok), logical_failure=logical,
                         correction=result.correction.tolist(), clusters=clusters,
                         growth_iterations=result.growth_iterations,
                         cycles=getattr(result, "cycles", None))


def replay(path: Union[str, Path], graph: Optional[DecodingGraph] = None, mode: str = "sync",
           trace=None) -> list[ReplayOutcome]:
    """Replay every record of a JSON-lines file.

    Without ``graph`` the unweighted graph is rebuilt from each record's
    ``d`` and ``rounds`` fields.
    """
    out = []
    for lineno, rec in read_records(path):
        g = graph
        if g is None:
            if "d" not in rec:
                raise ReplayError(f"line {lineno}: no graph given and record has no 'd'")
            try:
                g = build_decoding_graph(GraphConfig(rec["d"], rec.get("rounds")))
            except (TypeError, ValueError) as exc:
                raise ReplayError(f"line {lineno}: {exc}") from None
        out.append(replay_record(g, rec, mode, trace=trace, lineno=lineno))
    return out
