import json

import numpy as np
import pytest

from dufsim import (ErrorPattern, ExperimentConfig, GraphConfig, build_decoding_graph,
                    format_report, replay, run_experiment, sweep, syndrome_from_errors)
from dufsim.harness import (CSV_COLUMNS, InvariantViolation, ReplayError, TrialStats,
                            read_records, run_trials, stats_from_log, verify_shot)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(d=3, trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(d=4)
    with pytest.raises(ValueError):
        ExperimentConfig(d=3, mode="fast")
    assert ExperimentConfig(d=7).rounds == 7


def test_zero_noise():
    for mode in ("serial", "staged", "sync", "verify"):
        s = run_experiment(ExperimentConfig(d=5, p=0.0, trials=20, mode=mode))
        assert (s.growth_iterations == 0).all()
        assert s.logical_failures == 0 and s.mismatches == 0
    s = run_experiment(ExperimentConfig(d=9, p=0.0, trials=20))
    assert set(s.cycles.tolist()) == {4}


def test_workers_do_not_change_results():
    cfg = ExperimentConfig(d=5, p=0.01, trials=60, seed=3, mode="verify")
    one = run_trials(cfg, workers=1)
    two = run_trials(cfg, workers=2)
    assert [r.to_json() for r in one] == [r.to_json() for r in two]
    a = format_report([TrialStats.from_records(cfg, one)], "json")
    b = format_report([TrialStats.from_records(cfg, two)], "json")
    assert a == b


def test_report_schema_and_stability(tmp_path):
    cfgs = [ExperimentConfig(d=d, p=0.01, trials=50, seed=1) for d in (3, 5)]
    out = tmp_path / "r.csv"
    stats = sweep(cfgs, out=out)
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert len(text.splitlines()) == 3
    assert format_report(sweep(cfgs), "csv") == text
    doc = json.loads(format_report(stats, "json"))
    assert doc[0]["d"] == 3 and "cycle_histogram" in doc[0]
    with pytest.raises(ValueError):
        format_report(stats, "xml")
    with pytest.raises(ValueError):
        sweep([])


def test_report_write_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "r.csv"
    with pytest.raises(OSError, match="missing"):
        sweep([ExperimentConfig(d=3, trials=5)], out=bad)


def test_percentiles_monotone():
    s = run_experiment(ExperimentConfig(d=7, p=0.005, trials=400))
    vals = list(s.percentiles().values())
    assert vals == sorted(vals)
    assert vals[0] <= s.cycles.max()
    assert s.ns_per_round == pytest.approx(s.mean_cycles * 10.0 / 7)
    assert sum(s.iteration_histogram().values()) == 400


def test_serial_mode_has_no_cycles():
    s = run_experiment(ExperimentConfig(d=3, p=0.01, trials=10, mode="serial"))
    assert s.cycles is None
    row = format_report([s]).splitlines()[1].split(",")
    assert row[CSV_COLUMNS.index("mean_cycles")] == ""


def test_log_recomputes_stats(tmp_path):
    cfg = ExperimentConfig(d=5, p=0.02, trials=80, seed=9)
    log = tmp_path / "log.jsonl"
    s = run_experiment(cfg, log=log)
    again = stats_from_log(cfg, log)
    assert format_report([s], "json") == format_report([again], "json")


def test_replay_reproduces_trials(tmp_path):
    cfg = ExperimentConfig(d=5, p=0.02, trials=40, seed=2)
    log = tmp_path / "log.jsonl"
    run_experiment(cfg, log=log)
    recs = [rec for _, rec in read_records(log)]
    outs = replay(log)
    assert all(o.annihilated for o in outs)
    assert [o.cycles for o in outs] == [r["cycles"] for r in recs]
    assert [o.logical_failure for o in outs] == [r["logical_failure"] for r in recs]
    serial = replay(log, mode="serial")
    assert [o.clusters for o in serial] == [o.clusters for o in outs]
    assert [o.correction for o in replay(log)] == [o.correction for o in outs]


def test_replay_errors_carry_line_numbers(tmp_path):
    f = tmp_path / "bad.jsonl"
    f.write_text('{"d": 3, "defects": [1, 2]}\n{not json}\n')
    with pytest.raises(ReplayError, match="line 2"):
        replay(f)
    f.write_text('{"d": 3, "defects": [1, 2]}\n\n{"d": 3}\n')
    with pytest.raises(ReplayError, match="line 3"):
        replay(f)
    f.write_text('{"d": 3, "defects": [99]}\n')
    with pytest.raises(ReplayError, match="line 1"):
        replay(f)
    f.write_text('{"d": 3, "rounds": 1, "defects": [1], "flipped": [1]}\n')
    with pytest.raises(ReplayError, match="line 1"):
        replay(f)
    f.write_text('{"defects": [1]}\n')
    with pytest.raises(ReplayError, match="line 1"):
        replay(f)


def test_replay_space_time_scenario(tmp_path):
    # isolated error, measurement error pair, two-edge chain and a
    # space-time chain, all far enough apart to stay separate
    g = build_decoding_graph(GraphConfig(5, 5))
    eb = g.edge_between
    flipped = [eb(1, 3), eb(10, 22), eb(37, 40), eb(40, 38), eb(23, 21), eb(21, 33)]
    s = syndrome_from_errors(g, ErrorPattern(flipped))
    f = tmp_path / "scenario.jsonl"
    f.write_text(json.dumps({"d": 5, "rounds": 5, "defects": s.defects.tolist(),
                             "flipped": flipped}) + "\n")
    for mode in ("serial", "staged", "sync", "verify"):
        (out,) = replay(f, mode=mode)
        assert out.annihilated
        holding = [c for c in out.clusters if set(c) & set(s.defects.tolist())]
        assert len(holding) == 4
        assert {1, 3} in [set(c) for c in holding]
        assert {10, 22} in [set(c) for c in holding]


def test_replay_defects_only(tmp_path):
    f = tmp_path / "d.jsonl"
    f.write_text('{"d": 5, "rounds": 2, "defects": [3, 4]}\n')
    (out,) = replay(f)
    assert out.annihilated and out.logical_failure is None


def test_verify_shot_reports_agreement(graphs):
    g = graphs(5, 5)
    s = syndrome_from_errors(g, ErrorPattern([3, 30, 31, 90]))
    _, problems = verify_shot(g, s, 7)
    assert problems == []


def test_invariant_violation_carries_seed():
    exc = InvariantViolation("boom", 4, 17)
    assert exc.seed == 4 and exc.trial == 17 and "trial=17" in str(exc)


def test_weighted_experiment():
    s = run_experiment(ExperimentConfig(d=5, trials=50, weighted=True, w_max=8, mode="verify"))
    assert s.mismatches == 0
    assert s.row()["p"] == 0.001


def test_iteration_fraction():
    s = run_experiment(ExperimentConfig(d=7, p=0.001, trials=200))
    assert 0.0 <= s.fraction_iterations_at_most(2) <= 1.0
    assert s.fraction_iterations_at_most(10**6) == 1.0
    assert np.isclose(s.logical_rate, s.logical_failures / 200)
