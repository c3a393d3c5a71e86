import dataclasses
import json

import numpy as np
import pytest

from nstfb import bench
from nstfb.bench import (
    CSV_HEADER,
    AlgorithmSpec,
    ExperimentConfig,
    SummaryRow,
    TrialRecord,
    is_monotone,
    nmse,
    read_csv,
    run_experiment,
    run_superres,
    summarize,
    write_csv,
    write_manifest,
)
from nstfb.problems import PRNG_VERSION


def _record(rel_error, s=5, alg="adpt-quad", trial=0):
    return TrialRecord(alg, s, 0.0, trial, (0, s, trial), rel_error <= 1e-4, rel_error, 3, 0.001,
                       "Converged")


def _strip_time(records):
    return [dataclasses.replace(r, wall_time=0.0) for r in records]


def test_identity_cell():
    cfg = ExperimentConfig(M=10, N=10, sparsity_grid=(1,), trials=1, matrix="identity")
    (row,) = summarize(run_experiment(cfg))
    assert row.success_freq == 1.0 and row.trials == 1


def test_deterministic_across_runs_and_jobs():
    cfg = ExperimentConfig(M=20, N=40, sparsity_grid=(2, 6), trials=4,
                           algorithms=("adpt-quad", "omp", {"name": "iht", "step": "auto"}),
                           noise_sigmas=(0.0, 0.05))
    a = run_experiment(cfg, jobs=1)
    b = run_experiment(cfg, jobs=1)
    c = run_experiment(cfg, jobs=3)
    assert _strip_time(a) == _strip_time(b) == _strip_time(c)
    assert len(a) == 3 * 2 * 2 * 4


def test_instance_sharing(monkeypatch):
    seen = {}
    real = bench._solve

    def spy(spec, A, y, s_true, config, tuner):
        key = (s_true, y.tobytes())
        seen.setdefault(key, set()).add((spec.display, A.tobytes()))
        return real(spec, A, y, s_true, config, tuner)

    monkeypatch.setattr(bench, "_solve", spy)
    cfg = ExperimentConfig(M=12, N=24, sparsity_grid=(3,), trials=3,
                           algorithms=("adpt-quad", "nst", "omp", "gomp", "htp", "ghtp", "iht"))
    run_experiment(cfg)
    assert len(seen) == 3
    for calls in seen.values():
        assert len({alg for alg, _ in calls}) == 7
        assert len({A for _, A in calls}) == 1


def test_success_frequency_trend():
    cfg = ExperimentConfig(M=40, N=80, sparsity_grid=(2, 6, 10, 14, 18, 22), trials=12)
    freqs = [r.success_freq for r in summarize(run_experiment(cfg))]
    assert freqs[0] == 1.0
    assert is_monotone(freqs)


def test_quadratic_needs_no_more_iterations_than_linear():
    cfg = ExperimentConfig(M=50, N=100, sparsity_grid=(8,), trials=10,
                           algorithms=("adpt-quad", "adpt-lin:1"))
    recs = run_experiment(cfg)
    quad = {r.trial_index: r.iterations for r in recs if r.algorithm == "adpt-quad"}
    lin = {r.trial_index: r.iterations for r in recs if r.algorithm == "adpt-lin:1"}
    assert np.median(list(quad.values())) <= np.median(list(lin.values()))


def test_solver_errors_are_recorded(monkeypatch):
    def boom(*args, **kwargs):
        raise FloatingPointError("bad")

    monkeypatch.setattr(bench, "adpt_nst_ht_fb", boom)
    cfg = ExperimentConfig(M=6, N=12, sparsity_grid=(1,), trials=1, algorithms=("adpt-quad", "omp"))
    recs = run_experiment(cfg)
    assert recs[0].status == "Error:FloatingPointError" and not recs[0].success
    assert recs[1].status == "Converged"


def test_nmse_examples():
    assert nmse([_record(0.0), _record(0.0, trial=1)]) == 0.0
    assert nmse([_record(0.3)]) == pytest.approx(0.09)
    assert nmse([_record(0.0), _record(0.2, trial=1)]) == pytest.approx(0.02)
    with pytest.raises(ValueError):
        nmse([])


def test_summarize_groups(tmp_path):
    recs = [_record(1e-12, trial=t) for t in range(500)]
    (row,) = summarize(recs)
    assert row.trials == 500 and row.success_freq == 1.0
    assert summarize([]) == []


def test_csv_round_trip(tmp_path):
    p = tmp_path / "empty.csv"
    write_csv([], p)
    assert p.read_text().strip() == ",".join(CSV_HEADER)
    rows = [SummaryRow("adpt-quad", 5, 0.02, 0.97, 1.2345678901234567, 1e-31, 100),
            SummaryRow("omp", 10, 0.0, 1 / 3, 0.1, 0.0, 7)]
    p = tmp_path / "rows.csv"
    write_csv(rows, p)
    assert read_csv(p) == rows


def test_read_csv_rejects_other_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)


def test_config_round_trip_and_validation(tmp_path):
    cfg = ExperimentConfig(M=30, N=60, sparsity_grid=(2, 4), algorithms=(
        "adpt-quad", {"name": "gomp", "P": 3, "label": "gomp3"}), noise_sigmas=(0.0, 0.1))
    d = cfg.to_dict()
    assert d["schema_version"] == bench.CONFIG_SCHEMA_VERSION
    again = ExperimentConfig.from_dict(json.loads(json.dumps(d)))
    assert again == cfg and again.digest() == cfg.digest()
    assert again.algorithms[1].display == "gomp3"
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(d))
    assert bench.load_config(p) == cfg
    bad = [dict(d, schema_version=2), dict(d, colour="red"), dict(d, sparsity_grid=[4, 2]),
           dict(d, trials=0), dict(d, algorithms=["aiht"]), dict(d, algorithms=["lasso"]),
           dict(d, algorithms=["adpt-cubic"]), dict(d, ensemble="cauchy"), dict(d, sparsity_grid=[99])]
    for b in bad:
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict(b)


def test_external_baselines_are_rejected():
    with pytest.raises(ValueError, match="merge its CSV rows"):
        AlgorithmSpec("cgiht")


def test_manifest(tmp_path):
    cfg = ExperimentConfig(trials=3)
    doc = write_manifest(cfg, tmp_path / "m.json")
    assert json.loads((tmp_path / "m.json").read_text()) == doc
    assert doc["prng"] == PRNG_VERSION and doc["config_sha256"] == cfg.digest()


def test_noise_aware_stopping():
    cfg = ExperimentConfig(M=40, N=80, sparsity_grid=(5,), trials=5, noise_sigmas=(0.0, 0.05))
    recs = run_experiment(cfg)
    noisy = [r for r in recs if r.sigma > 0]
    assert all(r.status == "Converged" for r in noisy)
    assert all(r.rel_error < 0.1 for r in noisy)


def test_is_monotone():
    assert is_monotone([1, 1, 0.9, 0.95, 0.5, 0])
    assert is_monotone([1, 0.5, 0.9, 0.2])
    assert not is_monotone([1, 0.5, 0.4, 0.9])
    assert is_monotone([0, 0, 1e-3, 2e-3, 1.9e-3, 5e-3], increasing=True)
    assert not is_monotone([1, 0.9, 0.95], slack=0)


def test_superres_pipeline():
    recs = run_superres(5, 40, 60, range(5))
    assert all(r.locations_ok for r in recs)
    assert all(r.amp_rel_error <= 1e-6 for r in recs)
