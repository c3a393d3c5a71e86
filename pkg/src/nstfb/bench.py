"""Success-frequency / NMSE sweeps over seeded random instances.

A sweep runs every configured algorithm on the same instance for each
trial key ``(base_seed, s, trial)``.  The matrix and signal depend only
on that key; the noise direction is also fixed per key and scaled by
each ``sigma`` in the sweep.
"""
import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .linalg import NullSpaceTuner
from .problems import (
    PRNG_VERSION,
    Ensemble,
    add_noise,
    gen_gaussian_matrix,
    gen_sparse_signal,
    relative_error,
    superres_instance,
    superres_operator,
)
from .schedules import parse_schedule, quadratic
from .solvers import (
    SolverConfig,
    adpt_nst_ht_fb,
    ghtp,
    gomp,
    htp,
    iht,
    nst_ht_fb,
    omp,
    resolve_step,
)

__all__ = [
    "CONFIG_SCHEMA_VERSION",
    "CSV_HEADER",
    "AlgorithmSpec",
    "ExperimentConfig",
    "TrialRecord",
    "SummaryRow",
    "load_config",
    "run_experiment",
    "nmse",
    "summarize",
    "write_csv",
    "read_csv",
    "write_manifest",
    "is_monotone",
    "default_jobs",
    "trial_seed",
    "SuperresRecord",
    "run_superres",
    "ALGORITHMS",
    "EXTERNAL_ALGORITHMS",
]

CONFIG_SCHEMA_VERSION = 1
CSV_HEADER = ["algorithm", "s", "sigma", "success_freq", "mean_time_ms", "nmse", "trials"]
ALGORITHMS = ("adpt", "nst", "omp", "gomp", "iht", "htp", "ghtp")
# Names kept for results produced elsewhere; they can appear in CSVs but are not run here.
EXTERNAL_ALGORITHMS = ("aiht", "cgiht")


@dataclass(frozen=True)
class AlgorithmSpec:
    """One solver entry of a sweep.

    ``params`` by algorithm: ``adpt``/``ghtp`` take ``schedule`` (string);
    ``nst``/``iht``/``htp`` take ``s`` (default: the cell's true sparsity);
    ``gomp`` takes ``P``; ``omp``/``gomp`` take ``max_support``;
    ``iht``/``htp``/``ghtp`` take ``step`` (number or ``"auto"`` for
    ``1 / ||A||_2^2``).
    """

    name: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        if self.name in EXTERNAL_ALGORITHMS:
            raise ValueError(
                f"{self.name} is an external baseline; merge its CSV rows instead of running it"
            )
        if self.name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.name!r}; expected one of {ALGORITHMS}")
        if "schedule" in self.params:
            parse_schedule(self.params["schedule"])

    @property
    def display(self):
        if self.label:
            return self.label
        if "schedule" in self.params:
            return f"{self.name}-{self.params['schedule']}"
        return self.name

    @classmethod
    def parse(cls, item):
        """Build from ``"adpt-quad"``-style shorthand or a mapping."""
        if isinstance(item, AlgorithmSpec):
            return item
        if isinstance(item, str):
            name, _, sched = item.partition("-")
            return cls(name, {"schedule": sched} if sched else {})
        item = dict(item)
        name = item.pop("name")
        label = item.pop("label", None)
        return cls(name, item, label)


@dataclass(frozen=True)
class ExperimentConfig:
    M: int = 100
    N: int = 200
    sparsity_grid: tuple = (20,)
    ensemble: str = "gaussian"
    algorithms: tuple = (AlgorithmSpec("adpt", {"schedule": "quad"}),)
    trials: int = 100
    success_threshold: float = 1e-4
    noise_sigmas: tuple = (0.0,)
    base_seed: int = 0
    time_limit_per_solve: float = 30.0
    epsilon: float = 1e-10
    max_iters: int = 200
    noise_epsilon_factor: float = 1.0
    matrix: str = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "sparsity_grid", tuple(int(s) for s in self.sparsity_grid))
        object.__setattr__(self, "noise_sigmas", tuple(float(s) for s in self.noise_sigmas))
        object.__setattr__(
            self, "algorithms", tuple(AlgorithmSpec.parse(a) for a in self.algorithms)
        )
        Ensemble(self.ensemble)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.success_threshold <= 0:
            raise ValueError("success_threshold must be > 0")
        grid = self.sparsity_grid
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sparsity_grid must be non-empty and strictly increasing")
        if grid[0] < 1 or grid[-1] > self.N:
            raise ValueError(f"sparsity values must lie in [1, N={self.N}]")
        if any(s < 0 for s in self.noise_sigmas):
            raise ValueError("noise_sigmas must be >= 0")
        if self.matrix not in ("gaussian", "identity"):
            raise ValueError("matrix must be 'gaussian' or 'identity'")
        if self.matrix == "identity" and self.M != self.N:
            raise ValueError("identity matrix requires M == N")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")

    def to_dict(self):
        d = asdict(self)
        d["algorithms"] = [
            {"name": a.name, **a.params, **({"label": a.label} if a.label else {})}
            for a in self.algorithms
        ]
        d["sparsity_grid"] = list(self.sparsity_grid)
        d["noise_sigmas"] = list(self.noise_sigmas)
        d["schema_version"] = CONFIG_SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        version = data.pop("schema_version", CONFIG_SCHEMA_VERSION)
        if version != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema_version {version}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def load_config(path):
    """Read an :class:`ExperimentConfig` from a JSON document."""
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class TrialRecord:
    algorithm: str
    s: int
    sigma: float
    trial_index: int
    seed: tuple
    success: bool
    rel_error: float
    iterations: int
    wall_time: float
    status: str
    ls_calls: int = 0
    ls_work: int = 0


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    s: int
    sigma: float
    success_freq: float
    mean_time_ms: float
    nmse: float
    trials: int


def _step(spec, A):
    return resolve_step(spec.params.get("step", 1.0), A)


def _solve(spec, A, y, s_true, config, tuner):
    p = spec.params
    name = spec.name
    if name == "adpt":
        return adpt_nst_ht_fb(A, y, parse_schedule(p.get("schedule", "quad")), config, tuner=tuner)
    if name == "nst":
        return nst_ht_fb(A, y, int(p.get("s", s_true)), config, tuner=tuner)
    if name == "omp":
        return omp(A, y, p.get("max_support"), config)
    if name == "gomp":
        return gomp(A, y, int(p.get("P", 1)), p.get("max_support"), config)
    if name == "iht":
        return iht(A, y, int(p.get("s", s_true)), _step(spec, A), config)
    if name == "htp":
        return htp(A, y, int(p.get("s", s_true)), _step(spec, A), config)
    sched = parse_schedule(p["schedule"]) if "schedule" in p else quadratic()
    return ghtp(A, y, sched, _step(spec, A), config)


def trial_seed(base_seed, s, trial):
    """Deterministic per-trial seed tuple shared by every algorithm."""
    return (int(base_seed), int(s), int(trial))


def _run_trial_key(cfg, s, trial):
    seed = trial_seed(cfg.base_seed, s, trial)
    a_seed, x_seed, e_seed = np.random.SeedSequence(seed).spawn(3)
    if cfg.matrix == "identity":
        A = np.eye(cfg.M)
    else:
        A = gen_gaussian_matrix(cfg.M, cfg.N, a_seed)
    x = gen_sparse_signal(cfg.N, s, cfg.ensemble, x_seed)
    clean = A @ x
    tuner = NullSpaceTuner(A)
    records = []
    for sigma in cfg.noise_sigmas:
        y = add_noise(clean, sigma, e_seed)
        eps = max(cfg.epsilon, cfg.noise_epsilon_factor * sigma * math.sqrt(cfg.M))
        config = SolverConfig(eps, cfg.max_iters, False, cfg.time_limit_per_solve)
        for spec in cfg.algorithms:
            t0 = time.perf_counter()
            try:
                res = _solve(spec, A, y, s, config, tuner)
            except Exception as exc:  # a failing solve is recorded, never fatal
                wall = time.perf_counter() - t0
                records.append(
                    TrialRecord(spec.display, s, sigma, trial, seed, False, math.inf, 0, wall,
                                f"Error:{type(exc).__name__}")
                )
                continue
            wall = time.perf_counter() - t0
            err = relative_error(res.estimate, x)
            records.append(
                TrialRecord(spec.display, s, sigma, trial, seed, err <= cfg.success_threshold,
                            err, res.iterations, wall, str(res.status), res.ls_calls, res.ls_work)
            )
    return records


def _run_chunk(args):
    cfg, keys = args
    out = []
    for s, trial in keys:
        out.extend(_run_trial_key(cfg, s, trial))
    return out


def run_experiment(cfg, jobs=1):
    """Run the sweep; one :class:`TrialRecord` per (algorithm, s, sigma, trial).

    Records are sorted by (algorithm order in the config, s, sigma, trial)
    regardless of ``jobs``.
    """
    keys = [(s, t) for s in cfg.sparsity_grid for t in range(cfg.trials)]
    jobs = max(1, int(jobs))
    if jobs == 1 or len(keys) == 1:
        records = _run_chunk((cfg, keys))
    else:
        chunks = [keys[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(jobs) as pool:
            records = [r for part in pool.map(_run_chunk, [(cfg, c) for c in chunks]) for r in part]
    order = {spec.display: i for i, spec in enumerate(cfg.algorithms)}
    records.sort(key=lambda r: (order[r.algorithm], r.s, r.sigma, r.trial_index))
    return records


def nmse(records):
    """Mean of squared relative errors over a non-empty group of records."""
    records = list(records)
    if not records:
        raise ValueError("nmse of an empty group")
    return float(sum(r.rel_error**2 for r in records) / len(records))


def summarize(records):
    """Collapse records into one :class:`SummaryRow` per (algorithm, s, sigma)."""
    cells = {}
    for r in records:
        cells.setdefault((r.algorithm, r.s, r.sigma), []).append(r)
    rows = []
    for (alg, s, sigma), group in cells.items():
        n = len(group)
        rows.append(
            SummaryRow(
                algorithm=alg,
                s=s,
                sigma=sigma,
                success_freq=sum(r.success for r in group) / n,
                mean_time_ms=1e3 * sum(r.wall_time for r in group) / n,
                nmse=nmse(group),
                trials=n,
            )
        )
    return rows


def _fmt(v):
    return format(v, ".17g")


def write_csv(rows, path):
    """Write summary rows under the fixed header, floats at 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.algorithm, r.s, _fmt(r.sigma), _fmt(r.success_freq),
                        _fmt(r.mean_time_ms), _fmt(r.nmse), r.trials])


def read_csv(path):
    """Parse a summary CSV (ours or merged third-party rows) into SummaryRows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            SummaryRow(a, int(s), float(sig), float(f), float(t), float(e), int(n))
            for a, s, sig, f, t, e, n in reader
        ]


def write_manifest(cfg, path):
    """JSON sidecar: PRNG version, config hash, library version, and the config."""
    doc = {
        "prng": PRNG_VERSION,
        "config_sha256": cfg.digest(),
        "library_version": __version__,
        "config": cfg.to_dict(),
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")
    return doc


def is_monotone(values, increasing=False, slack=1):
    """Trend test allowing local wiggles.

    With ``slack=1`` every pair of cells at least two positions apart must
    be ordered (non-increasing by default); adjacent cells may disagree.
    """
    v = list(values)
    for i in range(len(v)):
        for j in range(i + slack + 1, len(v)):
            bad = v[j] < v[i] if increasing else v[j] > v[i]
            if bad:
                return False
    return True


def default_jobs():
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SuperresRecord:
    seed: int
    locations_ok: bool
    amp_rel_error: float
    iterations: int
    status: str
    true_locations: tuple
    found_locations: tuple


def run_superres(J, M, N_grid, seeds, schedule=None, config=None, amp_tol=1e-6):
    """Recover on-grid spikes from low-frequency Fourier samples, one record per seed.

    Locations count as recovered when the estimate's support (entries above
    ``amp_tol`` times the largest magnitude) equals the true grid support.
    """
    schedule = schedule or quadratic()
    config = config or SolverConfig(epsilon=1e-10, max_iters=100)
    tuner = NullSpaceTuner(superres_operator(M, N_grid))
    out = []
    for seed in seeds:
        inst = superres_instance(J, M, N_grid, seed)
        res = adpt_nst_ht_fb(inst.A, inst.y, schedule, config, tuner=tuner)
        u = res.estimate
        mags = np.abs(u)
        found = np.flatnonzero(mags > amp_tol * mags.max()) if mags.max() > 0 else np.array([], int)
        true = inst.support
        err = relative_error(u, inst.x_true)
        out.append(SuperresRecord(int(seed), bool(np.array_equal(found, true)), err,
                                  res.iterations, str(res.status),
                                  tuple(true.tolist()), tuple(found.tolist())))
    return out
