"""Null-space tuning with hard thresholding and feedback, plus greedy baselines.

Every solver returns a :class:`SolveResult`.  Solvers never raise on
numerical breakdown inside the loop; they stop and report it through
``status`` with the last valid iterate as the estimate.
"""
import enum
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_system
from .linalg import NullSpaceTuner, SingularSystemError, restricted_ls, spectral_norm
from .schedules import Schedule, constant, linear
from .support import complement, top_k

__all__ = [
    "Status",
    "SolverConfig",
    "SolveResult",
    "CertificateRow",
    "feedback",
    "adpt_nst_ht_fb",
    "nst_ht_fb",
    "omp",
    "gomp",
    "iht",
    "htp",
    "ghtp",
    "convergence_certificate",
    "schedule_cap",
    "resolve_step",
]


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    SINGULAR_GRAM = "SingularGram"
    STALLED = "Stalled"
    TIME_LIMIT = "TimeLimit"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule shared by all solvers.

    ``epsilon`` is an absolute bound on ``||y - Au||_2``; ``max_iters`` is
    the iteration budget K.  ``time_limit`` (seconds) is checked once per
    iteration.
    """

    epsilon: float = 1e-10
    max_iters: int = 100
    record_history: bool = False
    time_limit: float | None = None

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        check_count(self.max_iters, "max_iters")


@dataclass
class SolveResult:
    estimate: np.ndarray
    iterations: int
    status: Status
    residual_history: list = field(default_factory=list)
    support_history: list = field(default_factory=list)
    iterate_history: list = field(default_factory=list)
    tuned_history: list = field(default_factory=list)
    ls_calls: int = 0
    ls_work: int = 0
    diverged: bool = False

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    @property
    def support(self):
        return np.flatnonzero(self.estimate)

    @property
    def residual(self):
        return self.residual_history[-1] if self.residual_history else math.nan


class _Run:
    """Bookkeeping shared by the solver loops."""

    def __init__(self, config, y):
        self.config = config
        self.deadline = (
            None if config.time_limit is None else time.perf_counter() + config.time_limit
        )
        self.residuals = []
        self.supports = []
        self.iterates = []
        self.tuned = []
        self.ls_calls = 0
        self.ls_work = 0
        self.ynorm = float(np.linalg.norm(y))

    def ls(self, A, T, b):
        self.ls_calls += 1
        self.ls_work += len(T) ** 3
        return restricted_ls(A, T, b)

    def record(self, u, T=None, x=None):
        if self.config.record_history:
            self.iterates.append(u.copy())
            if T is not None:
                self.supports.append(T.copy())
            if x is not None:
                self.tuned.append(x.copy())

    def out_of_time(self):
        return self.deadline is not None and time.perf_counter() > self.deadline

    def finish(self, u, iterations, status, diverged=False):
        return SolveResult(
            estimate=u,
            iterations=iterations,
            status=status,
            residual_history=self.residuals,
            support_history=self.supports,
            iterate_history=self.iterates,
            tuned_history=self.tuned,
            ls_calls=self.ls_calls,
            ls_work=self.ls_work,
            diverged=diverged,
        )


def _embed(n, T, values, dtype):
    u = np.zeros(n, dtype=dtype)
    u[T] = values
    return u


def schedule_cap(shape):
    """Largest admissible support size for an ``M x N`` operator: ``min(M-1, N)``.

    At ``|T| = M`` the restricted system is square, so any support fits
    the data exactly and the residual test stops on a spurious solution.
    """
    M, N = shape
    return max(1, min(M - 1, N))


def feedback(A, x, T):
    """Feed the tail ``A_{T^c} x_{T^c}`` back onto the support ``T``.

    Returns ``u`` with ``u_T = x_T + (A_T* A_T)^{-1} A_T* A_{T^c} x_{T^c}``
    and zeros elsewhere.  When ``Ax = y`` this equals the least-squares
    fit of ``y`` on the columns ``T``.
    """
    A = np.asarray(A)
    x = np.asarray(x)
    T = np.asarray(T, dtype=np.intp)
    Tc = complement(T, A.shape[1])
    tail = A[:, Tc] @ x[Tc]
    dtype = np.result_type(A, x)
    return _embed(A.shape[1], T, x[T] + restricted_ls(A, T, tail), dtype)


def adpt_nst_ht_fb(A, y, schedule, config=None, *, tuner=None, feedback_mode="ls"):
    """Adaptive null-space tuning with hard thresholding and f-feedback.

    Starting from ``u^0 = 0``, iteration ``k = 1, 2, ...`` performs

    1. ``x^k = u^{k-1} + A*(AA*)^{-1}(y - A u^{k-1})`` (feasible by construction),
    2. ``T_k`` = the ``f(k)`` largest-magnitude entries of ``x^k``,
    3. ``u^k`` = feedback of ``x^k`` onto ``T_k``,

    until ``||y - A u^k||_2 <= epsilon`` or ``k = max_iters``.

    Parameters
    ----------
    A : ndarray of shape (M, N)
        Full-row-rank measurement operator, real or complex.
    y : ndarray of shape (M,)
    schedule : Schedule
        Support-size rule; its cap is tightened to ``min(M-1, N)``.
    config : SolverConfig, optional
    tuner : NullSpaceTuner, optional
        Precomputed factorization of ``AA*`` to share across solves.
    feedback_mode : {"ls", "tail"}, default="ls"
        ``"ls"`` fits ``y`` on ``A_T`` directly, which equals the tail
        formula for feasible ``x^k``; ``"tail"`` evaluates the tail formula
        literally.

    Returns
    -------
    SolveResult
    """
    config = config or SolverConfig()
    A, y = check_system(A, y)
    if feedback_mode not in ("ls", "tail"):
        raise ValueError(f"feedback_mode must be 'ls' or 'tail', got {feedback_mode!r}")
    if not isinstance(schedule, Schedule):
        raise TypeError("schedule must be a Schedule")
    if tuner is None:
        tuner = NullSpaceTuner(A)
    elif tuner.shape != A.shape:
        raise ValueError(f"tuner built for shape {tuner.shape}, A has {A.shape}")
    M, N = A.shape
    sched = schedule.with_cap(schedule_cap(A.shape))
    dtype = A.dtype

    run = _Run(config, y)
    u = np.zeros(N, dtype=dtype)
    r = run.ynorm
    if r <= config.epsilon:
        run.residuals.append(r)
        return run.finish(u, 0, Status.CONVERGED)

    k = 0
    status = Status.MAX_ITERS
    while k < config.max_iters:
        if run.out_of_time():
            status = Status.TIME_LIMIT
            break
        k += 1
        x = tuner.tune(u, y)
        T = top_k(x, sched(k))
        try:
            if feedback_mode == "ls":
                coef = run.ls(A, T, y)
            else:
                Tc = complement(T, N)
                coef = x[T] + run.ls(A, T, A[:, Tc] @ x[Tc])
        except SingularSystemError:
            k -= 1
            status = Status.SINGULAR_GRAM
            break
        u = _embed(N, T, coef, dtype)
        r = float(np.linalg.norm(y - A @ u))
        run.residuals.append(r)
        run.record(u, T, x)
        if r <= config.epsilon:
            status = Status.CONVERGED
            break
    return run.finish(u, k, status)


def nst_ht_fb(A, y, s, config=None, **kwargs):
    """Null-space tuning with hard thresholding and feedback at a fixed sparsity ``s``."""
    return adpt_nst_ht_fb(A, y, constant(s), config, **kwargs)


def gomp(A, y, n_per_iter=1, max_support=None, config=None):
    """Generalized orthogonal matching pursuit.

    Each iteration adds the ``n_per_iter`` columns with the largest
    normalized correlation ``|<a_j, r>| / ||a_j||`` to the support and
    refits by least squares.  Stops at ``epsilon``, ``max_iters`` or when
    the support reaches ``max_support`` (default ``M``).
    """
    config = config or SolverConfig()
    A, y = check_system(A, y)
    M, N = A.shape
    P = check_count(n_per_iter, "n_per_iter", 1, N)
    if P > math.isqrt(M):
        warnings.warn(
            f"n_per_iter={P} exceeds floor(sqrt(M))={math.isqrt(M)}", RuntimeWarning, stacklevel=2
        )
    max_support = min(M, N) if max_support is None else check_count(max_support, "max_support", 1, N)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ValueError("A has a zero column")

    run = _Run(config, y)
    u = np.zeros(N, dtype=A.dtype)
    residual = y.copy()
    r = run.ynorm
    if r <= config.epsilon:
        run.residuals.append(r)
        return run.finish(u, 0, Status.CONVERGED)
    selected = np.zeros(N, dtype=bool)
    k = 0
    status = Status.MAX_ITERS
    while k < config.max_iters:
        if run.out_of_time():
            status = Status.TIME_LIMIT
            break
        corr = np.abs(A.conj().T @ residual) / norms
        free = np.flatnonzero(~selected)
        room = max_support - int(selected.sum())
        new = free[top_k(corr[free], min(P, room))]
        selected[new] = True
        T = np.flatnonzero(selected)
        try:
            coef = run.ls(A, T, y)
        except SingularSystemError:
            status = Status.SINGULAR_GRAM
            break
        k += 1
        u = _embed(N, T, coef, A.dtype)
        residual = y - A @ u
        r = float(np.linalg.norm(residual))
        run.residuals.append(r)
        run.record(u, T)
        if r <= config.epsilon:
            status = Status.CONVERGED
            break
        if T.size >= max_support:
            break
    return run.finish(u, k, status)


def omp(A, y, max_support=None, config=None):
    """Orthogonal matching pursuit: :func:`gomp` with one index per iteration."""
    return gomp(A, y, 1, max_support, config)


def resolve_step(step, A):
    """Gradient step: a positive number, or ``"auto"`` for ``1 / ||A||_2^2``."""
    if isinstance(step, str):
        if step != "auto":
            raise ValueError(f"step must be a number or 'auto', got {step!r}")
        return 1.0 / spectral_norm(A) ** 2
    return float(step)


def iht(A, y, s, step=1.0, config=None):
    """Iterative hard thresholding ``x <- H_s(x + step * A*(y - Ax))`` from ``x = 0``.

    The returned estimate is the iterate with the smallest residual seen.
    A residual above ``1e6 * ||y||`` is treated as divergence: the loop
    stops with status ``MaxIters`` and ``diverged=True``.
    """
    config = config or SolverConfig()
    A, y = check_system(A, y)
    M, N = A.shape
    s = check_count(s, "s", 1, N)
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    run = _Run(config, y)
    x = np.zeros(N, dtype=A.dtype)
    best, best_r = x, run.ynorm
    if best_r <= config.epsilon:
        run.residuals.append(best_r)
        return run.finish(x, 0, Status.CONVERGED)
    AH = A.conj().T
    k = 0
    status = Status.MAX_ITERS
    diverged = False
    while k < config.max_iters:
        if run.out_of_time():
            status = Status.TIME_LIMIT
            break
        k += 1
        g = x + step * (AH @ (y - A @ x))
        T = top_k(g, s)
        x = _embed(N, T, g[T], A.dtype)
        r = float(np.linalg.norm(y - A @ x))
        run.residuals.append(r)
        run.record(x, T)
        if r < best_r:
            best, best_r = x, r
        if r <= config.epsilon:
            status = Status.CONVERGED
            break
        if not np.isfinite(r) or r > 1e6 * run.ynorm:
            diverged = True
            break
    return run.finish(best, k, status, diverged=diverged)


def _pursuit(A, y, schedule, step, config, stop_on_repeat):
    A, y = check_system(A, y)
    M, N = A.shape
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    run = _Run(config, y)
    u = np.zeros(N, dtype=A.dtype)
    r = run.ynorm
    if r <= config.epsilon:
        run.residuals.append(r)
        return run.finish(u, 0, Status.CONVERGED)
    AH = A.conj().T
    prev = None
    k = 0
    status = Status.MAX_ITERS
    while k < config.max_iters:
        if run.out_of_time():
            status = Status.TIME_LIMIT
            break
        size = schedule(k + 1)
        T = top_k(u + step * (AH @ (y - A @ u)), size)
        if stop_on_repeat and prev is not None and np.array_equal(T, prev):
            status = Status.STALLED
            break
        try:
            coef = run.ls(A, T, y)
        except SingularSystemError:
            status = Status.SINGULAR_GRAM
            break
        k += 1
        u = _embed(N, T, coef, A.dtype)
        r = float(np.linalg.norm(y - A @ u))
        run.residuals.append(r)
        run.record(u, T)
        prev = T
        if r <= config.epsilon:
            status = Status.CONVERGED
            break
    return run.finish(u, k, status)


def htp(A, y, s, step=1.0, config=None):
    """Hard thresholding pursuit.

    Support = the ``s`` largest entries of the gradient step
    ``u + step * A*(y - Au)``, then a least-squares fit on that support.
    Stops with ``Stalled`` once the support repeats without meeting
    ``epsilon``.
    """
    config = config or SolverConfig()
    M, N = np.shape(A)
    s = check_count(s, "s", 1, min(M, N))
    return _pursuit(A, y, constant(s), step, config, stop_on_repeat=True)


def ghtp(A, y, schedule=None, step=1.0, config=None):
    """Graded hard thresholding pursuit: as :func:`htp` with support size ``f(k)``.

    The default schedule is ``f(k) = k``; pass :func:`~nstfb.schedules.quadratic`
    for the k^2 grading.  The schedule is capped at ``min(M-1, N)``.
    """
    config = config or SolverConfig()
    schedule = (schedule or linear(1)).with_cap(schedule_cap(np.shape(A)))
    return _pursuit(A, y, schedule, step, config, stop_on_repeat=False)


@dataclass(frozen=True)
class CertificateRow:
    k: int
    support_size: int
    delta: float
    gamma: float
    theta: float
    delta_f: float
    rho: float
    noise_gain: float
    holds: bool
    margin: float


def convergence_certificate(A, s, schedule, k_max, budget=None):
    """Per-iteration contraction certificate from exact restricted isometry constants.

    For each ``k`` this evaluates ``delta = delta_{s+f(k)}``,
    ``gamma = gamma_{s+f(k-1)+f(k)}`` and ``theta = theta_{s+f(k)}`` (with
    ``f(0) = 0``, orders clipped to ``N``), the error contraction factor
    ``rho = sqrt(2 gamma^2 / (1 - delta^2))`` and the noise gain
    ``sqrt(1 + delta_{f(k)})/(1 - delta) + sqrt(2(1 + theta))/sqrt(1 - delta^2)``.
    The row holds when ``2 gamma^2 + delta^2 < 1``.

    Raises
    ------
    nstfb.rip.EnumerationBudgetError
        If any required order needs more supports than ``budget``.
    """
    from . import rip

    A = np.asarray(A)
    M, N = A.shape
    s = check_count(s, "s", 1, N)
    k_max = check_count(k_max, "k_max")
    sched = schedule.with_cap(schedule_cap(A.shape))
    budget = rip.default_budget() if budget is None else budget

    sizes = [0] + [sched(k) for k in range(1, k_max + 1)]
    needed = set()
    for k in range(1, k_max + 1):
        needed.add(min(s + sizes[k], N))
        needed.add(min(s + sizes[k - 1] + sizes[k], N))
        needed.add(min(sizes[k], N))
    worst = max(needed, key=lambda t: math.comb(N, t))
    if math.comb(N, worst) > budget:
        raise rip.EnumerationBudgetError(
            f"exact infeasible: order {worst} needs C({N},{worst}) = "
            f"{math.comb(N, worst)} supports > budget {budget}; use Monte-Carlo"
        )

    analyzer = rip.RipAnalyzer(A)
    cache = {}

    def const(which, t):
        key = (which, min(t, N))
        if key not in cache:
            cache[key] = analyzer.exact(key[1], which, budget=budget).value
        return cache[key]

    rows = []
    for k in range(1, k_max + 1):
        fk, fk1 = sizes[k], sizes[k - 1]
        delta = const("delta", s + fk)
        gamma = const("gamma", s + fk1 + fk)
        theta = const("theta", s + fk)
        delta_f = const("delta", fk)
        holds, margin = rip.check_theorem_condition(delta, gamma)
        if delta < 1.0:
            rho = math.sqrt(2.0 * gamma**2 / (1.0 - delta**2))
            gain = math.sqrt(1.0 + delta_f) / (1.0 - delta) + math.sqrt(
                2.0 * (1.0 + theta)
            ) / math.sqrt(1.0 - delta**2)
        else:
            rho = gain = math.inf
        rows.append(
            CertificateRow(k, fk, delta, gamma, theta, delta_f, rho, gain, holds, margin)
        )
    return rows
