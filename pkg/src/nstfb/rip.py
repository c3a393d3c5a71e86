"""Restricted isometry constants by exhaustive enumeration or random sampling.

For a matrix ``B`` the order-``s`` constant is
``max_{|S| = s} ||B_S* B_S - I||_2``.  Three choices of ``B`` are exposed:

* ``delta``: ``B = A``
* ``gamma``: ``B = (AA*)^{-1/2} A``
* ``theta``: ``B = (AA*)^{-1} A``

Only supports of size exactly ``s`` are visited.  A Gram matrix over a
smaller support is a principal submatrix of one over a size-``s``
superset, so by Cauchy interlacing its eigenvalues lie inside the
superset's spectral range and the maximum over ``|S| <= s`` is reached at
``|S| = s``.
"""
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import check_count, check_matrix
from .linalg import precondition

__all__ = [
    "EnumerationBudgetError",
    "RipReport",
    "RipAnalyzer",
    "exact_constant",
    "mc_lower_bound",
    "check_theorem_condition",
    "check_legacy_condition",
    "default_budget",
    "unrank_combination",
]

DEFAULT_BUDGET = 2_000_000
BUDGET_ENV = "NSTFB_ENUM_BUDGET"
WHICH = ("delta", "gamma", "theta")
_CHUNK = 4096


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration would visit more supports than the budget allows."""


def default_budget():
    """Enumeration budget, overridable through ``NSTFB_ENUM_BUDGET``."""
    value = os.environ.get(BUDGET_ENV)
    return int(value) if value else DEFAULT_BUDGET


@dataclass(frozen=True)
class RipReport:
    order: int
    which: str
    value: float
    method: str
    supports_examined: int
    trials: int | None = None
    seed: int | None = None

    def as_row(self, matrix_id):
        return [matrix_id, self.order, self.which, repr(self.value), self.method, self.supports_examined]


def _objective(G, supports):
    """``||G_SS - I||_2`` for each row of ``supports`` (shape (n, s))."""
    sub = G[supports[:, :, None], supports[:, None, :]]
    w = np.linalg.eigvalsh(sub)
    return np.maximum(np.abs(w[:, 0] - 1.0), np.abs(w[:, -1] - 1.0))


def _max_over(G, combos):
    best = 0.0
    count = 0
    while True:
        chunk = list(itertools.islice(combos, _CHUNK))
        if not chunk:
            return best, count
        vals = _objective(G, np.asarray(chunk, dtype=np.intp))
        best = max(best, float(vals.max()))
        count += len(chunk)


def unrank_combination(rank, n, k):
    """The ``rank``-th ``k``-subset of ``range(n)`` in lexicographic order."""
    out = []
    x = 0
    for i in range(k, 0, -1):
        while True:
            c = math.comb(n - x - 1, i - 1)
            if rank < c:
                break
            rank -= c
            x += 1
        out.append(x)
        x += 1
    return out


class RipAnalyzer:
    """Caches the Gram matrices ``B*B`` of ``A`` and its two preconditionings."""

    def __init__(self, A):
        self.A = check_matrix(A)
        self._grams = {}

    @property
    def n_columns(self):
        return self.A.shape[1]

    def gram(self, which):
        if which not in WHICH:
            raise ValueError(f"which must be one of {WHICH}, got {which!r}")
        if which not in self._grams:
            if which == "delta":
                B = self.A
            else:
                B = precondition(self.A, "half" if which == "gamma" else "full")
            G = B.conj().T @ B
            self._grams[which] = 0.5 * (G + G.conj().T)
        return self._grams[which]

    def exact(self, s, which="delta", budget=None, n_jobs=1):
        N = self.n_columns
        s = check_count(s, "s", 1, N)
        budget = default_budget() if budget is None else budget
        total = math.comb(N, s)
        if total > budget:
            raise EnumerationBudgetError(
                f"C({N},{s}) = {total} supports exceeds the budget {budget}; "
                "use mc_lower_bound instead"
            )
        G = self.gram(which)
        n_jobs = max(1, min(int(n_jobs), total))
        if n_jobs == 1:
            value, count = _max_over(G, itertools.combinations(range(N), s))
        else:
            bounds = np.linspace(0, total, n_jobs + 1).astype(np.int64)

            def work(lo, hi):
                combos = itertools.islice(itertools.combinations(range(N), s), lo, hi)
                return _max_over(G, combos)

            with ThreadPoolExecutor(n_jobs) as pool:
                parts = list(pool.map(work, bounds[:-1], bounds[1:]))
            value = max(p[0] for p in parts)
            count = sum(p[1] for p in parts)
        return RipReport(s, which, value, "Exact", count)

    def monte_carlo(self, s, which="delta", trials=1000, seed=0):
        N = self.n_columns
        s = check_count(s, "s", 1, N)
        trials = check_count(trials, "trials")
        total = math.comb(N, s)
        G = self.gram(which)
        rng = np.random.Generator(np.random.Philox(seed))
        if trials >= total:
            value, count = _max_over(G, itertools.combinations(range(N), s))
        else:
            if total < 2**63:
                ranks = rng.choice(total, size=trials, replace=False)
                supports = [unrank_combination(int(r), N, s) for r in ranks]
            else:
                supports = [np.sort(rng.choice(N, s, replace=False)) for _ in range(trials)]
            value, count = _max_over(G, iter(supports))
        return RipReport(s, which, value, "MonteCarlo", count, trials=trials, seed=seed)


def exact_constant(A, s, which="delta", budget=None, n_jobs=1):
    """Exact order-``s`` constant by enumerating all ``C(N, s)`` supports.

    Raises
    ------
    EnumerationBudgetError
        When ``C(N, s)`` exceeds ``budget`` (default 2e6, or the value of
        ``NSTFB_ENUM_BUDGET``).
    """
    return RipAnalyzer(A).exact(s, which, budget, n_jobs)


def mc_lower_bound(A, s, which="delta", trials=1000, seed=0):
    """Lower bound on the order-``s`` constant from ``trials`` distinct random supports.

    Supports are drawn without replacement; if ``trials`` reaches
    ``C(N, s)`` every support is visited and the value is exact.
    """
    return RipAnalyzer(A).monte_carlo(s, which, trials, seed)


def check_theorem_condition(delta, gamma):
    """``(holds, margin)`` for ``2 gamma^2 + delta^2 < 1``."""
    if delta < 0 or gamma < 0:
        raise ValueError("constants must be non-negative")
    margin = 1.0 - (2.0 * gamma**2 + delta**2)
    return margin > 0, margin


def check_legacy_condition(delta2s, gamma3s):
    """``(holds, margin)`` for the older sufficient condition ``delta_2s + sqrt(2) gamma_3s < 1``."""
    if delta2s < 0 or gamma3s < 0:
        raise ValueError("constants must be non-negative")
    margin = 1.0 - (delta2s + math.sqrt(2.0) * gamma3s)
    return margin > 0, margin
