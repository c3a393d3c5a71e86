"""Dense real/complex kernels shared by the solvers.

All routines take the conjugate transpose wherever an adjoint is needed,
so real and complex operators go through the same code path.
"""
import numpy as np
from scipy import linalg as sla
from scipy.linalg import lapack

from ._validation import check_matrix, check_vector

__all__ = [
    "RankDeficientError",
    "SingularSystemError",
    "NullSpaceTuner",
    "null_space_projector",
    "min_norm_feasible",
    "restricted_ls",
    "precondition",
    "spectral_norm",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-10

# Gram systems with a worse reciprocal condition estimate go through QR.
GRAM_RCOND_MIN = 1e-8
# Pivoted-QR columns below this relative size count as dependent.
QR_RANK_TOL = 1e-12
# AA* factorizations with a worse reciprocal condition are refused.
ROW_RANK_RCOND_MIN = 1e-13


class RankDeficientError(np.linalg.LinAlgError):
    """The operator does not have full row rank, so AA* is not invertible."""


class SingularSystemError(np.linalg.LinAlgError):
    """A restricted least-squares system has linearly dependent columns."""

    def __init__(self, size, cond):
        self.size = size
        self.cond = cond
        super().__init__(
            f"restricted system with |T|={size} is singular "
            f"(condition estimate {cond:.3e})"
        )


def _adjoint(A):
    return A.conj().T


def _rcond_cholesky(c, anorm):
    con = lapack.zpocon if np.iscomplexobj(c) else lapack.dpocon
    rcond, info = con(c, anorm, uplo="U")
    return rcond if info == 0 else 0.0


def _cho_factor_checked(G):
    anorm = np.abs(G).sum(axis=0).max()
    try:
        c, lower = sla.cho_factor(G, lower=False, check_finite=False)
    except np.linalg.LinAlgError:
        return None, 0.0
    if anorm == 0.0:
        return None, 0.0
    return (c, lower), _rcond_cholesky(c, anorm)


class NullSpaceTuner:
    """Cached factorization of ``AA*`` for repeated feasibility corrections.

    The tuning step ``u + A*(AA*)^{-1}(y - Au)`` is the form of the
    null-space projection that never materialises the N-by-N projector.
    One instance can be shared across threads; nothing is mutated after
    construction.

    Parameters
    ----------
    A : ndarray of shape (M, N)
        Measurement operator with full row rank.
    rcond_min : float, default=1e-13
        Reciprocal-condition threshold below which AA* is declared singular.
    """

    def __init__(self, A, rcond_min=ROW_RANK_RCOND_MIN):
        A = check_matrix(A)
        M, N = A.shape
        if M > N:
            raise RankDeficientError(
                f"A is {M}x{N}; a full-row-rank operator needs M <= N"
            )
        gram = A @ _adjoint(A)
        factor, rcond = _cho_factor_checked(gram)
        if factor is None or rcond < rcond_min:
            raise RankDeficientError(
                "AA* is not positive definite: A does not have full row "
                f"rank (reciprocal condition {rcond:.3e})"
            )
        self.A = A
        self.rcond = rcond
        self._factor = factor

    @property
    def shape(self):
        return self.A.shape

    def solve_gram(self, r):
        """Return (AA*)^{-1} r."""
        return sla.cho_solve(self._factor, r, check_finite=False)

    def min_norm(self, y):
        """Minimum-norm solution A*(AA*)^{-1} y of Ax = y."""
        return _adjoint(self.A) @ self.solve_gram(y)

    def tune(self, u, y):
        """Move ``u`` onto the feasible set {x : Ax = y} along ker(A)-orthogonal directions."""
        return u + self.min_norm(y - self.A @ u)

    def projector(self):
        """N-by-N orthogonal projector onto ker(A)."""
        A = self.A
        P = -_adjoint(A) @ self.solve_gram(A)
        P[np.diag_indices_from(P)] += 1.0
        # symmetrise away rounding so P == P* holds exactly
        return 0.5 * (P + _adjoint(P))


def null_space_projector(A):
    """Orthogonal projector ``I - A*(AA*)^{-1}A`` onto the kernel of ``A``.

    Raises
    ------
    RankDeficientError
        If ``A`` does not have full row rank.
    """
    return NullSpaceTuner(A).projector()


def min_norm_feasible(A, y):
    """Minimum l2-norm solution of ``Ax = y`` for full-row-rank ``A``."""
    tuner = NullSpaceTuner(A)
    y = check_vector(y, tuner.shape[0])
    return tuner.min_norm(y)


def restricted_ls(A, T, b, return_info=False):
    """Least-squares coefficients of ``b`` on the columns ``A[:, T]``.

    Solves the normal equations ``(A_T* A_T) z = A_T* b`` through a
    Cholesky factorization of the Gram matrix when its reciprocal
    condition estimate is at least ``1e-8``; otherwise falls back to a
    column-pivoted QR of ``A_T`` itself.

    Parameters
    ----------
    A : ndarray of shape (M, N)
    T : array-like of int
        Column indices, ``len(T) <= M``.
    b : ndarray of shape (M,)
    return_info : bool, default=False
        Also return a dict with the path taken and the condition estimate.

    Returns
    -------
    z : ndarray of shape (len(T),)

    Raises
    ------
    SingularSystemError
        If the selected columns are numerically dependent.
    """
    T = np.asarray(T, dtype=np.intp)
    AT = A[:, T]
    t = T.shape[0]
    if t == 0:
        z = np.zeros(0, dtype=np.result_type(A, b))
        return (z, {"method": "empty", "cond": 1.0}) if return_info else z
    if t > A.shape[0]:
        raise SingularSystemError(t, np.inf)

    ATh = _adjoint(AT)
    G = ATh @ AT
    factor, rcond = _cho_factor_checked(G)
    if factor is not None and rcond >= GRAM_RCOND_MIN:
        z = sla.cho_solve(factor, ATh @ b, check_finite=False)
        info = {"method": "cholesky", "cond": 1.0 / rcond}
    else:
        Q, R, piv = sla.qr(AT, mode="economic", pivoting=True, check_finite=False)
        diag = np.abs(np.diag(R))
        cond = diag[0] / diag[-1] if diag[-1] > 0 else np.inf
        if diag[0] == 0 or diag[-1] <= QR_RANK_TOL * diag[0]:
            raise SingularSystemError(t, cond)
        w = sla.solve_triangular(R, _adjoint(Q) @ b, check_finite=False)
        z = np.empty_like(w)
        z[piv] = w
        info = {"method": "qr", "cond": cond**2}
    return (z, info) if return_info else z


def precondition(A, mode="half", tol=DEFAULT_TOL):
    """Return ``(AA*)^{-1/2} A`` (``mode="half"``) or ``(AA*)^{-1} A`` (``mode="full"``).

    The inverse square root comes from a Hermitian eigendecomposition of
    ``AA*``.  Eigenvalues at or below ``tol * max_eigenvalue`` raise
    :class:`RankDeficientError`.
    """
    A = check_matrix(A)
    if mode not in ("half", "full"):
        raise ValueError(f"mode must be 'half' or 'full', got {mode!r}")
    w, V = np.linalg.eigh(A @ _adjoint(A))
    if w[-1] <= 0 or w[0] <= tol * w[-1]:
        raise RankDeficientError(
            f"AA* has a non-positive eigenvalue {w[0]:.3e} (max {w[-1]:.3e})"
        )
    power = 0.5 if mode == "half" else 1.0
    return (V * w**-power) @ (_adjoint(V) @ A)


def spectral_norm(M):
    """Largest singular value, from a full SVD."""
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains non-finite entries")
    if M.size == 0:
        return 0.0
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(np.linalg.svd(M, compute_uv=False)[0])
