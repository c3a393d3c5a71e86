"""Seeded instance generators.

Randomness comes from numpy's counter-based Philox4x64-10 bit generator
keyed through a :class:`numpy.random.SeedSequence`, so the same seed
reproduces the same instance on any platform.  Seeds may be an int or a
sequence of ints (e.g. ``(base_seed, s, trial)``).
"""
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_count

__all__ = [
    "PRNG_NAME",
    "PRNG_VERSION",
    "Ensemble",
    "ProblemInstance",
    "make_rng",
    "gen_gaussian_matrix",
    "gen_sparse_signal",
    "add_noise",
    "make_instance",
    "superres_operator",
    "superres_instance",
    "save_instance",
    "relative_error",
]

PRNG_NAME = "Philox4x64-10"
PRNG_VERSION = f"numpy-{np.__version__}/{PRNG_NAME}"


class Ensemble(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"
    LINEAR = "linear"

    def __str__(self):
        return self.value


def make_rng(seed):
    """Philox generator for an int, a sequence of ints, or a SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def gen_gaussian_matrix(M, N, seed):
    """``M x N`` matrix of i.i.d. standard normal entries (no column scaling)."""
    M = check_count(M, "M")
    N = check_count(N, "N")
    if M > N:
        raise ValueError(f"expected M <= N, got {M}x{N}")
    return make_rng(seed).standard_normal((M, N))


def gen_sparse_signal(N, s, ensemble, seed):
    """Exactly ``s``-sparse length-``N`` signal on a uniformly random support.

    Nonzeros: standard normal (``gaussian``), equiprobable +-1
    (``bernoulli``), or ``(s + 1 - j) / s`` on the j-th drawn support
    position (``linear``).
    """
    N = check_count(N, "N")
    s = check_count(s, "s", 1, N)
    ensemble = Ensemble(ensemble)
    rng = make_rng(seed)
    support = rng.choice(N, size=s, replace=False)
    if ensemble is Ensemble.GAUSSIAN:
        vals = rng.standard_normal(s)
        while np.any(vals == 0.0):
            zero = vals == 0.0
            vals[zero] = rng.standard_normal(int(zero.sum()))
    elif ensemble is Ensemble.BERNOULLI:
        vals = rng.choice(np.array([-1.0, 1.0]), size=s)
    else:
        vals = (s + 1 - np.arange(1, s + 1)) / s
    x = np.zeros(N)
    x[support] = vals
    return x


def add_noise(y, sigma, seed):
    """Add white Gaussian noise of standard deviation ``sigma``.

    Complex data gets independent real and imaginary parts of variance
    ``sigma^2 / 2`` each.  ``sigma = 0`` returns an exact copy.  With a
    fixed seed the noise direction is the same for every ``sigma``.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    y = np.asarray(y)
    if sigma == 0:
        return y.copy()
    rng = make_rng(seed)
    if np.iscomplexobj(y):
        z = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        return y + sigma * np.sqrt(0.5) * z
    return y + sigma * rng.standard_normal(y.shape)


@dataclass
class ProblemInstance:
    A: np.ndarray
    x_true: np.ndarray
    y: np.ndarray
    noise_sigma: float = 0.0
    seed: object = None
    ensemble: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def support(self):
        return np.flatnonzero(self.x_true)

    @property
    def sparsity(self):
        return int(np.count_nonzero(self.x_true))

    def manifest(self):
        M, N = self.A.shape
        seed = self.seed
        if isinstance(seed, np.random.SeedSequence):
            seed = list(np.atleast_1d(seed.entropy).tolist())
        return {
            "M": M,
            "N": N,
            "s": self.sparsity,
            "ensemble": None if self.ensemble is None else str(self.ensemble),
            "sigma": self.noise_sigma,
            "seed": seed,
            "field": "complex" if np.iscomplexobj(self.A) else "real",
            "prng": PRNG_VERSION,
            **self.meta,
        }


def _instance_streams(seed):
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(3)


def make_instance(M, N, s, ensemble="gaussian", sigma=0.0, seed=0, matrix="gaussian"):
    """Measurement matrix, sparse signal and (noisy) data from one seed.

    The matrix, signal and noise use independent child streams, so
    changing ``sigma`` leaves ``A`` and ``x_true`` untouched.
    ``matrix="identity"`` (which needs ``M == N``) swaps in ``A = I``.
    """
    a_seed, x_seed, e_seed = _instance_streams(seed)
    if matrix == "identity":
        if M != N:
            raise ValueError(f"identity matrix needs M == N, got {M}x{N}")
        A = np.eye(M)
    elif matrix == "gaussian":
        A = gen_gaussian_matrix(M, N, a_seed)
    else:
        raise ValueError(f"matrix must be 'gaussian' or 'identity', got {matrix!r}")
    x = gen_sparse_signal(N, s, ensemble, x_seed)
    y = add_noise(A @ x, sigma, e_seed)
    meta = {"matrix": matrix} if matrix != "gaussian" else {}
    return ProblemInstance(A, x, y, sigma, seed, str(Ensemble(ensemble)), meta)


def superres_operator(M, N_grid):
    """Fourier dictionary ``A[m, n] = exp(-2 pi i w_m g_n)``.

    Sampling frequencies are the integers ``w_m = m`` (``m = 0..M-1``)
    and grid points ``g_n = n / N_grid``.  With ``M = N_grid`` this is
    the (unnormalised) DFT matrix.
    """
    M = check_count(M, "M")
    N_grid = check_count(N_grid, "N_grid")
    m = np.arange(M)[:, None]
    n = np.arange(N_grid)[None, :]
    # reduce the phase exactly in integers before scaling
    return np.exp(-2j * np.pi * ((m * n) % N_grid) / N_grid)


def superres_instance(J, M, N_grid, seed, off_grid=False):
    """``J`` unit-modulus spikes with uniform random phases.

    On-grid (default): locations are ``J`` distinct grid indices and
    ``y = A x`` exactly.  Off-grid: locations are uniform on ``(0, 1)``,
    ``y`` is sampled at the true locations, and ``x_true`` holds the
    amplitudes snapped to the nearest grid point.
    """
    J = check_count(J, "J")
    if J > N_grid:
        raise ValueError(f"J={J} spikes cannot fit on a grid of {N_grid} points")
    A = superres_operator(M, N_grid)
    rng = make_rng(seed)
    amps = np.exp(2j * np.pi * rng.random(J))
    x = np.zeros(N_grid, dtype=np.complex128)
    if not off_grid:
        locs = np.sort(rng.choice(N_grid, size=J, replace=False))
        x[locs] = amps
        y = A @ x
        t = locs / N_grid
    else:
        t = np.sort(rng.random(J))
        omega = np.arange(M)[:, None]
        y = np.exp(-2j * np.pi * omega * t[None, :]) @ amps
        np.add.at(x, np.rint(t * N_grid).astype(int) % N_grid, amps)
    meta = {"J": J, "N_grid": N_grid, "locations": t.tolist(), "off_grid": bool(off_grid),
            "sampling": "omega_m = m", "amplitudes": "unit modulus, uniform phase"}
    return ProblemInstance(A, x, y, 0.0, seed, None, meta)


def relative_error(estimate, truth):
    """``||estimate - truth|| / ||truth||`` as a float."""
    return float(np.linalg.norm(np.asarray(estimate) - truth) / np.linalg.norm(truth))


def save_instance(instance, directory):
    """Write ``A.txt``, ``x.txt``, ``y.txt`` and ``manifest.json`` into ``directory``."""
    from .io import write_matrix

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "A.txt", instance.A)
    write_matrix(directory / "x.txt", instance.x_true)
    write_matrix(directory / "y.txt", instance.y)
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(instance.manifest(), fh)
        fh.write("\n")
    return directory
