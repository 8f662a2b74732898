"""Random-matrix ensembles: Ginibre, fixed-rank Ginibre, Haar, HS and Bures states.

A state of a ``(d_A, d_B)`` system is built from an n x n complex Ginibre
matrix Z (n = d_A * d_B, entries with independent N(0, 1) real and imaginary
parts):

* Hilbert-Schmidt:  rho = Z Z+ / tr(Z Z+)
* Bures:            rho = (I + U) Z Z+ (I + U+) / tr(...)   with U Haar unitary

Rank-deficient states use a rank-k Ginibre matrix assembled from Gaussian
blocks A (k x k), B (k x (n-k)), C ((n-k) x k) with the closing block
D = C A^{-1} B, which pins the rank to exactly k.

Uniform draws consumed per sample (no retries), with m = n - k:

===========================  =============================
full Ginibre (k = n)         2 n^2
rank-k Ginibre (k < n)       2 (k^2 + 2 k m)   (+2 k^2 per pivot retry)
Haar unitary                 2 n^2             (+2 n^2 per singular retry)
HS state                     one rank-k Ginibre
Bures state                  one rank-k Ginibre, then one Haar unitary
===========================  =============================

Retries are astronomically rare; when none occur, each sample's draw count is
fixed, so a stream position identifies a sample exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, IllConditionedBlock, RankCollapse, SingularInput
from .rng import RngStream, complex_normals_from_uniforms

#: Ratio of smallest to largest singular scale of the pivot block A below
#: which A is resampled (checked on the Gram matrix, hence squared).
PIVOT_COND_RTOL = 1e-12

#: Retry budget for ill-conditioned pivots, singular QR inputs and rank
#: collapse.  Exceeding it raises instead of degrading silently.
RETRY_LIMIT = 100

_MEASURES = ("hs", "bures")


@dataclass(frozen=True)
class EnsembleSpec:
    """What to sample: measure ('hs' or 'bures'), dimensions and target rank."""

    measure: str
    d_A: int
    d_B: int
    rank: int

    def __post_init__(self):
        if self.measure not in _MEASURES:
            raise ValueError(f"measure must be one of {_MEASURES}, got {self.measure!r}")
        if self.d_A != 2 or self.d_B not in (2, 3):
            raise ValueError(
                f"supported dimensions are 2x2 and 2x3, got {self.d_A}x{self.d_B}"
            )
        if not 1 <= self.rank <= self.dim:
            raise ValueError(f"rank must be in 1..{self.dim}, got {self.rank}")

    @property
    def dim(self) -> int:
        return self.d_A * self.d_B


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated bipartite state: Hermitian, unit trace, PSD, tagged (d_A, d_B)."""

    matrix: np.ndarray
    d_A: int
    d_B: int

    # Invariant tolerances (relative to the largest eigenvalue where sensible).
    HERMITICITY_RTOL = 1e-12
    TRACE_ATOL = 1e-12
    PSD_RTOL = 1e-10

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.d_A * self.d_B
        if m.shape != (n, n):
            raise DimensionMismatch(
                f"matrix shape {m.shape} does not match dims {self.d_A}x{self.d_B}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d_A, self.d_B)

    def validate(self) -> "DensityMatrix":
        """Check Hermiticity, unit trace and positivity; raise ValueError if violated."""
        m = self.matrix
        scale = max(linalg.max_abs(m), 1e-300)
        if linalg.max_abs(m - linalg.adjoint(m)) > self.HERMITICITY_RTOL * scale:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > self.TRACE_ATOL or abs(np.trace(m).imag) > self.TRACE_ATOL:
            raise ValueError("density matrix trace differs from 1")
        w = linalg.hermitian_eigenvalues(m)
        if w[0] < -self.PSD_RTOL * max(w[-1], 0.0):
            raise ValueError(f"density matrix has negative eigenvalue {w[0]:.3e}")
        return self


def sample_ginibre(n: int, rng: RngStream) -> np.ndarray:
    """n x n matrix with all 2 n^2 real components drawn i.i.d. N(0, 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.complex_normals((n, n))


def assemble_rank_deficient(a, b, c) -> np.ndarray:
    """Assemble [[A, B], [C, C A^{-1} B]]; the result has rank = A's size.

    Accepts stacked blocks with matching leading axes.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    d = np.einsum("...ij,...jk,...kl->...il", c, np.linalg.inv(a), b)
    top = np.concatenate([a, b], axis=-1)
    bottom = np.concatenate([c, d], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _pivot_ok(a: np.ndarray) -> np.ndarray:
    """True where the smallest singular scale of A is above the tolerance.

    Conditioning is measured on the Gram matrix A A+, so the singular-value
    ratio threshold appears squared.
    """
    gram = np.einsum("...ij,...kj->...ik", a, a.conj())
    w = np.linalg.eigvalsh(gram)
    return w[..., 0] >= (PIVOT_COND_RTOL**2) * np.maximum(w[..., -1], 0.0)


def sample_rank_k_ginibre(n: int, k: int, rng: RngStream) -> np.ndarray:
    """Rank-k n x n Ginibre matrix; identical to sample_ginibre when k = n.

    The pivot block A is redrawn (at most RETRY_LIMIT times) if its singular
    scales span more than PIVOT_COND_RTOL, then B and C are drawn and the
    closing block computed.
    """
    if not 1 <= k <= n:
        raise ValueError(f"rank must be in 1..{n}, got {k}")
    if k == n:
        return sample_ginibre(n, rng)
    m = n - k
    a = rng.complex_normals((k, k))
    for _ in range(RETRY_LIMIT):
        if _pivot_ok(a):
            break
        a = rng.complex_normals((k, k))
    else:
        raise IllConditionedBlock(f"pivot block stayed ill-conditioned after {RETRY_LIMIT} draws")
    b = rng.complex_normals((k, m))
    c = rng.complex_normals((m, k))
    return assemble_rank_deficient(a, b, c)


def sample_haar_unitary(n: int, rng: RngStream) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR of a Ginibre draw."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for _ in range(RETRY_LIMIT):
        g = rng.complex_normals((n, n))
        try:
            return linalg.qr_unitary(g)
        except SingularInput:
            continue
    raise SingularInput(f"no numerically regular Ginibre draw in {RETRY_LIMIT} tries")


def hs_state(z: np.ndarray) -> np.ndarray:
    """Z Z+ normalized to unit trace (accepts stacked Z)."""
    w = np.einsum("...ij,...kj->...ik", z, z.conj())
    tr = np.einsum("...ii->...", w).real
    return w / tr[..., None, None]


def bures_state(z: np.ndarray, u: np.ndarray) -> np.ndarray:
    """(I + U) Z Z+ (I + U+) normalized to unit trace (accepts stacks)."""
    n = z.shape[-1]
    y = np.einsum("...ij,...jk->...ik", u + np.eye(n), z)
    return hs_state(y)


def sample_state(spec: EnsembleSpec, rng: RngStream) -> DensityMatrix:
    """One density matrix from the requested ensemble, rank enforced.

    Draws Z (rank spec.rank), then for Bures an independent Haar U, and
    resamples the whole state (at most RETRY_LIMIT times) in the rare event
    the realized numerical rank differs from the target.
    """
    n = spec.dim
    for _ in range(RETRY_LIMIT):
        z = sample_rank_k_ginibre(n, spec.rank, rng)
        if spec.measure == "bures":
            mat = bures_state(z, sample_haar_unitary(n, rng))
        else:
            mat = hs_state(z)
        if linalg.numerical_rank(mat) == spec.rank:
            return DensityMatrix(mat, spec.d_A, spec.d_B)
    raise RankCollapse(
        f"no draw realized rank {spec.rank} in {RETRY_LIMIT} tries; "
        "persistent collapse indicates a tolerance bug"
    )


def uniform_draws_per_sample(spec: EnsembleSpec) -> int:
    """Uniform draws one retry-free sample consumes (see module docstring)."""
    n, k = spec.dim, spec.rank
    d = 2 * n * n if k == n else 2 * (k * k + 2 * k * (n - k))
    if spec.measure == "bures":
        d += 2 * n * n
    return d


def sample_states(spec: EnsembleSpec, rng: RngStream, count: int) -> np.ndarray:
    """``count`` states as a (count, n, n) stack, bit-identical to sequential
    :func:`sample_state` calls on the same stream.

    The fast path draws and transforms the whole batch with stacked kernels;
    if any draw in the batch would need a retry (ill-conditioned pivot,
    singular QR input, rank collapse), the stream is rewound and the batch is
    replayed sample by sample, which is the defining semantics.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    snapshot = rng.state
    states = _sample_states_fast(spec, rng, count)
    if states is None:
        rng.state = snapshot
        n = spec.dim
        states = np.empty((count, n, n), dtype=complex)
        for i in range(count):
            states[i] = sample_state(spec, rng).matrix
    return states


def _sample_states_fast(spec: EnsembleSpec, rng: RngStream, count: int):
    """Batched sampling; returns None when any sample needs a retry."""
    n, k = spec.dim, spec.rank
    m = n - k
    d_z = 2 * n * n if k == n else 2 * (k * k + 2 * k * m)
    u = rng.uniforms((count, uniform_draws_per_sample(spec)))

    z_entries = complex_normals_from_uniforms(u[:, :d_z].reshape(count, -1, 2))
    if k == n:
        z = z_entries.reshape(count, n, n)
    else:
        a = z_entries[:, : k * k].reshape(count, k, k)
        b = z_entries[:, k * k : k * k + k * m].reshape(count, k, m)
        c = z_entries[:, k * k + k * m :].reshape(count, m, k)
        if not _pivot_ok(a).all():
            return None
        z = assemble_rank_deficient(a, b, c)

    if spec.measure == "bures":
        g = complex_normals_from_uniforms(u[:, d_z:].reshape(count, n, n, 2))
        q, diag = linalg._qr_phase_fixed(g)
        scale = np.abs(g).max(axis=(-2, -1))
        if np.any(np.abs(diag).min(axis=-1) < linalg.QR_SINGULAR_RTOL * scale):
            return None
        states = bures_state(z, q)
    else:
        states = hs_state(z)

    if np.any(linalg.numerical_rank(states) != k):
        return None
    return states
