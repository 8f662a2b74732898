"""Separability tests for bipartite states: PPT verdict, rank witness, Bloch vector.

The PPT (positive partial transpose) criterion is necessary and sufficient
exactly for 2x2 and 2x3 systems, so the verdict refuses larger dimensions
where "separable" would be unsound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .ensembles import DensityMatrix
from .errors import DimensionMismatch, UnsupportedDimensions

#: States whose partial transpose dips below -PPT_TOL are declared entangled.
#: Boundary states are measure zero under both ensembles; the tolerance only
#: absorbs eigensolver rounding.
PPT_TOL = 1e-10

#: Dimensions where PPT is conclusive.
PPT_EXACT_DIMS = {(2, 2), (2, 3)}

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])


@dataclass(frozen=True)
class SeparabilityVerdict:
    """PPT outcome plus the diagnostics the estimator bins and audits."""

    separable: bool
    min_pt_eigenvalue: float
    state_rank: int
    reduced_rank_A: int


@dataclass(frozen=True)
class BlochVector:
    components: tuple[float, float, float]
    radius: float


def ppt_verdict(rho: DensityMatrix, ppt_tol: float = PPT_TOL) -> SeparabilityVerdict:
    """Classify a 2x2 or 2x3 state by the sign of its partial transpose spectrum.

    The transpose is taken on subsystem B; the criterion is side-symmetric,
    fixing one side keeps outputs reproducible.
    """
    if rho.dims not in PPT_EXACT_DIMS:
        raise UnsupportedDimensions(
            f"PPT is conclusive only for 2x2 and 2x3 systems, got {rho.d_A}x{rho.d_B}"
        )
    pt = linalg.partial_transpose(rho.matrix, rho.dims, subsystem="B")
    min_pt = float(linalg.hermitian_eigenvalues(pt)[0])
    return SeparabilityVerdict(
        separable=min_pt >= -ppt_tol,
        min_pt_eigenvalue=min_pt,
        state_rank=linalg.numerical_rank(rho.matrix),
        reduced_rank_A=linalg.numerical_rank(
            linalg.partial_trace(rho.matrix, rho.dims, keep="A")
        ),
    )


def rank_witness(rho: DensityMatrix) -> bool:
    """True certifies entanglement: rank(rho) < rank(rho_A) has no separable states.

    False is non-informative.
    """
    rank = linalg.numerical_rank(rho.matrix)
    rank_a = linalg.numerical_rank(linalg.partial_trace(rho.matrix, rho.dims, keep="A"))
    return rank < rank_a


def bloch_vector(rho: DensityMatrix, subsystem: str = "A") -> BlochVector:
    """Bloch vector b_i = tr(rho_sub sigma_i) of a qubit subsystem."""
    d_sub = rho.d_A if subsystem == "A" else rho.d_B
    if d_sub != 2:
        raise DimensionMismatch(f"subsystem {subsystem} has dimension {d_sub}, not a qubit")
    keep = "A" if subsystem == "A" else "B"
    reduced = linalg.partial_trace(rho.matrix, rho.dims, keep=keep)
    comps = np.einsum("ij,kji->k", reduced, PAULIS).real
    return BlochVector(
        components=(float(comps[0]), float(comps[1]), float(comps[2])),
        radius=float(np.linalg.norm(comps)),
    )
