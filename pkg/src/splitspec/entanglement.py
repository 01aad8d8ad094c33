"""Reference entanglement measures and the triseparability oracle.

These provide the ground truth the split-probe criterion is tested
against: von Neumann entropies of the three blocks, their half-sum (the
pure-state squashed entanglement), and Schmidt ranks across the two cuts
A | MB and AM | B.  For a pure state, rank one across both cuts is
equivalent to a full product structure over A, M, and B.
All entropies are in nats.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DensityMatrixError, DimensionMismatchError
from .hilbert import ChainBasis, partial_trace, require_hermitian
from .models import Partition

RANK_TOL = 1e-8
EIGENVALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class EntanglementReport:
    s_a: float
    s_b: float
    s_m: float
    e_sq: float
    schmidt_rank_a_mb: int
    schmidt_rank_am_b: int
    schmidt_rank_m_ab: int


def von_neumann(rho: np.ndarray, trace_atol: float = 1e-8) -> float:
    """-Tr rho ln rho for a density matrix; tiny negative eigenvalues clamp to 0."""
    rho = np.asarray(rho)
    require_hermitian(rho, 1e-10, "von_neumann")
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > trace_atol:
        raise DensityMatrixError(f"trace {trace} deviates from 1 by more than {trace_atol:g}")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -1e-10:
        raise DensityMatrixError(f"negative eigenvalue {evals.min():.3e} beyond tolerance")
    evals = evals[evals > EIGENVALUE_FLOOR]
    entropy = float(-(evals * np.log(evals)).sum())
    return entropy if entropy > 0.0 else 0.0


def _tripartite_tensor(state: np.ndarray, partition: Partition) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    dim = partition.dim_a * 2 * partition.dim_b
    if state.size != dim:
        raise DimensionMismatchError(
            f"state length {state.size} does not match chain dim {dim}"
        )
    return state.reshape(partition.dim_a, 2, partition.dim_b)


def schmidt_values(state: np.ndarray, partition: Partition, cut: str) -> np.ndarray:
    """Singular values across one of the cuts ``a|mb``, ``am|b``, ``m|ab``."""
    psi = _tripartite_tensor(state, partition)
    if cut == "a|mb":
        mat = psi.reshape(partition.dim_a, 2 * partition.dim_b)
    elif cut == "am|b":
        mat = psi.reshape(partition.dim_a * 2, partition.dim_b)
    elif cut == "m|ab":
        mat = psi.transpose(1, 0, 2).reshape(2, partition.dim_a * partition.dim_b)
    else:
        raise ValueError(f"unknown cut {cut!r}")
    return np.linalg.svd(mat, compute_uv=False)


def _rank(singular_values: np.ndarray, rank_tol: float) -> int:
    return max(int(np.count_nonzero(singular_values > rank_tol)), 1)


def squashed(state: np.ndarray, partition: Partition, rank_tol: float = RANK_TOL) -> EntanglementReport:
    """Block entropies, their half-sum, and Schmidt ranks for a pure state."""
    state = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-8:
        raise DensityMatrixError(f"state norm {norm} deviates from 1")
    basis = ChainBasis.spin_chain(partition.length)
    s_a = von_neumann(partial_trace(state, partition.a_sites, basis))
    s_b = von_neumann(partial_trace(state, partition.b_sites, basis))
    s_m = von_neumann(partial_trace(state, (partition.m_site,), basis))
    return EntanglementReport(
        s_a=s_a,
        s_b=s_b,
        s_m=s_m,
        e_sq=0.5 * (s_a + s_b + s_m),
        schmidt_rank_a_mb=_rank(schmidt_values(state, partition, "a|mb"), rank_tol),
        schmidt_rank_am_b=_rank(schmidt_values(state, partition, "am|b"), rank_tol),
        schmidt_rank_m_ab=_rank(schmidt_values(state, partition, "m|ab"), rank_tol),
    )


def triseparable_oracle(state: np.ndarray, partition: Partition, rank_tol: float = RANK_TOL) -> bool:
    """True iff the pure state is a product across all three blocks.

    Rank one across both A|MB and AM|B suffices: the first cut factors the
    state as phi_A x chi_MB, the second forces chi_MB itself to factor.
    """
    rank_a = _rank(schmidt_values(state, partition, "a|mb"), rank_tol)
    if rank_a != 1:
        return False
    return _rank(schmidt_values(state, partition, "am|b"), rank_tol) == 1
