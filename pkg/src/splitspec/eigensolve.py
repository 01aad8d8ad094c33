"""Dense Hermitian eigendecomposition with deterministic ordering.

Backed by LAPACK through ``numpy.linalg.eigh``.  Results are made
reproducible by symmetrizing the input, routing exactly-real matrices
through the real-symmetric driver, and fixing a phase gauge per
eigenvector (largest-magnitude component made real and positive).
Bit-identical output for bit-identical input requires a fixed BLAS
thread count; the CLI and the test suite pin it to one.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, EmptyWindowError, NonHermitianError

HERMITIAN_ATOL = 1e-10
DEGENERACY_ATOL = 1e-9


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.size

    def state(self, k: int) -> np.ndarray:
        return self.vectors[:, k]


def _fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    pivot_rows = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[pivot_rows, np.arange(vectors.shape[1])]
    if np.iscomplexobj(vectors):
        phases = pivots / np.abs(pivots)
        return vectors * phases.conj()[np.newaxis, :]
    return vectors * np.sign(pivots)[np.newaxis, :]


def eigh(matrix: np.ndarray, hermitian_atol: float = HERMITIAN_ATOL) -> EigenSystem:
    """Full decomposition of a Hermitian matrix, eigenvalues ascending."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {matrix.shape}")
    deviation = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    if deviation > hermitian_atol:
        raise NonHermitianError(
            f"matrix deviates from Hermiticity by {deviation:.3e} (atol {hermitian_atol:g})"
        )
    work = 0.5 * (matrix + matrix.conj().T)
    if np.iscomplexobj(work) and not work.imag.any():
        work = work.real
    try:
        values, vectors = np.linalg.eigh(work)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"eigendecomposition failed for dim {matrix.shape[0]}: {exc}"
        ) from exc
    return EigenSystem(values=values, vectors=_fix_gauge(vectors))


def ground_state(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Lowest eigenpair; on degeneracy the first eigh-ordered column wins."""
    es = eigh(matrix)
    return float(es.values[0]), es.state(0)


def select_excited(es: EigenSystem, policy) -> list[int]:
    """Pick eigenstate indices by policy.

    ``"mid_spectrum"`` returns the single index whose energy is closest to
    the spectrum midpoint.  A ``(lo, hi)`` pair returns every index whose
    normalized energy (E - E_min) / (E_max - E_min) lies in [lo, hi].
    """
    e_min = float(es.values[0])
    e_max = float(es.values[-1])
    if policy == "mid_spectrum":
        target = 0.5 * (e_min + e_max)
        return [int(np.argmin(np.abs(es.values - target)))]
    lo, hi = float(policy[0]), float(policy[1])
    if hi < lo:
        raise EmptyWindowError(f"window [{lo}, {hi}] is empty")
    span = e_max - e_min
    if span == 0.0:
        normalized = np.zeros_like(es.values)
    else:
        normalized = (es.values - e_min) / span
    indices = np.flatnonzero((normalized >= lo) & (normalized <= hi))
    if indices.size == 0:
        raise EmptyWindowError(f"no eigenstates with normalized energy in [{lo}, {hi}]")
    return [int(i) for i in indices]


def degenerate_mask(values: np.ndarray, atol: float = DEGENERACY_ATOL) -> np.ndarray:
    """True where an eigenvalue is within ``atol`` of a neighboring one."""
    values = np.asarray(values, dtype=float)
    mask = np.zeros(values.size, dtype=bool)
    if values.size > 1:
        close = np.abs(np.diff(values)) < atol
        mask[:-1] |= close
        mask[1:] |= close
    return mask
