"""Tensor-product Hilbert-space algebra for short spin chains.

Conventions used throughout the package:

* Sites are indexed 0 .. L-1 and site 0 is the most significant digit of
  the mixed-radix basis index (row-major configuration ordering).
* The local spin-1/2 basis is (|up>, |down>) = (0, 1) and spin operators
  follow the S = sigma/2 convention.
* States are plain complex ndarrays of length ``basis.dim``; operators are
  dense square ndarrays.  Everything here is a pure function on them.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionMismatchError, InvalidPartitionError, NonHermitianError

HERMITICITY_ATOL = 1e-12

SPIN_HALF = {
    "id": np.eye(2, dtype=complex),
    "sx": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    "sy": np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex),
    "sz": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
    "sp": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
    "sm": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex),
}


@dataclass(frozen=True)
class ChainBasis:
    """Ordered product basis of local spaces, site 0 most significant."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise InvalidPartitionError("chain must have at least one site")
        if any(int(d) < 2 for d in self.dims):
            raise InvalidPartitionError(f"local dimensions must be >= 2, got {self.dims}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @classmethod
    def spin_chain(cls, length: int) -> "ChainBasis":
        return cls((2,) * length)

    @classmethod
    def spin_chain_with_aux(cls, length: int, aux_site: int) -> "ChainBasis":
        """Spin chain with one three-level site (extra auxiliary level)."""
        dims = [2] * length
        dims[aux_site] = 3
        return cls(tuple(dims))

    @property
    def length(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def encode(self, config) -> int:
        """Mixed-radix index of a site configuration."""
        if len(config) != self.length:
            raise DimensionMismatchError(
                f"configuration has {len(config)} entries for {self.length} sites"
            )
        index = 0
        for c, d in zip(config, self.dims):
            c = int(c)
            if not 0 <= c < d:
                raise DimensionMismatchError(f"level {c} out of range for local dim {d}")
            index = index * d + c
        return index

    def decode(self, index: int) -> tuple[int, ...]:
        """Inverse of :meth:`encode`."""
        if not 0 <= index < self.dim:
            raise DimensionMismatchError(f"index {index} out of range for dim {self.dim}")
        config = []
        for d in reversed(self.dims):
            config.append(index % d)
            index //= d
        return tuple(reversed(config))

    def block_dims(self, sites) -> tuple[int, int, int]:
        """(dim left of block, dim of block, dim right of block) for contiguous sites."""
        sites = sorted(int(s) for s in sites)
        if not sites:
            raise InvalidPartitionError("site set is empty")
        if sites[0] < 0 or sites[-1] >= self.length:
            raise InvalidPartitionError(f"sites {sites} outside chain of length {self.length}")
        if sites != list(range(sites[0], sites[-1] + 1)):
            raise InvalidPartitionError(f"site set {sites} is not contiguous")
        d_left = int(np.prod(self.dims[: sites[0]], initial=1))
        d_block = int(np.prod(self.dims[sites[0] : sites[-1] + 1]))
        d_right = int(np.prod(self.dims[sites[-1] + 1 :], initial=1))
        return d_left, d_block, d_right


def basis_state(basis: ChainBasis, config) -> np.ndarray:
    """Unit amplitude on one product configuration."""
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.encode(config)] = 1.0
    return psi


def all_down(basis: ChainBasis) -> np.ndarray:
    """|down, ..., down> for a pure spin-1/2 chain."""
    return basis_state(basis, (1,) * basis.length)


def lift_local(op: np.ndarray, site: int, basis: ChainBasis) -> np.ndarray:
    """Embed a single-site operator as I x ... x op x ... x I."""
    return lift_product({site: op}, basis)


def lift_product(site_ops: dict, basis: ChainBasis) -> np.ndarray:
    """Embed a product of single-site operators acting on distinct sites."""
    factors = []
    for site in range(basis.length):
        if site in site_ops:
            op = np.asarray(site_ops[site], dtype=complex)
            d = basis.dims[site]
            if op.shape != (d, d):
                raise DimensionMismatchError(
                    f"operator shape {op.shape} does not match local dim {d} at site {site}"
                )
            factors.append(op)
        else:
            factors.append(np.eye(basis.dims[site], dtype=complex))
    unknown = set(site_ops) - set(range(basis.length))
    if unknown:
        raise DimensionMismatchError(f"sites {sorted(unknown)} outside chain")
    return reduce(np.kron, factors)


def partial_trace(state_or_rho: np.ndarray, keep, basis: ChainBasis) -> np.ndarray:
    """Reduced density matrix on a contiguous block of sites.

    Accepts either a pure-state vector or a density matrix on the full
    chain.  Only contiguous blocks are supported; anything else raises
    :class:`InvalidPartitionError`.
    """
    d_left, d_keep, d_right = basis.block_dims(keep)
    arr = np.asarray(state_or_rho, dtype=complex)
    if arr.ndim == 1:
        if arr.size != basis.dim:
            raise DimensionMismatchError(f"state length {arr.size} != basis dim {basis.dim}")
        psi = arr.reshape(d_left, d_keep, d_right)
        return np.einsum("aib,ajb->ij", psi, psi.conj())
    if arr.ndim == 2:
        if arr.shape != (basis.dim, basis.dim):
            raise DimensionMismatchError(f"matrix shape {arr.shape} != basis dim {basis.dim}")
        rho = arr.reshape(d_left, d_keep, d_right, d_left, d_keep, d_right)
        return np.einsum("aibajb->ij", rho)
    raise DimensionMismatchError("expected a state vector or a density matrix")


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    """<psi| O |psi>."""
    state = np.asarray(state)
    op = np.asarray(op)
    if op.shape != (state.size, state.size):
        raise DimensionMismatchError(
            f"operator shape {op.shape} does not match state length {state.size}"
        )
    return complex(np.vdot(state, op @ state))


def is_hermitian(op: np.ndarray, atol: float = HERMITICITY_ATOL) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and (
        np.max(np.abs(op - op.conj().T)) < atol
    )


def require_hermitian(op: np.ndarray, atol: float, context: str) -> None:
    if not is_hermitian(op, atol):
        raise NonHermitianError(f"{context}: matrix is not Hermitian within {atol:g}")
