"""Spin-chain Hamiltonians and their tripartite block decomposition.

Two models are provided, both with open boundary conditions:

* an anisotropic XY chain in a transverse field,
  H = -sum_i [Jx Sx_i Sx_{i+1} + Jy Sy_i Sy_{i+1}] + h sum_i Sz_i
  with Jx = J (1 + alpha), Jy = J (1 - alpha), and
* a Heisenberg chain in a random longitudinal field,
  H = J sum_i S_i . S_{i+1} + sum_i h_i Sz_i, h_i uniform on [-h_max, h_max].

A chain of length L is split into blocks A | M | B where M is the single
center site, L_A = ceil((L - 1) / 2).  Bond terms crossing the A-M (M-B)
boundary form H_AM (H_BM); the M-site field term belongs to H_M.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import InvalidPartitionError, SizeLimitError
from .hilbert import SPIN_HALF, ChainBasis

# Dense matrices only; 2^14 keeps the worst case around 4 GB transient.
MAX_DENSE_DIM = 16384


class Term(NamedTuple):
    """One product term: coeff * op_1(site_1) * op_2(site_2) * ..."""

    coeff: float
    ops: tuple[tuple[int, str], ...]

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(site for site, _ in self.ops)


@dataclass(frozen=True)
class XYParams:
    length: int
    j: float = 1.0
    alpha: float = 0.0
    h: float = 0.0

    def __post_init__(self):
        if self.length < 2:
            raise InvalidPartitionError(f"need at least 2 sites, got {self.length}")

    @property
    def jx(self) -> float:
        return self.j * (1.0 + self.alpha)

    @property
    def jy(self) -> float:
        return self.j * (1.0 - self.alpha)


@dataclass(frozen=True)
class RandomFieldParams:
    length: int
    j: float = 1.0
    h_max: float = 1.0
    seed: int = 0
    realization: int = 0

    def __post_init__(self):
        if self.length < 2:
            raise InvalidPartitionError(f"need at least 2 sites, got {self.length}")
        if self.h_max < 0:
            raise InvalidPartitionError(f"disorder half-width must be >= 0, got {self.h_max}")
        if self.seed < 0 or self.realization < 0:
            raise InvalidPartitionError("seed and realization index must be non-negative")


@dataclass(frozen=True)
class Partition:
    """Tripartition A | M | B with M a single center site."""

    l_a: int
    l_m: int
    l_b: int

    def __post_init__(self):
        if self.l_m != 1:
            raise InvalidPartitionError(f"M must be a single site, got l_m={self.l_m}")
        if self.l_a < 1 or self.l_b < 1:
            raise InvalidPartitionError("A and B must each contain at least one site")
        if self.l_a != math.ceil((self.length - 1) / 2):
            raise InvalidPartitionError(
                f"M must be the center site: expected l_a={math.ceil((self.length - 1) / 2)} "
                f"for length {self.length}, got {self.l_a}"
            )

    @classmethod
    def centered(cls, length: int) -> "Partition":
        if length < 3:
            raise InvalidPartitionError(f"need at least 3 sites to tripartition, got {length}")
        l_a = length // 2
        return cls(l_a=l_a, l_m=1, l_b=length - 1 - l_a)

    @property
    def length(self) -> int:
        return self.l_a + self.l_m + self.l_b

    @property
    def m_site(self) -> int:
        return self.l_a

    @property
    def a_sites(self) -> tuple[int, ...]:
        return tuple(range(self.l_a))

    @property
    def b_sites(self) -> tuple[int, ...]:
        return tuple(range(self.l_a + 1, self.length))

    @property
    def dim_a(self) -> int:
        return 2**self.l_a

    @property
    def dim_b(self) -> int:
        return 2**self.l_b


@dataclass(frozen=True)
class PartitionedHamiltonian:
    """Blocks of H = H_A + H_B + H_M + H_AM + H_BM on the full chain basis.

    ``h_a_native`` and ``h_b_native`` are the same A and B blocks expressed
    on their own 2^L_A- and 2^L_B-dimensional subchain bases; their
    eigenbases define the split-spectroscopy frequencies.
    """

    partition: Partition
    basis: ChainBasis
    h_a: np.ndarray
    h_b: np.ndarray
    h_m: np.ndarray
    h_am: np.ndarray
    h_bm: np.ndarray
    h_total: np.ndarray
    h_a_native: np.ndarray
    h_b_native: np.ndarray


def xy_terms(params: XYParams) -> list[Term]:
    terms = []
    for i in range(params.length - 1):
        terms.append(Term(-params.jx, ((i, "sx"), (i + 1, "sx"))))
        terms.append(Term(-params.jy, ((i, "sy"), (i + 1, "sy"))))
    for i in range(params.length):
        terms.append(Term(params.h, ((i, "sz"),)))
    return terms


def random_fields(params: RandomFieldParams) -> np.ndarray:
    """Per-site fields for one disorder realization, keyed by (seed, realization)."""
    rng = np.random.default_rng(np.random.SeedSequence((params.seed, params.realization)))
    return rng.uniform(-params.h_max, params.h_max, params.length)


def random_field_terms(params: RandomFieldParams, fields=None) -> list[Term]:
    if fields is None:
        fields = random_fields(params)
    terms = []
    for i in range(params.length - 1):
        for key in ("sx", "sy", "sz"):
            terms.append(Term(params.j, ((i, key), (i + 1, key))))
    for i in range(params.length):
        terms.append(Term(float(fields[i]), ((i, "sz"),)))
    return terms


def model_terms(params) -> list[Term]:
    if isinstance(params, XYParams):
        return xy_terms(params)
    if isinstance(params, RandomFieldParams):
        return random_field_terms(params)
    raise TypeError(f"unsupported model parameters: {type(params).__name__}")


def assemble(terms: list[Term], basis: ChainBasis) -> np.ndarray:
    """Dense matrix for a sum of product terms (sparse Kronecker internally)."""
    if basis.dim > MAX_DENSE_DIM:
        raise SizeLimitError(
            f"dimension {basis.dim} exceeds the dense budget {MAX_DENSE_DIM}"
        )
    total = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for term in terms:
        ops = dict(term.ops)
        if len(ops) != len(term.ops):
            raise InvalidPartitionError(f"repeated site in term {term}")
        factor = sp.identity(1, dtype=complex, format="csr")
        for site in range(basis.length):
            local = ops.get(site)
            if local is None:
                block = sp.identity(basis.dims[site], dtype=complex, format="csr")
            else:
                block = sp.csr_matrix(SPIN_HALF[local])
            factor = sp.kron(factor, block, format="csr")
        total = total + term.coeff * factor
    return np.asarray(total.todense())


def build_xy(params: XYParams) -> np.ndarray:
    """Dense XY-chain Hamiltonian on the 2^L product basis."""
    return assemble(xy_terms(params), ChainBasis.spin_chain(params.length))


def build_random_field(params: RandomFieldParams) -> tuple[np.ndarray, np.ndarray]:
    """Dense random-field Heisenberg Hamiltonian plus the sampled fields."""
    fields = random_fields(params)
    basis = ChainBasis.spin_chain(params.length)
    return assemble(random_field_terms(params, fields), basis), fields


def build_model(params) -> np.ndarray:
    """Uniform entry point for either model."""
    if isinstance(params, RandomFieldParams):
        return build_random_field(params)[0]
    return build_xy(params)


def _classify(term: Term, partition: Partition) -> str:
    m = partition.m_site
    sites = term.sites
    in_a = all(s < m for s in sites)
    in_b = all(s > m for s in sites)
    if in_a:
        return "a"
    if in_b:
        return "b"
    if all(s == m for s in sites):
        return "m"
    if any(s < m for s in sites):
        return "am"
    return "bm"


def _shift(terms: list[Term], offset: int) -> list[Term]:
    return [
        Term(t.coeff, tuple((site - offset, key) for site, key in t.ops)) for t in terms
    ]


def split_terms(params, partition: Partition) -> dict[str, list[Term]]:
    """Model terms grouped into the five tripartite blocks."""
    if partition.length != params.length:
        raise InvalidPartitionError(
            f"partition covers {partition.length} sites, model has {params.length}"
        )
    groups: dict[str, list[Term]] = {"a": [], "b": [], "m": [], "am": [], "bm": []}
    for term in model_terms(params):
        groups[_classify(term, partition)].append(term)
    return groups


def subchain_hamiltonians(params, partition: Partition) -> tuple[np.ndarray, np.ndarray]:
    """H_A and H_B on their native subchain bases (2^L_A and 2^L_B)."""
    groups = split_terms(params, partition)
    h_a = assemble(groups["a"], ChainBasis.spin_chain(partition.l_a))
    h_b = assemble(_shift(groups["b"], partition.l_a + 1), ChainBasis.spin_chain(partition.l_b))
    return h_a, h_b


def partition_hamiltonian(params, partition: Partition) -> PartitionedHamiltonian:
    """Decompose a model Hamiltonian into the five tripartite blocks."""
    groups = split_terms(params, partition)
    basis = ChainBasis.spin_chain(params.length)
    blocks = {name: assemble(terms, basis) for name, terms in groups.items()}
    h_a_native, h_b_native = subchain_hamiltonians(params, partition)
    return PartitionedHamiltonian(
        partition=partition,
        basis=basis,
        h_a=blocks["a"],
        h_b=blocks["b"],
        h_m=blocks["m"],
        h_am=blocks["am"],
        h_bm=blocks["bm"],
        h_total=assemble(model_terms(params), basis),
        h_a_native=h_a_native,
        h_b_native=h_b_native,
    )
