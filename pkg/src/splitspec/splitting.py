"""Split-probe machinery: overlap coefficients, spectra, spectral entropy.

The probe transfers the center site M of a chain to a decoupled auxiliary
level, cutting the chain into independent halves A and B.  Probing an
eigenstate |psi> with energy eps produces the response

    A(omega) = sum_{n,m} |gamma_nm|^2 delta(omega + eps - E^A_n - E^B_m - eps_aux)

where gamma_nm is the overlap of the cut state with the product of the
n-th eigenstate of H_A and the m-th of H_B.  A single surviving peak
signals that |psi> is a product state across A | M | B; the Shannon
entropy of the normalized weights quantifies how far from separable the
state is.

Weights are normalized here so that the frequency integral of a broadened
spectrum equals the total split weight sum |gamma_nm|^2 (Lorentzians carry
unit area).
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .eigensolve import EigenSystem
from .errors import DimensionMismatchError, SplitAnnihilatedError
from .hilbert import ChainBasis, lift_local
from .models import Partition

MERGE_TOL = 1e-8
WEIGHT_CUTOFF = 1e-10
BROADENED_GRID_POINTS = 2001
BROADENED_GRID_PADDING = 50.0  # in units of eta


@dataclass(frozen=True)
class SplitOperatorSpec:
    """Complex weights (omega_up, omega_down) of the two transfer channels.

    ``site`` may pin the probed site explicitly; by default the partition's
    center site is used.  ``eps_aux`` is the energy of the auxiliary level.
    """

    omega_up: complex = 1.0 / math.sqrt(2.0)
    omega_down: complex = 1.0 / math.sqrt(2.0)
    eps_aux: float = 0.0
    site: int | None = None

    def __post_init__(self):
        if self.omega_up == 0 and self.omega_down == 0:
            raise ValueError("at least one of omega_up, omega_down must be nonzero")


@dataclass(frozen=True)
class SplitCoefficients:
    """|gamma_nm|^2 on the product eigenbasis of the two half chains."""

    weights: np.ndarray  # (d_A, d_B), real, >= 0
    eps_a: np.ndarray
    eps_b: np.ndarray
    eps: float
    eps_aux: float = 0.0

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def frequencies(self) -> np.ndarray:
        """Peak positions omega_nm = E^A_n + E^B_m - eps + eps_aux, shape (d_A, d_B)."""
        return self.eps_a[:, None] + self.eps_b[None, :] - self.eps + self.eps_aux


@dataclass(frozen=True)
class Spectrum:
    """Merged delta peaks, optionally with a Lorentzian-broadened curve."""

    frequencies: np.ndarray
    weights: np.ndarray
    eps: float
    eps_aux: float = 0.0
    eta: float | None = None
    grid: np.ndarray | None = None
    values: np.ndarray | None = None
    warning: str | None = None

    @property
    def peaks(self) -> list[tuple[float, float]]:
        return [(float(f), float(w)) for f, w in zip(self.frequencies, self.weights)]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class SpectralEntropyResult:
    e_ent: float
    n_nonzero: int
    basis: str
    # entropy in the other basis, set when it differs by more than 1e-6
    e_ent_alt: float | None = None


def apply_split(state: np.ndarray, spec: SplitOperatorSpec, partition: Partition) -> np.ndarray:
    """Amplitudes of the cut state on the A x B product basis.

    c_AB = omega_up * psi(A, up, B) + omega_down * psi(A, down, B);
    its squared norm is <psi| S^dag S |psi>.
    """
    if spec.site is not None and spec.site != partition.m_site:
        raise DimensionMismatchError(
            f"split site {spec.site} does not match partition center {partition.m_site}"
        )
    state = np.asarray(state, dtype=complex)
    dim = partition.dim_a * 2 * partition.dim_b
    if state.size != dim:
        raise DimensionMismatchError(
            f"state length {state.size} does not match chain dim {dim}"
        )
    psi = state.reshape(partition.dim_a, 2, partition.dim_b)
    return (spec.omega_up * psi[:, 0, :] + spec.omega_down * psi[:, 1, :]).ravel()


def split_overlap_operator(spec: SplitOperatorSpec, partition: Partition) -> np.ndarray:
    """S^dag S as a dense operator on the full (uncut) chain basis.

    Independent route to the total weight: sum |gamma_nm|^2 must equal
    <psi| S^dag S |psi> for any state.
    """
    up, down = spec.omega_up, spec.omega_down
    local = np.array(
        [
            [abs(up) ** 2, np.conj(up) * down],
            [np.conj(down) * up, abs(down) ** 2],
        ],
        dtype=complex,
    )
    basis = ChainBasis.spin_chain(partition.length)
    return lift_local(local, partition.m_site, basis)


def compute_gamma(
    state: np.ndarray,
    eps: float,
    spec: SplitOperatorSpec,
    partition: Partition,
    es_a: EigenSystem,
    es_b: EigenSystem,
) -> SplitCoefficients:
    """Overlap weights of the cut state with every half-chain eigenpair.

    Computed as a two-sided basis rotation of the cut amplitude matrix,
    gamma = V_A^dag C conj(V_B), rather than d_A * d_B individual inner
    products.
    """
    if es_a.dim != partition.dim_a or es_b.dim != partition.dim_b:
        raise DimensionMismatchError(
            f"half-chain eigensystems of dims ({es_a.dim}, {es_b.dim}) do not match "
            f"partition dims ({partition.dim_a}, {partition.dim_b})"
        )
    cut = apply_split(state, spec, partition).reshape(partition.dim_a, partition.dim_b)
    gamma = es_a.vectors.conj().T @ cut @ es_b.vectors.conj()
    return SplitCoefficients(
        weights=np.abs(gamma) ** 2,
        eps_a=np.asarray(es_a.values, dtype=float),
        eps_b=np.asarray(es_b.values, dtype=float),
        eps=float(eps),
        eps_aux=float(spec.eps_aux),
    )


def _merge_peaks(omegas: np.ndarray, weights: np.ndarray, merge_tol: float):
    """Cluster sorted frequencies closer than merge_tol; weight-average positions."""
    order = np.argsort(omegas, kind="stable")
    omegas = omegas[order]
    weights = weights[order]
    boundaries = np.flatnonzero(np.diff(omegas) > merge_tol) + 1
    merged_f, merged_w = [], []
    for chunk_f, chunk_w in zip(np.split(omegas, boundaries), np.split(weights, boundaries)):
        total = chunk_w.sum()
        if total <= 0.0:
            continue
        merged_f.append(float(np.dot(chunk_f, chunk_w) / total))
        merged_w.append(float(total))
    return np.array(merged_f), np.array(merged_w)


def lorentzian_comb(grid: np.ndarray, frequencies: np.ndarray, weights: np.ndarray, eta: float) -> np.ndarray:
    """Sum of unit-area Lorentzians centered on the peaks."""
    grid = np.asarray(grid, dtype=float)
    delta = grid[:, None] - np.asarray(frequencies)[None, :]
    return (np.asarray(weights)[None, :] * (eta / np.pi) / (delta**2 + eta**2)).sum(axis=1)


def build_spectrum(
    coeffs: SplitCoefficients,
    merge_tol: float = MERGE_TOL,
    weight_cutoff: float = WEIGHT_CUTOFF,
    broaden: float | None = None,
    grid: np.ndarray | None = None,
) -> Spectrum:
    """Merge coefficient deltas into peaks and optionally broaden them.

    ``weight_cutoff`` is relative to the total weight and is applied after
    merging.  ``broaden`` is a Lorentzian half-width eta; the default grid
    spans the surviving peaks plus 50 eta on each side.
    """
    if merge_tol <= 0:
        raise ValueError(f"merge_tol must be positive, got {merge_tol}")
    if weight_cutoff < 0:
        raise ValueError(f"weight_cutoff must be >= 0, got {weight_cutoff}")
    total = coeffs.total_weight
    if total == 0.0:
        raise SplitAnnihilatedError("split operator annihilated the state: zero total weight")
    freqs, weights = _merge_peaks(
        coeffs.frequencies().ravel(), coeffs.weights.ravel(), merge_tol
    )
    keep = weights > weight_cutoff * total
    freqs, weights = freqs[keep], weights[keep]
    eta = broadened = values = None
    if broaden is not None:
        if broaden <= 0:
            raise ValueError(f"eta must be positive, got {broaden}")
        eta = float(broaden)
        if grid is None:
            pad = BROADENED_GRID_PADDING * eta
            grid = np.linspace(freqs.min() - pad, freqs.max() + pad, BROADENED_GRID_POINTS)
        else:
            grid = np.asarray(grid, dtype=float)
        values = lorentzian_comb(grid, freqs, weights, eta)
        broadened = grid
    return Spectrum(
        frequencies=freqs,
        weights=weights,
        eps=coeffs.eps,
        eps_aux=coeffs.eps_aux,
        eta=eta,
        grid=broadened,
        values=values,
    )


def _entropy_of_weights(weights: np.ndarray, weight_cutoff: float) -> tuple[float, int]:
    total = float(weights.sum())
    if total == 0.0:
        raise SplitAnnihilatedError("zero total weight: spectral entropy undefined")
    kept = weights[weights > weight_cutoff * total]
    p = kept / kept.sum()
    entropy = float(-(p * np.log(p)).sum())
    return (entropy if entropy > 0.0 else 0.0), int(kept.size)


def spectral_entropy(
    source,
    basis: str = "coefficient",
    weight_cutoff: float = WEIGHT_CUTOFF,
    merge_tol: float = MERGE_TOL,
) -> SpectralEntropyResult:
    """Shannon entropy of the normalized split weights, in nats.

    ``basis="coefficient"`` uses the raw |gamma_nm|^2 (requires
    :class:`SplitCoefficients`); ``basis="merged_peak"`` uses merged peak
    weights.  When both are available and differ by more than 1e-6 (only
    possible through frequency collisions), the other value is reported in
    ``e_ent_alt``.
    """
    if basis not in ("coefficient", "merged_peak"):
        raise ValueError(f"unknown entropy basis {basis!r}")
    if isinstance(source, SplitCoefficients):
        e_coeff, n_coeff = _entropy_of_weights(source.weights.ravel(), weight_cutoff)
        spectrum = build_spectrum(source, merge_tol=merge_tol, weight_cutoff=weight_cutoff)
        e_peak, n_peak = _entropy_of_weights(spectrum.weights, weight_cutoff)
        if basis == "coefficient":
            e_ent, n_nonzero, alt = e_coeff, n_coeff, e_peak
        else:
            e_ent, n_nonzero, alt = e_peak, n_peak, e_coeff
        return SpectralEntropyResult(
            e_ent=e_ent,
            n_nonzero=n_nonzero,
            basis=basis,
            e_ent_alt=alt if abs(alt - e_ent) > 1e-6 else None,
        )
    if isinstance(source, Spectrum):
        if basis == "coefficient":
            raise ValueError("coefficient-basis entropy requires SplitCoefficients")
        e_ent, n_nonzero = _entropy_of_weights(np.asarray(source.weights), weight_cutoff)
        return SpectralEntropyResult(e_ent=e_ent, n_nonzero=n_nonzero, basis=basis)
    raise TypeError(f"expected SplitCoefficients or Spectrum, got {type(source).__name__}")


def is_single_peak(spectrum: Spectrum) -> bool:
    """True iff exactly one merged peak survived the weight cutoff."""
    n = int(np.asarray(spectrum.frequencies).size)
    if n == 0:
        raise SplitAnnihilatedError("spectrum has no surviving peaks")
    return n == 1


def random_split_spec(rng: np.random.Generator, eps_aux: float = 0.0) -> SplitOperatorSpec:
    """Haar-random (omega_up, omega_down) on the complex unit sphere."""
    raw = rng.standard_normal(4)
    vec = raw[:2] + 1j * raw[2:]
    vec = vec / np.linalg.norm(vec)
    return SplitOperatorSpec(omega_up=complex(vec[0]), omega_down=complex(vec[1]), eps_aux=eps_aux)


def spectrum_to_dict(spectrum: Spectrum) -> dict:
    """JSON-ready form: {eps, eps_aux, peaks, [eta, grid, values]}."""
    out = {
        "eps": spectrum.eps,
        "eps_aux": spectrum.eps_aux,
        "peaks": [[float(f), float(w)] for f, w in spectrum.peaks],
    }
    if spectrum.eta is not None:
        out["eta"] = spectrum.eta
        out["grid"] = [float(x) for x in spectrum.grid]
        out["values"] = [float(x) for x in spectrum.values]
    if spectrum.warning is not None:
        out["warning"] = spectrum.warning
    return out


def spectrum_to_json(spectrum: Spectrum) -> str:
    return json.dumps(spectrum_to_dict(spectrum), sort_keys=True, indent=2)


def write_spectrum_csv(spectrum: Spectrum, path) -> None:
    """Peak list as CSV with the fixed header ``omega,weight``."""
    with open(path, "w", newline="\n") as fh:
        fh.write("omega,weight\n")
        for f, w in spectrum.peaks:
            fh.write(f"{f!r},{w!r}\n")
