"""Time-domain route to the split spectrum and the RF drive simulation.

The Green's function of the split probe on an eigenstate is a pure phase
sum, G(t) = -i sum_nm |gamma_nm|^2 exp(-i (E^A_n + E^B_m + eps_aux - eps) t)
for t >= 0, so it is synthesized directly from the overlap coefficients.
Its damped Fourier transform must reproduce the analytically broadened
peak comb; that equivalence is exercised by the tests.

The RF simulation drives the center site's two levels toward the
auxiliary level with a weak monochromatic field and reads the transition
rate off the early-time growth of the auxiliary population.  Because the
drive is monochromatic, the rotating-frame Hamiltonian

    H_rot(omega) = H_ext - omega * N_aux + V + V^dag,
    V = rabi_1 |aux><up| + rabi_2 |aux><down|   (at the center site)

is static, so propagation uses its exact eigendecomposition; N_aux
commutes with the frame change, leaving populations untouched.
"""

from dataclasses import dataclass

import numpy as np

from . import models
from .eigensolve import EigenSystem
from .errors import DimensionMismatchError, NonlinearDriveError
from .hilbert import SPIN_HALF, ChainBasis, lift_local, lift_product
from .models import Partition
from .splitting import SplitCoefficients, SplitOperatorSpec, Spectrum, compute_gamma

LINEAR_FIT_LO = 1e-6
LINEAR_FIT_HI = 1e-2
NONLINEAR_OCCUPATION = 0.1
DRIVE_SPACING_FRACTION = 0.05
MIN_DAMPED_DURATION = 10.0  # required eta * t_final


@dataclass(frozen=True)
class GreensSeries:
    """G(t) samples on a non-negative time grid, in units of 1/J."""

    t_grid: np.ndarray
    values: np.ndarray
    eps: float
    total_weight: float


@dataclass(frozen=True)
class RFSimConfig:
    """Weak-drive evolution controls for the RF response."""

    rabi_1: complex = 1e-3
    rabi_2: complex = 1e-3
    t_final: float = 60.0
    dt: float = 0.02
    eps_aux: float = 0.0
    site: int | None = None

    def __post_init__(self):
        if self.t_final <= 0 or self.dt <= 0:
            raise ValueError("t_final and dt must be positive")
        if self.rabi_1 == 0 and self.rabi_2 == 0:
            raise ValueError("at least one drive amplitude must be nonzero")


@dataclass(frozen=True)
class RFResponse:
    omegas: np.ndarray
    rates: np.ndarray
    fit_t_lo: float
    fit_t_hi: float
    max_occupation: float


def greens_from_coefficients(coeffs: SplitCoefficients, t_grid: np.ndarray) -> GreensSeries:
    """Exact phase-sum Green's function, no propagation error."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] < 0:
        raise ValueError("t_grid must be non-empty and non-negative")
    omegas = coeffs.frequencies().ravel()
    weights = coeffs.weights.ravel()
    values = np.empty(t_grid.size, dtype=complex)
    chunk = max(1, 2**22 // max(omegas.size, 1))
    for start in range(0, t_grid.size, chunk):
        ts = t_grid[start : start + chunk]
        values[start : start + chunk] = weights @ np.exp(-1j * np.outer(omegas, ts))
    return GreensSeries(
        t_grid=t_grid,
        values=-1j * values,
        eps=coeffs.eps,
        total_weight=coeffs.total_weight,
    )


def greens_function(
    state: np.ndarray,
    eps: float,
    spec: SplitOperatorSpec,
    partition: Partition,
    es_a: EigenSystem,
    es_b: EigenSystem,
    t_grid: np.ndarray,
) -> GreensSeries:
    coeffs = compute_gamma(state, eps, spec, partition, es_a, es_b)
    return greens_from_coefficients(coeffs, t_grid)


def _integration_weights(n: int, dt: float) -> np.ndarray:
    """Composite Simpson weights; even sample counts get a trapezoid tail."""
    if n < 3:
        w = np.full(n, dt)
        if n == 2:
            w[:] = 0.5 * dt
        return w
    m = n if n % 2 == 1 else n - 1
    w = np.zeros(n)
    w[:m] = dt / 3.0
    w[1:m - 1:2] = 4.0 * dt / 3.0
    w[2:m - 1:2] = 2.0 * dt / 3.0
    if m != n:
        w[n - 2] += 0.5 * dt
        w[n - 1] += 0.5 * dt
    return w


def spectrum_from_greens(gs: GreensSeries, eta: float, omega_grid: np.ndarray) -> Spectrum:
    """Damped Fourier transform of G(t), normalized like the peak comb.

    A(omega) = -(1/pi) Im integral_0^inf dt G(t) exp((i omega - eta) t),
    which for the phase-sum Green's function equals the sum of unit-area
    Lorentzians of half-width eta centered on the peaks.
    """
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    t = np.asarray(gs.t_grid, dtype=float)
    steps = np.diff(t)
    if t.size < 3 or steps.min() <= 0 or np.ptp(steps) > 1e-9 * steps[0]:
        raise ValueError("spectrum_from_greens requires a uniform increasing t_grid")
    warning = None
    if eta * t[-1] <= MIN_DAMPED_DURATION:
        warning = (
            f"eta * t_final = {eta * t[-1]:.3g} <= {MIN_DAMPED_DURATION:g}; "
            "truncation error may dominate"
        )
    weights = _integration_weights(t.size, float(steps[0]))
    damped = weights * np.asarray(gs.values) * np.exp(-eta * t)
    omega_grid = np.asarray(omega_grid, dtype=float)
    values = np.empty(omega_grid.size)
    chunk = max(1, 2**22 // t.size)
    for start in range(0, omega_grid.size, chunk):
        ws = omega_grid[start : start + chunk]
        transform = np.exp(1j * np.outer(ws, t)) @ damped
        values[start : start + chunk] = -np.imag(transform) / np.pi
    return Spectrum(
        frequencies=np.array([]),
        weights=np.array([]),
        eps=gs.eps,
        eta=float(eta),
        grid=omega_grid,
        values=values,
        warning=warning,
    )


def _extended_maps(partition: Partition) -> tuple[ChainBasis, np.ndarray, np.ndarray]:
    """Extended basis (3 levels at M) with spin-sector and aux-sector indices."""
    basis = ChainBasis.spin_chain_with_aux(partition.length, partition.m_site)
    d_a, d_b = partition.dim_a, partition.dim_b
    a = np.arange(d_a)[:, None, None]
    b = np.arange(d_b)[None, None, :]
    s = np.arange(2)[None, :, None]
    spin_indices = ((a * 3 + s) * d_b + b).ravel()
    aux_indices = ((np.arange(d_a)[:, None] * 3 + 2) * d_b + np.arange(d_b)[None, :]).ravel()
    return basis, spin_indices, aux_indices


def _pad_local(op: np.ndarray) -> np.ndarray:
    """2x2 site operator embedded in the 3-level site, zero on the aux level."""
    padded = np.zeros((3, 3), dtype=complex)
    padded[:2, :2] = op
    return padded


def extend_model(params, partition: Partition, eps_aux: float = 0.0) -> np.ndarray:
    """Model Hamiltonian on the chain whose center site has an auxiliary level.

    Every coupling or field operator touching the center site annihilates
    the auxiliary level, so on the aux sector the Hamiltonian reduces to
    H_A + H_B + eps_aux (the chain is cut).
    """
    if params.length != partition.length:
        raise DimensionMismatchError(
            f"model has {params.length} sites, partition covers {partition.length}"
        )
    basis, _, aux_idx = _extended_maps(partition)
    m = partition.m_site
    h_ext = np.zeros((basis.dim, basis.dim), dtype=complex)
    for term in models.model_terms(params):
        site_ops = {
            site: _pad_local(SPIN_HALF[key]) if site == m else SPIN_HALF[key]
            for site, key in term.ops
        }
        h_ext += term.coeff * lift_product(site_ops, basis)
    h_ext[aux_idx, aux_idx] += eps_aux
    return h_ext


def extend_state(state: np.ndarray, partition: Partition) -> np.ndarray:
    basis, spin_idx, _ = _extended_maps(partition)
    state = np.asarray(state, dtype=complex)
    if state.size != spin_idx.size:
        raise DimensionMismatchError(
            f"state length {state.size} does not match chain dim {spin_idx.size}"
        )
    psi = np.zeros(basis.dim, dtype=complex)
    psi[spin_idx] = state
    return psi


def rf_response(
    model_params,
    partition: Partition,
    state: np.ndarray,
    cfg: RFSimConfig,
    freq_grid: np.ndarray,
) -> RFResponse:
    """Transition rate into the auxiliary level versus drive frequency.

    For each frequency the state is propagated exactly under the static
    rotating-frame Hamiltonian and the auxiliary population is fit with a
    straight line over a common early-time window, chosen as the earliest
    span where the strongest response lies between 1e-6 and 1e-2 (the same
    window for every frequency, so peak-rate ratios track the underlying
    spectral weights).
    """
    if cfg.site is not None and cfg.site != partition.m_site:
        raise DimensionMismatchError(
            f"drive site {cfg.site} does not match partition center {partition.m_site}"
        )
    basis, _, aux_idx = _extended_maps(partition)
    h_ext = extend_model(model_params, partition, cfg.eps_aux)
    psi0 = extend_state(state, partition)

    drive_local = np.zeros((3, 3), dtype=complex)
    drive_local[2, 0] = cfg.rabi_1
    drive_local[2, 1] = cfg.rabi_2
    drive = lift_local(drive_local, partition.m_site, basis)
    drive = drive + drive.conj().T
    n_aux_diag = np.zeros(basis.dim)
    n_aux_diag[aux_idx] = 1.0

    energies = np.linalg.eigvalsh(h_ext)
    spacing = float(energies[-1] - energies[0]) / max(basis.dim - 1, 1)
    max_rabi = max(abs(cfg.rabi_1), abs(cfg.rabi_2))
    if spacing > 0 and max_rabi > DRIVE_SPACING_FRACTION * spacing:
        raise NonlinearDriveError(
            f"drive amplitude {max_rabi:g} exceeds {DRIVE_SPACING_FRACTION} of the "
            f"mean level spacing {spacing:g}; use a weaker drive"
        )
    h_norm = float(np.max(np.abs(energies)))
    if cfg.dt * h_norm >= 0.1:
        raise ValueError(
            f"dt = {cfg.dt} does not resolve the energy scale {h_norm:g} (need dt*|H| < 0.1)"
        )

    t = np.arange(0.0, cfg.t_final + 0.5 * cfg.dt, cfg.dt)
    freq_grid = np.asarray(freq_grid, dtype=float)
    occupations = np.empty((freq_grid.size, t.size))
    for k, omega in enumerate(freq_grid):
        h_rot = h_ext - omega * np.diag(n_aux_diag) + drive
        evals, evecs = np.linalg.eigh(h_rot)
        c0 = evecs.conj().T @ psi0
        amps = evecs @ (c0[:, None] * np.exp(-1j * np.outer(evals, t)))
        occupations[k] = (np.abs(amps[aux_idx, :]) ** 2).sum(axis=0)

    peak_curve = occupations.max(axis=0)
    max_occ = float(peak_curve.max())
    if max_occ > NONLINEAR_OCCUPATION:
        raise NonlinearDriveError(
            f"auxiliary population reached {max_occ:.3g} > {NONLINEAR_OCCUPATION}; "
            "use a weaker drive or shorter t_final"
        )
    above = np.flatnonzero(peak_curve >= LINEAR_FIT_LO)
    if above.size == 0:
        raise NonlinearDriveError(
            "response never exceeded the fit floor; use a stronger drive or longer t_final"
        )
    j_lo = int(above[0])
    over = np.flatnonzero(peak_curve > LINEAR_FIT_HI)
    j_hi = int(over[0]) - 1 if over.size else t.size - 1
    if j_hi - j_lo < 4:
        raise NonlinearDriveError(
            "fewer than 5 samples in the linear-fit window; reduce the drive or dt"
        )
    window = slice(j_lo, j_hi + 1)
    design = np.vstack([t[window], np.ones(j_hi + 1 - j_lo)]).T
    slopes, _, _, _ = np.linalg.lstsq(design, occupations[:, window].T, rcond=None)
    return RFResponse(
        omegas=freq_grid,
        rates=slopes[0],
        fit_t_lo=float(t[j_lo]),
        fit_t_hi=float(t[j_hi]),
        max_occupation=max_occ,
    )
