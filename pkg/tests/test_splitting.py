import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitspec import experiments
from splitspec.eigensolve import eigh
from splitspec.errors import DimensionMismatchError, SplitAnnihilatedError
from splitspec.hilbert import SPIN_HALF, ChainBasis, all_down, basis_state, expectation
from splitspec.models import Partition, XYParams
from splitspec.splitting import (
    SplitCoefficients,
    SplitOperatorSpec,
    Spectrum,
    apply_split,
    build_spectrum,
    compute_gamma,
    is_single_peak,
    lorentzian_comb,
    random_split_spec,
    spectral_entropy,
    spectrum_to_dict,
    split_overlap_operator,
    write_spectrum_csv,
)

EQUAL = SplitOperatorSpec()  # (1, 1) / sqrt(2)


def ghz_state(length):
    basis = ChainBasis.spin_chain(length)
    return (basis_state(basis, (0,) * length) + basis_state(basis, (1,) * length)) / np.sqrt(2)


def random_state(rng, dim):
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def end_field_eigensystems(h_end):
    """Single-site A and B blocks: a field h_end Sz on each end site."""
    return eigh(h_end * SPIN_HALF["sz"]), eigh(h_end * SPIN_HALF["sz"])


class TestApplySplit:
    def test_down_channel_on_all_down(self):
        part = Partition.centered(5)
        spec = SplitOperatorSpec(omega_up=0.0, omega_down=1.0)
        cut = apply_split(all_down(ChainBasis.spin_chain(5)), spec, part)
        expected = np.zeros(16)
        expected[-1] = 1.0
        np.testing.assert_allclose(cut, expected, atol=1e-15)

    def test_up_channel_annihilates_all_down(self):
        part = Partition.centered(5)
        spec = SplitOperatorSpec(omega_up=1.0, omega_down=0.0)
        cut = apply_split(all_down(ChainBasis.spin_chain(5)), spec, part)
        assert np.max(np.abs(cut)) == 0.0

    def test_ghz_examples(self):
        part = Partition.centered(3)
        cut = apply_split(ghz_state(3), EQUAL, part)
        expected = np.zeros(4, dtype=complex)
        expected[0] = 0.5   # |up up>
        expected[3] = 0.5   # |down down>
        np.testing.assert_allclose(cut, expected, atol=1e-15)
        assert np.linalg.norm(cut) ** 2 == pytest.approx(0.5, abs=1e-12)

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatchError):
            apply_split(np.ones(8), EQUAL, Partition.centered(5))

    def test_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            SplitOperatorSpec(omega_up=0.0, omega_down=0.0)


class TestComputeGamma:
    def test_product_ground_state_single_weight(self):
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=0.0, h=1.5))
        coeffs = compute_gamma(
            sol.es.state(0), float(sol.es.values[0]), EQUAL, sol.partition,
            sol.es_a, sol.es_b,
        )
        weights = np.sort(coeffs.weights.ravel())[::-1]
        assert weights[0] == pytest.approx(coeffs.total_weight, abs=1e-10)
        assert weights[1] < 1e-20
        assert weights[0] / coeffs.total_weight == pytest.approx(1.0, abs=1e-10)

    def test_ghz_with_end_fields_two_quarters(self):
        part = Partition.centered(3)
        es_a, es_b = end_field_eigensystems(0.7)
        coeffs = compute_gamma(ghz_state(3), 0.0, EQUAL, part, es_a, es_b)
        flat = np.sort(coeffs.weights.ravel())[::-1]
        np.testing.assert_allclose(flat[:2], [0.25, 0.25], atol=1e-12)
        assert flat[2:].max() < 1e-20

    def test_parseval_over_complete_split_basis(self):
        rng = np.random.default_rng(2)
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=0.4, h=0.7))
        for _ in range(5):
            psi = random_state(rng, 32)
            spec = random_split_spec(rng)
            coeffs = compute_gamma(psi, 0.0, spec, sol.partition, sol.es_a, sol.es_b)
            cut_norm = np.linalg.norm(apply_split(psi, spec, sol.partition)) ** 2
            assert coeffs.total_weight == pytest.approx(cut_norm, abs=1e-10)
            bound = 2.0 * max(abs(spec.omega_up), abs(spec.omega_down)) ** 2
            assert coeffs.total_weight <= bound + 1e-12

    def test_sum_rule_against_independent_operator(self):
        rng = np.random.default_rng(3)
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=1.0, h=0.7))
        for _ in range(5):
            psi = random_state(rng, 32)
            spec = random_split_spec(rng)
            coeffs = compute_gamma(psi, 0.0, spec, sol.partition, sol.es_a, sol.es_b)
            overlap_op = split_overlap_operator(spec, sol.partition)
            assert coeffs.total_weight == pytest.approx(
                expectation(psi, overlap_op).real, abs=1e-10
            )

    def test_dimension_guard(self):
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=0.0, h=1.0))
        with pytest.raises(DimensionMismatchError):
            compute_gamma(np.ones(128), 0.0, EQUAL, Partition.centered(7),
                          sol.es_a, sol.es_b)


class TestBuildSpectrum:
    def test_separable_state_single_peak(self):
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=0.0, h=1.5))
        coeffs = compute_gamma(
            sol.es.state(0), float(sol.es.values[0]), EQUAL, sol.partition,
            sol.es_a, sol.es_b,
        )
        spectrum = build_spectrum(coeffs)
        assert is_single_peak(spectrum)
        assert spectrum.weights.sum() == pytest.approx(coeffs.total_weight, abs=1e-10)

    def test_ghz_peaks_split_by_twice_the_field(self):
        part = Partition.centered(3)
        h_end = 0.7
        es_a, es_b = end_field_eigensystems(h_end)
        coeffs = compute_gamma(ghz_state(3), 0.0, EQUAL, part, es_a, es_b)
        spectrum = build_spectrum(coeffs)
        assert spectrum.frequencies.size == 2
        assert not is_single_peak(spectrum)
        np.testing.assert_allclose(spectrum.frequencies, [-h_end, h_end], atol=1e-12)
        assert spectrum.frequencies[1] - spectrum.frequencies[0] == pytest.approx(2 * h_end)
        assert np.all(np.diff(spectrum.frequencies) > 0)

    def test_merging_uses_weight_averaged_position(self):
        coeffs = SplitCoefficients(
            weights=np.array([[0.3, 0.1], [0.0, 0.6]]),
            eps_a=np.array([0.0, 1.0]),
            eps_b=np.array([0.0, 5e-9]),
            eps=0.0,
        )
        spectrum = build_spectrum(coeffs, merge_tol=1e-8)
        # (0,0) and (0,1) merge around 0; (1,0) carries no weight; (1,1) survives
        assert spectrum.frequencies.size == 2
        assert spectrum.weights[0] == pytest.approx(0.4, abs=1e-15)
        assert spectrum.frequencies[0] == pytest.approx((0.3 * 0.0 + 0.1 * 5e-9) / 0.4)
        assert spectrum.weights[1] == pytest.approx(0.6)

    def test_weight_cutoff_is_relative(self):
        coeffs = SplitCoefficients(
            weights=np.array([[1.0, 1e-12]]),
            eps_a=np.array([0.0]),
            eps_b=np.array([0.0, 3.0]),
            eps=0.0,
        )
        assert build_spectrum(coeffs).frequencies.size == 1
        assert build_spectrum(coeffs, weight_cutoff=1e-13).frequencies.size == 2

    def test_broadened_curve_integrates_to_total_weight(self):
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=1.0, h=1.0))
        coeffs = compute_gamma(
            sol.es.state(0), float(sol.es.values[0]), EQUAL, sol.partition,
            sol.es_a, sol.es_b,
        )
        eta = 0.05
        bare = build_spectrum(coeffs)
        # unit-area Lorentzians hold ~98.7% of their mass within +-50 eta;
        # the 1e-3 integral check needs the +-700 eta window
        pad = 700 * eta
        grid = np.linspace(bare.frequencies.min() - pad, bare.frequencies.max() + pad, 20001)
        spectrum = build_spectrum(coeffs, broaden=eta, grid=grid)
        integral = np.trapezoid(spectrum.values, spectrum.grid)
        assert integral == pytest.approx(coeffs.total_weight, rel=1e-3)

    def test_zero_weight_raises_structured_error(self):
        part = Partition.centered(5)
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=0.0, h=1.5))
        spec = SplitOperatorSpec(omega_up=1.0, omega_down=0.0)
        coeffs = compute_gamma(all_down(ChainBasis.spin_chain(5)), 0.0, spec, part,
                               sol.es_a, sol.es_b)
        with pytest.raises(SplitAnnihilatedError):
            build_spectrum(coeffs)
        with pytest.raises(SplitAnnihilatedError):
            spectral_entropy(coeffs)

    def test_empty_spectrum_rejected_by_is_single_peak(self):
        empty = Spectrum(frequencies=np.array([]), weights=np.array([]), eps=0.0)
        with pytest.raises(SplitAnnihilatedError):
            is_single_peak(empty)


class TestSpectralEntropy:
    def test_product_state_zero(self):
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=0.0, h=1.5))
        coeffs = compute_gamma(
            sol.es.state(0), float(sol.es.values[0]), EQUAL, sol.partition,
            sol.es_a, sol.es_b,
        )
        result = spectral_entropy(coeffs)
        assert result.e_ent == 0.0
        assert result.n_nonzero == 1
        assert result.e_ent_alt is None

    def test_two_equal_weights_give_ln2(self):
        coeffs = SplitCoefficients(
            weights=np.array([[0.25, 0.0], [0.0, 0.25]]),
            eps_a=np.array([-0.35, 0.35]),
            eps_b=np.array([-0.35, 0.35]),
            eps=0.0,
        )
        result = spectral_entropy(coeffs)
        assert result.e_ent == pytest.approx(np.log(2), abs=1e-12)
        assert result.n_nonzero == 2

    def test_merged_basis_reported_when_frequencies_collide(self):
        coeffs = SplitCoefficients(
            weights=np.array([[0.25, 0.0], [0.0, 0.25]]),
            eps_a=np.array([-0.35, 0.35]),
            eps_b=np.array([0.35, -0.35]),  # both pairs land on frequency zero
            eps=0.0,
        )
        result = spectral_entropy(coeffs, "coefficient")
        assert result.e_ent == pytest.approx(np.log(2))
        assert result.e_ent_alt == pytest.approx(0.0, abs=1e-12)
        merged = spectral_entropy(coeffs, "merged_peak")
        assert merged.e_ent == pytest.approx(0.0, abs=1e-12)
        assert merged.n_nonzero == 1

    def test_gapless_entropy_grows_logarithmically(self):
        # spectral entropy of the gapless ground state increases with size
        # and the log model fits better than the linear one
        values = []
        for length in (5, 7, 9, 11):
            sol = experiments.solve_chain(XYParams(length=length, j=1.0, alpha=0.0, h=0.0))
            coeffs = compute_gamma(
                sol.es.state(0), float(sol.es.values[0]), EQUAL, sol.partition,
                sol.es_a, sol.es_b,
            )
            values.append(spectral_entropy(coeffs).e_ent)
        assert all(b > a for a, b in zip(values, values[1:]))
        fits = experiments.fit_scaling((5, 7, 9, 11), values, flat_tol=0.05)
        assert fits["fits"]["log"]["ssr"] < fits["fits"]["linear"]["ssr"]
        assert fits["selected"] == "log"

    def test_entropy_from_spectrum_requires_merged_basis(self):
        spectrum = Spectrum(frequencies=np.array([0.0]), weights=np.array([1.0]), eps=0.0)
        assert spectral_entropy(spectrum, "merged_peak").e_ent == 0.0
        with pytest.raises(ValueError):
            spectral_entropy(spectrum, "coefficient")


class TestCovariance:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 2 * np.pi))
    def test_common_phase_leaves_weights_unchanged(self, seed, phase):
        rng = np.random.default_rng(seed)
        part = Partition.centered(5)
        sol = _CACHED_SOLUTION
        psi = random_state(rng, 32)
        base = random_split_spec(rng)
        rotated = SplitOperatorSpec(
            omega_up=base.omega_up * np.exp(1j * phase),
            omega_down=base.omega_down * np.exp(1j * phase),
        )
        w0 = compute_gamma(psi, 0.0, base, part, sol.es_a, sol.es_b).weights
        w1 = compute_gamma(psi, 0.0, rotated, part, sol.es_a, sol.es_b).weights
        assert np.max(np.abs(w0 - w1)) < 1e-12

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
    def test_positive_rescaling_scales_weights_quadratically(self, seed, scale):
        rng = np.random.default_rng(seed)
        part = Partition.centered(5)
        sol = _CACHED_SOLUTION
        psi = random_state(rng, 32)
        base = random_split_spec(rng)
        scaled = SplitOperatorSpec(
            omega_up=base.omega_up * scale, omega_down=base.omega_down * scale
        )
        c0 = compute_gamma(psi, 0.0, base, part, sol.es_a, sol.es_b)
        c1 = compute_gamma(psi, 0.0, scaled, part, sol.es_a, sol.es_b)
        assert np.max(np.abs(c1.weights - scale**2 * c0.weights)) < 1e-9 * scale**2
        e0 = spectral_entropy(c0)
        e1 = spectral_entropy(c1)
        assert e1.e_ent == pytest.approx(e0.e_ent, abs=1e-9)
        assert is_single_peak(build_spectrum(c0)) == is_single_peak(build_spectrum(c1))


class TestCriterionSmallChain:
    def test_single_peak_iff_triseparable_all_eigenstates(self):
        from splitspec.entanglement import triseparable_oracle

        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=1.0, h=0.5))
        rng = np.random.default_rng(99)
        for index in range(sol.es.dim):
            state = sol.es.state(index)
            oracle = triseparable_oracle(state, sol.partition)
            agree = conclusive = 0
            for _ in range(5):
                spec = random_split_spec(rng)
                coeffs = compute_gamma(
                    state, float(sol.es.values[index]), spec, sol.partition,
                    sol.es_a, sol.es_b,
                )
                try:
                    entropy = spectral_entropy(coeffs)
                    spectrum = build_spectrum(coeffs)
                except SplitAnnihilatedError:
                    continue
                single = is_single_peak(spectrum)
                if single and entropy.n_nonzero > 1:
                    continue  # collided frequencies: criterion assumption broken
                conclusive += 1
                agree += single == oracle
            if conclusive:
                assert agree >= conclusive - 1

    def test_zero_entropy_iff_single_coefficient(self):
        sol = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=0.0, h=1.5))
        for index in range(sol.es.dim):
            coeffs = compute_gamma(
                sol.es.state(index), float(sol.es.values[index]), EQUAL, sol.partition,
                sol.es_a, sol.es_b,
            )
            result = spectral_entropy(coeffs)
            assert (result.e_ent < 1e-12) == (result.n_nonzero == 1)


class TestSerialization:
    def test_json_round_trip_fields(self):
        spectrum = Spectrum(
            frequencies=np.array([-0.5, 0.5]), weights=np.array([0.25, 0.25]),
            eps=-1.0, eps_aux=0.0,
        )
        payload = spectrum_to_dict(spectrum)
        assert payload == {
            "eps": -1.0, "eps_aux": 0.0, "peaks": [[-0.5, 0.25], [0.5, 0.25]],
        }

    def test_broadened_fields_included(self):
        grid = np.linspace(-1, 1, 5)
        spectrum = Spectrum(
            frequencies=np.array([0.0]), weights=np.array([1.0]), eps=0.0,
            eta=0.1, grid=grid, values=lorentzian_comb(grid, [0.0], [1.0], 0.1),
        )
        payload = spectrum_to_dict(spectrum)
        assert payload["eta"] == 0.1
        assert len(payload["grid"]) == len(payload["values"]) == 5

    def test_csv_schema(self, tmp_path):
        spectrum = Spectrum(
            frequencies=np.array([0.75]), weights=np.array([0.5]), eps=-3.75
        )
        path = tmp_path / "peaks.csv"
        write_spectrum_csv(spectrum, path)
        assert path.read_text() == "omega,weight\n0.75,0.5\n"


_CACHED_SOLUTION = experiments.solve_chain(XYParams(length=5, j=1.0, alpha=0.3, h=0.6))
