import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitspec.errors import DimensionMismatchError, InvalidPartitionError
from splitspec.hilbert import (
    SPIN_HALF,
    ChainBasis,
    all_down,
    basis_state,
    expectation,
    lift_local,
    lift_product,
    partial_trace,
)

DOWN = 1  # local level index of spin-down


def lift_by_enumeration(op, site, basis):
    """Independent oracle: build the embedded operator entry by entry."""
    dim = basis.dim
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        config = basis.decode(col)
        for local_row in range(basis.dims[site]):
            amp = op[local_row, config[site]]
            if amp == 0:
                continue
            new_config = list(config)
            new_config[site] = local_row
            out[basis.encode(tuple(new_config)), col] += amp
    return out


def trace_by_index_sums(state, keep, basis):
    """Independent oracle: reduced density matrix by explicit index summation."""
    keep = sorted(keep)
    traced = [s for s in range(basis.length) if s not in keep]
    d_keep = int(np.prod([basis.dims[s] for s in keep]))
    rho = np.zeros((d_keep, d_keep), dtype=complex)
    kept_basis = ChainBasis(tuple(basis.dims[s] for s in keep))
    for i in range(basis.dim):
        ci = basis.decode(i)
        for j in range(basis.dim):
            cj = basis.decode(j)
            if all(ci[s] == cj[s] for s in traced):
                row = kept_basis.encode(tuple(ci[s] for s in keep))
                col = kept_basis.encode(tuple(cj[s] for s in keep))
                rho[row, col] += state[i] * np.conj(state[j])
    return rho


def random_state(rng, dim):
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


class TestChainBasis:
    def test_dim_and_roundtrip(self):
        basis = ChainBasis((2, 3, 2))
        assert basis.dim == 12
        for k in range(basis.dim):
            assert basis.encode(basis.decode(k)) == k

    def test_site_zero_most_significant(self):
        basis = ChainBasis.spin_chain(3)
        assert basis.encode((1, 0, 0)) == 4
        assert basis.encode((0, 0, 1)) == 1

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(2, 4), min_size=1, max_size=6), st.integers(0, 10**6))
    def test_encode_decode_bijection(self, dims, raw_index):
        basis = ChainBasis(tuple(dims))
        index = raw_index % basis.dim
        assert basis.encode(basis.decode(index)) == index

    def test_rejects_bad_local_dims(self):
        with pytest.raises(InvalidPartitionError):
            ChainBasis((2, 1, 2))
        with pytest.raises(InvalidPartitionError):
            ChainBasis(())

    def test_block_dims_requires_contiguous(self):
        basis = ChainBasis.spin_chain(4)
        assert basis.block_dims([1, 2]) == (2, 4, 2)
        with pytest.raises(InvalidPartitionError):
            basis.block_dims([0, 2])
        with pytest.raises(InvalidPartitionError):
            basis.block_dims([3, 4])


class TestLiftLocal:
    def test_identity_lifts_to_identity(self):
        basis = ChainBasis.spin_chain(3)
        np.testing.assert_array_equal(lift_local(np.eye(2), 1, basis), np.eye(8))

    def test_sz_on_first_site_of_two(self):
        basis = ChainBasis.spin_chain(2)
        lifted = lift_local(SPIN_HALF["sz"], 0, basis)
        np.testing.assert_allclose(lifted, np.diag([0.5, 0.5, -0.5, -0.5]))

    def test_sx_flip_on_middle_site(self):
        basis = ChainBasis.spin_chain(3)
        lifted = lift_local(SPIN_HALF["sx"], 1, basis)
        oracle = lift_by_enumeration(SPIN_HALF["sx"], 1, basis)
        np.testing.assert_allclose(lifted, oracle, atol=1e-15)
        flipped = lifted @ all_down(basis)
        expected = 0.5 * basis_state(basis, (DOWN, 0, DOWN))
        np.testing.assert_allclose(flipped, expected, atol=1e-15)

    def test_dimension_mismatch_rejected(self):
        basis = ChainBasis.spin_chain(2)
        with pytest.raises(DimensionMismatchError):
            lift_local(np.eye(3), 0, basis)
        with pytest.raises(DimensionMismatchError):
            lift_product({5: np.eye(2)}, basis)

    def test_composition_on_same_site(self):
        rng = np.random.default_rng(7)
        basis = ChainBasis.spin_chain(3)
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        np.testing.assert_allclose(
            lift_local(a @ b, 2, basis),
            lift_local(a, 2, basis) @ lift_local(b, 2, basis),
            atol=1e-12,
        )

    def test_distinct_sites_commute(self):
        rng = np.random.default_rng(11)
        basis = ChainBasis.spin_chain(4)
        for i, j in ((0, 1), (0, 3), (2, 1)):
            a = lift_local(rng.standard_normal((2, 2)), i, basis)
            b = lift_local(rng.standard_normal((2, 2)), j, basis)
            assert np.max(np.abs(a @ b - b @ a)) < 1e-12

    def test_lift_product_matches_composition(self):
        basis = ChainBasis.spin_chain(3)
        combined = lift_product({0: SPIN_HALF["sx"], 2: SPIN_HALF["sy"]}, basis)
        separate = lift_local(SPIN_HALF["sx"], 0, basis) @ lift_local(SPIN_HALF["sy"], 2, basis)
        np.testing.assert_allclose(combined, separate, atol=1e-15)


class TestPartialTrace:
    def test_product_state(self):
        basis = ChainBasis.spin_chain(3)
        rho = partial_trace(all_down(basis), [1], basis)
        np.testing.assert_allclose(rho, np.diag([0.0, 1.0]))

    def test_ghz_single_site(self):
        basis = ChainBasis.spin_chain(3)
        ghz = (basis_state(basis, (0, 0, 0)) + basis_state(basis, (1, 1, 1))) / np.sqrt(2)
        rho = partial_trace(ghz, [0], basis)
        np.testing.assert_allclose(rho, 0.5 * np.eye(2), atol=1e-15)

    def test_random_state_matches_index_sum_oracle(self):
        rng = np.random.default_rng(23)
        basis = ChainBasis.spin_chain(3)
        psi = random_state(rng, basis.dim)
        rho = partial_trace(psi, [0, 1], basis)
        oracle = trace_by_index_sums(psi, [0, 1], basis)
        np.testing.assert_allclose(rho, oracle, atol=1e-12)
        assert abs(np.trace(rho) - 1.0) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-12
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-12

    def test_density_matrix_input_agrees_with_state_input(self):
        rng = np.random.default_rng(5)
        basis = ChainBasis((2, 3, 2))
        psi = random_state(rng, basis.dim)
        rho_full = np.outer(psi, psi.conj())
        np.testing.assert_allclose(
            partial_trace(rho_full, [1, 2], basis),
            partial_trace(psi, [1, 2], basis),
            atol=1e-12,
        )

    def test_keeping_everything_is_identity(self):
        rng = np.random.default_rng(3)
        basis = ChainBasis.spin_chain(2)
        psi = random_state(rng, basis.dim)
        np.testing.assert_allclose(
            partial_trace(psi, [0, 1], basis), np.outer(psi, psi.conj()), atol=1e-14
        )

    def test_rejects_non_contiguous_keep(self):
        basis = ChainBasis.spin_chain(3)
        with pytest.raises(InvalidPartitionError):
            partial_trace(all_down(basis), [0, 2], basis)


class TestExpectation:
    def test_total_sz_on_all_down(self):
        basis = ChainBasis.spin_chain(3)
        total_sz = sum(lift_local(SPIN_HALF["sz"], i, basis) for i in range(3))
        value = expectation(all_down(basis), total_sz)
        assert value == pytest.approx(-1.5, abs=1e-14)
        assert value.imag == pytest.approx(0.0, abs=1e-14)

    def test_identity_on_normalized_state(self):
        rng = np.random.default_rng(17)
        basis = ChainBasis.spin_chain(3)
        psi = random_state(rng, basis.dim)
        assert expectation(psi, np.eye(basis.dim)) == pytest.approx(1.0, abs=1e-12)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(29)
        dim = 8
        psi = random_state(rng, dim)
        raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        op = raw + raw.conj().T
        oracle = sum(
            np.conj(psi[i]) * op[i, j] * psi[j] for i in range(dim) for j in range(dim)
        )
        value = expectation(psi, op)
        assert abs(value - oracle) < 1e-12
        assert abs(value.imag) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            expectation(np.ones(4), np.eye(3))
