import numpy as np
import pytest

from sepcert.linalg import (
    BipartiteState,
    NonHermitianError,
    herm_to_realvec,
    hermitian_basis,
    hermitian_part,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
    realvec_to_herm,
    swap_operator,
    tensor_product,
)
from sepcert.states import isotropic_state, maximally_entangled

from conftest import random_hermitian, random_state


class TestTensorProduct:
    def test_identity(self):
        assert np.allclose(tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_projectors(self):
        out = tensor_product(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        assert np.allclose(out, np.diag([0.0, 1.0, 0.0, 0.0]))

    def test_trace_multiplicative(self, rng):
        # oracle: direct multiplication of traces
        for _ in range(5):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            assert np.isclose(np.trace(tensor_product(a, b)), np.trace(a) * np.trace(b))

    def test_associative(self, rng):
        for _ in range(5):
            mats = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3)]
            left = tensor_product(tensor_product(mats[0], mats[1]), mats[2])
            right = tensor_product(mats[0], tensor_product(mats[1], mats[2]))
            assert np.max(np.abs(left - right)) <= 1e-12

    def test_index_convention(self):
        # row (m,r) = m*cols(b)+r: entry (1,0),(0,1) of a⊗b is a[1,0]*b[0,1]
        a = np.arange(4.0).reshape(2, 2)
        b = np.arange(4.0, 8.0).reshape(2, 2)
        out = tensor_product(a, b)
        assert out[1 * 2 + 0, 0 * 2 + 1] == a[1, 0] * b[0, 1]


class TestPartialTrace:
    def test_product_state(self, rng):
        rho_a = random_state(1, 2, rng).mat
        rho_b = random_state(1, 2, rng).mat
        s = BipartiteState(2, 2, tensor_product(rho_a, rho_b))
        assert np.allclose(partial_trace(s, "A"), rho_b, atol=1e-12)
        assert np.allclose(partial_trace(s, "B"), rho_a, atol=1e-12)

    def test_maximally_entangled_marginal(self):
        for d in (2, 3):
            psi = maximally_entangled(d)
            assert np.allclose(partial_trace(psi, "A"), np.eye(d) / d, atol=1e-12)

    def test_trace_preserved(self, rng):
        # oracle: explicit double-index summation
        for _ in range(5):
            m = random_hermitian(4, rng)
            reduced = partial_trace(m, "A", dims=(2, 2))
            direct = sum(m[i, i] for i in range(4))
            assert np.isclose(np.trace(reduced), direct)

    def test_partial_trace_of_tensor(self, rng):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        out = partial_trace(tensor_product(a, b), "A", dims=(2, 3))
        assert np.max(np.abs(out - b * np.trace(a))) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), "A", dims=(2, 3))


class TestPartialTranspose:
    def test_product(self, rng):
        rho_a = random_state(1, 2, rng).mat
        rho_b = random_state(1, 2, rng).mat
        s = tensor_product(rho_a, rho_b)
        assert np.allclose(
            partial_transpose(s, "B", dims=(2, 2)), tensor_product(rho_a, rho_b.T)
        )

    def test_involution(self, rng):
        m = random_hermitian(6, rng)
        twice = partial_transpose(
            partial_transpose(m, "B", dims=(2, 3)), "B", dims=(2, 3)
        )
        assert np.allclose(twice, m)

    def test_max_entangled_spectrum(self):
        # oracle: eigensolver on the 4x4 partial transpose
        pt = partial_transpose(maximally_entangled(2), "B")
        eig = np.sort(np.linalg.eigvalsh(pt))
        assert np.allclose(eig, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


class TestSwap:
    def test_d1(self):
        assert np.allclose(swap_operator(1), [[1.0]])

    def test_definition_d2(self):
        e = swap_operator(2)
        ket01 = np.zeros(4)
        ket01[0 * 2 + 1] = 1.0
        ket10 = np.zeros(4)
        ket10[1 * 2 + 0] = 1.0
        assert np.allclose(e @ ket01, ket10)

    def test_conjugation_swaps_factors(self, rng):
        # oracle: explicit permutation of vector tensor entries
        for d in (2, 3):
            e = swap_operator(d)
            a = rng.normal(size=d) + 1j * rng.normal(size=d)
            b = rng.normal(size=d) + 1j * rng.normal(size=d)
            assert np.allclose(e @ np.kron(a, b), np.kron(b, a))
            mat = np.outer(np.kron(a, b), np.kron(a, b).conj())
            swapped = np.outer(np.kron(b, a), np.kron(b, a).conj())
            assert np.allclose(e @ mat @ e, swapped)

    def test_squares_to_identity(self):
        for d in (1, 2, 3, 4):
            e = swap_operator(d)
            assert np.array_equal(e @ e, np.eye(d * d))
            assert np.array_equal(e, e.conj().T)


class TestEigen:
    def test_identity(self):
        assert min_eigenvalue(np.eye(3)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert min_eigenvalue(np.diag([0.2, 0.8])) == pytest.approx(0.2)

    def test_isotropic_third(self):
        # spectrum (1-λ)/d² (x3) and (1-λ)/d²+λ, so min is 1/6 at λ=1/3
        state = isotropic_state(2, 1.0 / 3.0)
        assert min_eigenvalue(state.mat) == pytest.approx(1.0 / 6.0, abs=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            min_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_reconstruction(self, rng):
        for n in (2, 5, 16):
            m = random_hermitian(n, rng)
            w, v = np.linalg.eigh(m)
            rebuilt = (v * w) @ v.conj().T
            assert np.linalg.norm(m - rebuilt) <= 1e-10 * np.linalg.norm(m)


class TestHermitianCoordinates:
    def test_round_trip(self, rng):
        for n in (2, 3, 6):
            m = random_hermitian(n, rng)
            assert np.allclose(realvec_to_herm(herm_to_realvec(m), n), m)

    def test_isometry(self, rng):
        m = random_hermitian(4, rng)
        assert np.isclose(np.linalg.norm(herm_to_realvec(m)), np.linalg.norm(m))

    def test_basis_orthonormal(self):
        basis = hermitian_basis(3)
        assert len(basis) == 9
        gram = np.array(
            [[np.trace(a.conj().T @ b).real for b in basis] for a in basis]
        )
        assert np.allclose(gram, np.eye(9), atol=1e-12)

    def test_coordinates_match_basis(self, rng):
        m = random_hermitian(3, rng)
        coords = herm_to_realvec(m)
        rebuilt = sum(c * h for c, h in zip(coords, hermitian_basis(3)))
        assert np.allclose(rebuilt, m)


class TestBipartiteState:
    def test_rejects_non_psd(self):
        with pytest.raises(ValueError, match="PSD"):
            BipartiteState(2, 2, np.diag([1.5, -0.5, 0.0, 0.0]))

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            BipartiteState(2, 2, np.eye(4))

    def test_unnormalized_flag(self):
        s = BipartiteState(2, 2, np.eye(4), unnormalized=True)
        assert np.trace(s.mat).real == pytest.approx(4.0)

    def test_rejects_non_hermitian(self):
        m = np.eye(4, dtype=complex) / 4
        m[0, 1] = 0.1
        with pytest.raises(NonHermitianError):
            BipartiteState(2, 2, m)

    def test_block_indexing(self, rng):
        s = random_state(2, 3, rng)
        # component (m,n,r,s) lives at (m*dB+r, n*dB+s)
        assert s.block(1, 0)[2, 1] == s.mat[1 * 3 + 2, 0 * 3 + 1]


def test_hermitian_part_idempotent(rng):
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = hermitian_part(g)
    assert np.allclose(hermitian_part(h), h)
    assert np.allclose(h, h.conj().T)
