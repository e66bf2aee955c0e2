import numpy as np
import pytest

from sepcert.linalg import BipartiteState, hermitian_part, swap_operator, tensor_product
from sepcert.maps import (
    LocalMap,
    apply,
    apply_local_A,
    apply_local_B,
    apply_local_sum,
    choi_of_map,
    compose,
    identity_map,
    is_positive_sampled,
    map_from_kraus,
    map_of_choi,
    random_cp_map,
    random_map,
    trace_and_replace,
    transpose_map,
    zero_map,
)
from sepcert.states import maximally_entangled

from conftest import random_hermitian, random_state


class TestApply:
    def test_identity(self, rng):
        rho = random_state(1, 3, rng).mat
        assert np.allclose(apply(identity_map(3), rho), rho)

    def test_trace_and_replace(self, rng):
        target = np.diag([1.0, 0.0]).astype(complex)
        m = trace_and_replace(target, 2)
        rho = random_state(1, 2, rng).mat
        assert np.allclose(apply(m, rho), target)

    def test_hermitian_output(self, rng):
        # oracle: entrywise summation over the elementary-map basis
        m = random_map(2, 3, rng)
        rho = random_hermitian(2, rng)
        t4 = m.transfer4
        direct = np.zeros((3, 3), dtype=complex)
        for k in range(3):
            for el in range(3):
                for r in range(2):
                    for s in range(2):
                        direct[k, el] += t4[k, el, r, s] * rho[r, s]
        out = apply(m, rho)
        assert np.allclose(out, direct)
        assert np.max(np.abs(out - out.conj().T)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply(identity_map(2), np.eye(3))

    def test_rejects_non_hermiticity_preserving(self):
        t = np.zeros((4, 4), dtype=complex)
        t[0, 1] = 1.0  # |0><0| <- |0><1| alone breaks the adjoint symmetry
        with pytest.raises(ValueError, match="Hermiticity"):
            LocalMap(2, 2, t)


class TestApplyLocal:
    def test_identity_map_leaves_state(self, rng):
        s = random_state(2, 2, rng)
        assert np.allclose(apply_local_B(identity_map(2), s), s.mat)
        assert np.allclose(apply_local_A(identity_map(2), s), s.mat)

    def test_product_input(self, rng):
        rho_a = random_state(1, 2, rng).mat
        rho_b = random_state(1, 2, rng).mat
        s = BipartiteState(2, 2, tensor_product(rho_a, rho_b))
        m = random_map(2, 2, rng)
        assert np.allclose(
            apply_local_B(m, s), tensor_product(rho_a, apply(m, rho_b)), atol=1e-12
        )
        assert np.allclose(
            apply_local_A(m, s), tensor_product(apply(m, rho_a), rho_b), atol=1e-12
        )

    def test_transpose_on_max_entangled_gives_swap(self):
        # blockwise: block (m,n) of psi+ is |m><n|/d, transposed to |n><m|/d
        for d in (2, 3):
            out = apply_local_B(transpose_map(d), maximally_entangled(d))
            assert np.allclose(out, swap_operator(d) / d, atol=1e-12)

    def test_sum_zero_plus_identity(self, rng):
        s = random_state(2, 2, rng)
        out = apply_local_sum(zero_map(2, 2), identity_map(2), s)
        assert np.allclose(out, s.mat)
        out2 = apply_local_sum(identity_map(2), identity_map(2), s)
        assert np.allclose(out2, 2 * s.mat)

    def test_sum_matches_independent_blockwise_oracle(self, rng):
        s = random_state(2, 2, rng)
        ma, mb = random_map(2, 2, rng), random_map(2, 2, rng)
        # oracle: build both one-sided actions blockwise from scratch
        d = 2
        expect = np.zeros((4, 4), dtype=complex)
        for m in range(d):
            for n in range(d):
                blk = s.block(m, n)
                expect[m * d : (m + 1) * d, n * d : (n + 1) * d] += apply(mb, blk)
        t = s.as_tensor()
        for r in range(d):
            for ss in range(d):
                blk_a = t[:, r, :, ss]
                img = apply(ma, blk_a)
                for k in range(d):
                    for el in range(d):
                        expect[k * d + r, el * d + ss] += img[k, el]
        assert np.allclose(apply_local_sum(ma, mb, s), expect, atol=1e-12)

    def test_linearity_in_map(self, rng):
        s = random_state(2, 2, rng)
        m1, m2 = random_map(2, 2, rng), random_map(2, 2, rng)
        alpha, beta = 0.7, -1.3
        combo = alpha * m1 + beta * m2
        expect = alpha * apply_local_B(m1, s) + beta * apply_local_B(m2, s)
        assert np.allclose(apply_local_B(combo, s), expect, atol=1e-12)


class TestChoi:
    def test_identity_choi_is_max_entangled(self):
        for d in (2, 3):
            z = choi_of_map(identity_map(d))
            assert np.allclose(z.mat, maximally_entangled(d).mat, atol=1e-12)

    def test_trace_and_replace_choi(self):
        # oracle: (1/d) Σ_rs |r><s| ⊗ Λ(|r><s|) summed explicitly
        proj0 = np.diag([1.0, 0.0]).astype(complex)
        m = trace_and_replace(proj0, 2)
        z = choi_of_map(m)
        acc = np.zeros((4, 4), dtype=complex)
        for r in range(2):
            for s in range(2):
                unit = np.zeros((2, 2), dtype=complex)
                unit[r, s] = 1.0
                acc += tensor_product(unit, apply(m, unit)) / 2
        assert np.allclose(z.mat, acc)
        assert np.allclose(z.mat, tensor_product(np.eye(2) / 2, proj0))

    def test_cp_map_has_psd_choi(self, rng):
        for _ in range(5):
            m = random_cp_map(2, 3, rng)
            w = np.linalg.eigvalsh(choi_of_map(m).mat)
            assert w[0] >= -1e-12

    def test_round_trip_both_ways(self, rng):
        m = random_map(3, 2, rng)
        again = map_of_choi(choi_of_map(m))
        assert np.max(np.abs(m.transfer - again.transfer)) <= 1e-12
        z = hermitian_part(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
        z2 = choi_of_map(map_of_choi(z, 2, 3)).mat
        assert np.max(np.abs(z - z2)) <= 1e-12

    def test_choi_unit_is_identity(self):
        m = map_of_choi(maximally_entangled(2).mat, 2, 2)
        assert np.allclose(m.transfer, np.eye(4), atol=1e-12)

    def test_choi_inverse_of_trace_and_replace(self):
        z = tensor_product(np.eye(2) / 2, np.diag([1.0, 0.0]))
        m = map_of_choi(z, 2, 2)
        rho = np.array([[0.25, 0.1j], [-0.1j, 0.75]])
        assert np.allclose(apply(m, rho), np.diag([1.0, 0.0]), atol=1e-12)


class TestCompose:
    def test_identity_neutral(self, rng):
        m = random_map(2, 2, rng)
        assert np.allclose(compose(identity_map(2), m).transfer, m.transfer)
        assert np.allclose(compose(m, identity_map(2)).transfer, m.transfer)

    def test_pointwise_agreement(self, rng):
        # oracle: double application on every matrix unit
        f, g = random_map(3, 2, rng), random_map(2, 3, rng)
        fg = compose(f, g)
        for r in range(2):
            for s in range(2):
                unit = np.zeros((2, 2), dtype=complex)
                unit[r, s] = 1.0
                assert np.allclose(apply(fg, unit), apply(f, apply(g, unit)), atol=1e-12)

    def test_dim_mismatch(self, rng):
        with pytest.raises(ValueError):
            compose(random_map(3, 2, rng), random_map(2, 2, rng))

    def test_composition_positivity_sampled(self, rng):
        # sampled analogue of "positive maps compose to positive maps"
        k1 = [np.eye(2) * 0.5, np.diag([0.5, -0.5])]
        m1 = map_from_kraus(k1)
        m2 = random_cp_map(2, 2, rng)
        assert is_positive_sampled(m1, 100, rng)
        assert is_positive_sampled(m2, 100, rng)
        assert is_positive_sampled(compose(m1, m2), 100, rng)


class TestHermiticityPreservation:
    def test_hermitian_choi_gives_hermitian_outputs(self, rng):
        for _ in range(10):
            m = random_map(2, 2, rng)
            h = random_hermitian(2, rng)
            out = apply(m, h)
            assert np.max(np.abs(out - out.conj().T)) <= 1e-12

    def test_transpose_map_is_positive_but_not_cp(self, rng):
        t = transpose_map(2)
        assert is_positive_sampled(t, 50, rng)
        assert np.linalg.eigvalsh(choi_of_map(t).mat)[0] < -0.1
