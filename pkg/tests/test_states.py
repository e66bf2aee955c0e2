import itertools

import numpy as np
import pytest

from sepcert.criteria import ppt_check
from sepcert.detector import assemble_linear_system
from sepcert.linalg import BipartiteState, partial_trace, tensor_product
from sepcert.states import (
    ProductEnsemble,
    assemble,
    faithfulness_operator,
    is_faithful,
    isotropic_base_ensemble,
    isotropic_state,
    maximally_entangled,
    maximally_mixed,
    phase_ket,
    phase_vectors,
    random_separable,
)

from conftest import random_state


def pure(vec):
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    return np.outer(vec, vec.conj())


class TestAssemble:
    def test_single_term(self, rng):
        a = random_state(1, 2, rng).mat
        b = random_state(1, 2, rng).mat
        s = assemble(ProductEnsemble(((1.0, a, b),)))
        assert np.allclose(s.mat, tensor_product(a, b))

    def test_uniform_classical_mixture(self):
        e = ProductEnsemble(
            (
                (0.5, pure([1, 0]), pure([1, 0])),
                (0.5, pure([0, 1]), pure([0, 1])),
            )
        )
        assert np.allclose(assemble(e).mat, np.diag([0.5, 0.0, 0.0, 0.5]))

    def test_weights_must_form_simplex(self, rng):
        a = random_state(1, 2, rng).mat
        with pytest.raises(ValueError, match="sum"):
            ProductEnsemble(((0.4, a, a), (0.4, a, a)))
        with pytest.raises(ValueError, match="positive"):
            ProductEnsemble(((1.5, a, a), (-0.5, a, a)))

    def test_factors_must_be_states(self):
        bad = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError, match="PSD"):
            ProductEnsemble(((1.0, bad, pure([1, 0])),))


class TestMaximallyEntangled:
    def test_corner_entries_d2(self):
        m = maximally_entangled(2).mat
        for (i, j) in itertools.product((0, 3), repeat=2):
            assert m[i, j] == pytest.approx(0.5)
        assert np.trace(m).real == pytest.approx(1.0)

    def test_marginal_and_purity(self):
        for d in (2, 3):
            psi = maximally_entangled(d)
            assert np.allclose(partial_trace(psi, "B"), np.eye(d) / d)
            assert np.trace(psi.mat @ psi.mat).real == pytest.approx(1.0)


class TestIsotropic:
    def test_endpoints(self):
        assert np.allclose(isotropic_state(2, 0.0).mat, np.eye(4) / 4)
        assert np.allclose(isotropic_state(2, 1.0).mat, maximally_entangled(2).mat)

    def test_spectrum(self):
        d, lam = 2, 1.0 / 3.0
        w = np.sort(np.linalg.eigvalsh(isotropic_state(d, lam).mat))
        base = (1 - lam) / d**2
        assert np.allclose(w, [base, base, base, base + lam], atol=1e-12)
        assert w[0] == pytest.approx(1.0 / 6.0)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            isotropic_state(2, 1.5)


class TestIsotropicBaseEnsemble:
    def test_term_count_and_weights_d2(self):
        e = isotropic_base_ensemble(2)
        assert len(e) == 4**2 + 2 == 18
        weights = e.weights()
        assert np.allclose(weights[: 4**2], 1.0 / 24.0)
        assert np.allclose(weights[4**2 :], 1.0 / 6.0)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_assembles_to_boundary_isotropic(self, d):
        got = assemble(isotropic_base_ensemble(d)).mat
        want = isotropic_state(d, 1.0 / (d + 1)).mat
        assert np.max(np.abs(got - want)) <= 1e-10

    @pytest.mark.parametrize("d", [2, 3])
    def test_phase_moment_identity(self, d):
        # Σ_z z_j z_k* z_l* z_m = 4^d (δ_jk δ_lm + δ_jl δ_km - δ_jk δ_lm δ_jl),
        # checked by full enumeration
        for j, k, l, m in itertools.product(range(d), repeat=4):
            total = sum(
                z[j] * np.conj(z[k]) * np.conj(z[l]) * z[m] for z in phase_vectors(d)
            )
            want = 4**d * (
                (j == k) * (l == m) + (j == l) * (k == m) - (j == k) * (l == m) * (j == l)
            )
            assert total == pytest.approx(want, abs=1e-9)

    def test_phase_kets_unit_norm(self):
        for z in itertools.islice(phase_vectors(3), 10):
            assert np.linalg.norm(phase_ket(z)) == pytest.approx(1.0)

    def test_dimension_guard(self):
        with pytest.raises(ValueError, match="cap"):
            isotropic_base_ensemble(7)


class TestRandomSeparable:
    def test_single_term_is_product(self):
        e = random_separable(2, 2, 1, seed=5)
        assert len(e) == 1
        assert e.terms[0][0] == pytest.approx(1.0)

    def test_deterministic(self):
        e1 = random_separable(2, 3, 6, seed=9)
        e2 = random_separable(2, 3, 6, seed=9)
        for (p1, a1, b1), (p2, a2, b2) in zip(e1.terms, e2.terms):
            assert p1 == p2
            assert np.array_equal(a1, a2)
            assert np.array_equal(b1, b2)

    def test_assembled_passes_ppt(self):
        # PPT is necessary for separability; for 2x2 and 2x3 it is also sufficient
        for seed in range(5):
            for dims in ((2, 2), (2, 3)):
                e = random_separable(dims[0], dims[1], 5, seed=seed)
                rep = ppt_check(assemble(e))
                assert rep.verdict == "separable"

    def test_assembled_state_invariants(self):
        for seed in range(5):
            s = assemble(random_separable(2, 2, 8, seed=seed))
            w = np.linalg.eigvalsh(s.mat)
            assert w[0] >= -1e-12
            assert np.trace(s.mat).real == pytest.approx(1.0, abs=1e-12)

    def test_term_count_bound(self):
        with pytest.raises(ValueError):
            random_separable(2, 2, 18, seed=0)


class TestFaithfulness:
    def test_max_entangled_is_faithful(self):
        psi = maximally_entangled(2)
        check = faithfulness_operator(psi)
        assert np.allclose(check, np.eye(4) / 2)
        assert abs(np.linalg.det(check)) == pytest.approx(1.0 / 16.0)
        ok, smin = is_faithful(psi)
        assert ok and smin == pytest.approx(0.5)

    def test_pure_product_reshuffle_formula(self, rng):
        # |x><x| ⊗ |y><y| reshuffles to |y><x*| ⊗ |y*><x|: rank one
        x = rng.normal(size=2) + 1j * rng.normal(size=2)
        y = rng.normal(size=2) + 1j * rng.normal(size=2)
        x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
        rho = BipartiteState(2, 2, tensor_product(pure(x), pure(y)))
        check = faithfulness_operator(rho)
        want = tensor_product(np.outer(y, x), np.outer(y.conj(), x.conj()))
        assert np.allclose(check, want, atol=1e-12)
        assert np.linalg.matrix_rank(check, tol=1e-10) == 1
        ok, _ = is_faithful(rho)
        assert not ok

    def test_maximally_mixed_is_not_faithful(self):
        # reshuffling 1/d² gives the rank-one |ψ+><ψ+|/d: the identity only
        # exposes Λ(1), so it cannot separate maps
        for d in (2, 3):
            check = faithfulness_operator(maximally_mixed(d))
            assert np.allclose(check, maximally_entangled(d).mat / d, atol=1e-12)
            ok, _ = is_faithful(maximally_mixed(d))
            assert not ok

    def test_random_separable_faithful(self):
        ok, smin = is_faithful(assemble(random_separable(2, 2, 5, seed=3)))
        assert ok and smin > 1e-4

    def test_boundary_isotropic_is_faithful(self):
        for d in (2, 3):
            ok, _ = is_faithful(isotropic_state(d, 1.0 / (d + 1)))
            assert ok

    @pytest.mark.parametrize("d", [2, 3])
    def test_agreement_with_linear_system_conditioning(self, d):
        # the reshuffle test and the assembled equality system must agree;
        # margins within 10x of the 1e-8 threshold are excluded as ties
        n_checked = 0
        for seed in range(100 if d == 2 else 25):
            if seed % 3 == 2:
                x = np.random.default_rng(seed).normal(size=d)
                y = np.random.default_rng(seed + 1).normal(size=d)
                state = BipartiteState(d, d, tensor_product(pure(x), pure(y)))
            else:
                state = assemble(random_separable(d, d, 4 + seed % 5, seed=seed))
            _, smin = is_faithful(state)
            c, _ = assemble_linear_system(state, state)
            smin_sys = np.linalg.svd(c, compute_uv=False)[-1]
            if min(smin, smin_sys) > 1e-7 or max(smin, smin_sys) < 1e-9:
                n_checked += 1
                assert (smin > 1e-8) == (smin_sys > 1e-8)
        assert n_checked > 0
