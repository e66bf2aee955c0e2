"""Base and target state constructions.

Product ensembles (explicit separable decompositions), isotropic states, the
phase-vector decomposition of the boundary isotropic state, seeded random
separable states, and the faithfulness test for base states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    BipartiteState,
    as_complex_matrix,
    herm_defect,
    hermitian_part,
    partial_transpose,
    swap_operator,
    tensor_product,
)

#: phase alphabet for the 4^d enumeration; fixed order keeps builds deterministic
PHASES = (1.0 + 0.0j, -1.0 + 0.0j, 1.0j, -1.0j)

#: hard cap on the 4^d phase-vector enumeration
MAX_PHASE_DIM = 6

FAITHFUL_TOL = 1e-8


@dataclass(frozen=True)
class ProductEnsemble:
    """Weighted product decomposition {p_i, ρ_A^(i), ρ_B^(i)} of a separable state.

    Weights are positive and sum to 1; every factor is a density matrix.
    """

    terms: tuple[tuple[float, np.ndarray, np.ndarray], ...]
    psd_tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("ensemble needs at least one term")
        clean = []
        dA = dB = None
        total = 0.0
        for p, a, b in self.terms:
            p = float(p)
            if p <= 0:
                raise ValueError(f"weights must be positive, got {p}")
            a = as_complex_matrix(a)
            b = as_complex_matrix(b)
            if dA is None:
                dA, dB = a.shape[0], b.shape[0]
            if a.shape != (dA, dA) or b.shape != (dB, dB):
                raise ValueError("inconsistent factor shapes across terms")
            for name, f in (("A", a), ("B", b)):
                if herm_defect(f) > 1e-12:
                    raise ValueError(f"{name} factor is not Hermitian")
                if abs(np.trace(f).real - 1.0) > 1e-9:
                    raise ValueError(f"{name} factor trace {np.trace(f).real} is not 1")
                if np.linalg.eigvalsh(hermitian_part(f))[0] < -self.psd_tol:
                    raise ValueError(f"{name} factor is not PSD")
            total += p
            clean.append((p, a, b))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "terms", tuple(clean))

    @property
    def dims(self) -> tuple[int, int]:
        _, a, b = self.terms[0]
        return (a.shape[0], b.shape[0])

    def __len__(self) -> int:
        return len(self.terms)

    def weights(self) -> np.ndarray:
        return np.array([p for p, _, _ in self.terms])


def assemble(e: ProductEnsemble) -> BipartiteState:
    """Σ_i p_i ρ_A^(i) ⊗ ρ_B^(i) as a BipartiteState."""
    dA, dB = e.dims
    acc = np.zeros((dA * dB, dA * dB), dtype=np.complex128)
    for p, a, b in e.terms:
        acc += p * tensor_product(a, b)
    return BipartiteState(dA, dB, hermitian_part(acc))


def maximally_entangled(d: int) -> BipartiteState:
    """|ψ⁺⟩⟨ψ⁺| with |ψ⁺⟩ = (1/√d) Σ_i |ii⟩."""
    if d < 2:
        raise ValueError("d must be >= 2")
    psi = np.zeros(d * d, dtype=np.complex128)
    psi[:: d + 1] = 1.0 / np.sqrt(d)
    return BipartiteState(d, d, np.outer(psi, psi.conj()))


def maximally_mixed(d: int) -> BipartiteState:
    return BipartiteState(d, d, np.eye(d * d, dtype=np.complex128) / (d * d))


def isotropic_state(d: int, lam: float) -> BipartiteState:
    """(1-λ)·1/d² + λ·|ψ⁺⟩⟨ψ⁺|; separable exactly for λ ≤ 1/(d+1)."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    ident = np.eye(d * d, dtype=np.complex128) / (d * d)
    return BipartiteState(d, d, (1.0 - lam) * ident + lam * maximally_entangled(d).mat)


def phase_vectors(d: int):
    """All 4^d vectors with components in {+1, -1, +i, -i}, fixed order."""
    return itertools.product(PHASES, repeat=d)


def phase_ket(z) -> np.ndarray:
    """|Φ_z⟩ = (1/√d) Σ_j z_j |j⟩."""
    z = np.asarray(z, dtype=np.complex128)
    return z / np.sqrt(z.size)


def isotropic_base_ensemble(d: int) -> ProductEnsemble:
    """Product decomposition of the boundary isotropic state ρ(1/(d+1)).

    4^d phase-vector terms |Φ_z⟩⟨Φ_z| ⊗ |Φ_z*⟩⟨Φ_z*| with weight d/((d+1)·4^d)
    each, plus d computational-basis terms |j⟩⟨j|⊗|j⟩⟨j| with weight 1/((d+1)·d).
    All 4^d phase vectors are kept (global-phase duplicates included) so the
    weights stay uniform.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if d > MAX_PHASE_DIM:
        raise ValueError(f"d={d} exceeds the 4^d enumeration cap ({MAX_PHASE_DIM})")
    w_z = d / ((d + 1) * 4.0**d)
    w_j = 1.0 / ((d + 1) * d)
    terms = []
    for z in phase_vectors(d):
        ket = phase_ket(z)
        rho_a = np.outer(ket, ket.conj())
        ket_c = ket.conj()
        rho_b = np.outer(ket_c, ket_c.conj())
        terms.append((w_z, rho_a, rho_b))
    for j in range(d):
        proj = np.zeros((d, d), dtype=np.complex128)
        proj[j, j] = 1.0
        terms.append((w_j, proj, proj))
    return ProductEnsemble(tuple(terms))


def random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank (a.s.) random density matrix A·A†/Tr with complex Gaussian A."""
    a = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2.0)
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_separable(
    dA: int, dB: int, n_terms: int, seed: int | np.random.Generator = 0
) -> ProductEnsemble:
    """Seeded random product ensemble: flat-simplex weights, Wishart-like factors."""
    if not 1 <= n_terms <= dA * dA * dB * dB + 1:
        raise ValueError(f"n_terms must lie in [1, {dA * dA * dB * dB + 1}], got {n_terms}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if n_terms == 1:
        weights = np.array([1.0])
    else:
        weights = rng.dirichlet(np.ones(n_terms))
        weights = np.maximum(weights, 1e-12)
        weights /= weights.sum()
    terms = tuple(
        (float(w), random_density(dA, rng), random_density(dB, rng)) for w in weights
    )
    return ProductEnsemble(terms)


def faithfulness_operator(rho0: BipartiteState) -> np.ndarray:
    """(E·ρ₀)^{T_B}·E with E the swap; invertible iff ρ₀ is a faithful base.

    Entrywise this is the reshuffle ρ̌₀[(a,b),(c,d)] = ρ₀[(c,a),(d,b)], and it
    equals the transpose of the coefficient matrix of the component linear
    system connecting maps to states, so its smallest singular value is
    exactly the conditioning of that system.
    """
    if rho0.dA != rho0.dB:
        raise ValueError("faithfulness operator needs dA == dB")
    d = rho0.dA
    e = swap_operator(d)
    return partial_transpose(e @ rho0.mat, "B", dims=(d, d)) @ e


def is_faithful(rho0: BipartiteState, tol_sigma: float = FAITHFUL_TOL) -> tuple[bool, float]:
    """Whether Λ ↦ (I⊗Λ)(ρ₀) is injective, via σ_min of the reshuffled operator.

    Returns (verdict, smallest singular value).  Pure product states always
    fail (the reshuffle is rank one); random full-rank constructions pass
    almost surely.
    """
    svals = np.linalg.svd(faithfulness_operator(rho0), compute_uv=False)
    smin = float(svals[-1])
    return smin > tol_sigma, smin


def random_faithful_separable(
    d: int,
    n_terms: int,
    rng: np.random.Generator,
    tol_sigma: float = FAITHFUL_TOL,
    max_tries: int = 10,
) -> tuple[ProductEnsemble, BipartiteState, float]:
    """Draw random separable ensembles until the assembled state is faithful."""
    last_sigma = 0.0
    for _ in range(max_tries):
        ens = random_separable(d, d, n_terms, rng)
        state = assemble(ens)
        ok, smin = is_faithful(state, tol_sigma)
        last_sigma = smin
        if ok:
            return ens, state, smin
    raise RuntimeError(
        f"no faithful base found in {max_tries} draws (last σ_min {last_sigma:.3e})"
    )
