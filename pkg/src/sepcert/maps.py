"""Local linear maps on operators, their transfer and Choi representations.

A map Λ : B(H_in) -> B(H_out) is stored by its transfer matrix ``T`` of shape
(d_out², d_in²) acting on row-major vectorized operators:

    vec(Λ(ρ)) = T @ vec(ρ),   vec(M)[k*d + l] = M[k, l].

Equivalently Λ(|r⟩⟨s|) = Σ_kl T[(k,l),(r,s)] |k⟩⟨l|.  All maps here are
Hermiticity-preserving, i.e. T[(l,k),(s,r)] = conj(T[(k,l),(r,s)]), which is
the same as the Choi matrix being Hermitian.  Trace preservation and
positivity are deliberately NOT required: the detection pipeline only needs
maps positive on a finite ensemble, and feasible maps are generally not
normalized.

Choi convention (exact bijection with ``map_of_choi``):

    Z = choi(Λ) = (1/d_in) Σ_rs |r⟩⟨s| ⊗ Λ(|r⟩⟨s|)        (d_in·d_out square)
    Λ(ρ) = d_in · Σ_ijkl ⟨ij|Z|kl⟩ ρ_ik |j⟩⟨l|.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    TOL_HERM,
    BipartiteState,
    as_complex_matrix,
    herm_defect,
    hermitian_part,
)


def _herm_preserving_defect(t4: np.ndarray) -> float:
    """max |T[k,l,r,s] - conj(T[l,k,s,r])|."""
    return float(np.max(np.abs(t4 - t4.transpose(1, 0, 3, 2).conj())))


@dataclass(frozen=True)
class LocalMap:
    """Hermiticity-preserving linear map between operator spaces."""

    d_in: int
    d_out: int
    transfer: np.ndarray  # (d_out², d_in²) complex
    tol_herm: float = field(default=TOL_HERM, repr=False)

    def __post_init__(self):
        t = as_complex_matrix(self.transfer)
        if t.shape != (self.d_out**2, self.d_in**2):
            raise ValueError(
                f"transfer shape {t.shape} does not match ({self.d_out**2},{self.d_in**2})"
            )
        t4 = t.reshape(self.d_out, self.d_out, self.d_in, self.d_in)
        scale = max(1.0, float(np.max(np.abs(t))) if t.size else 0.0)
        if _herm_preserving_defect(t4) > self.tol_herm * scale:
            raise ValueError(
                "transfer tensor is not Hermiticity-preserving "
                f"(defect {_herm_preserving_defect(t4):.3e})"
            )
        object.__setattr__(self, "transfer", t)

    @property
    def transfer4(self) -> np.ndarray:
        """Transfer as a (k, l, r, s) tensor."""
        return self.transfer.reshape(self.d_out, self.d_out, self.d_in, self.d_in)

    def __add__(self, other: "LocalMap") -> "LocalMap":
        if (self.d_in, self.d_out) != (other.d_in, other.d_out):
            raise ValueError("map dimensions differ")
        return LocalMap(self.d_in, self.d_out, self.transfer + other.transfer)

    def __mul__(self, scalar: float) -> "LocalMap":
        return LocalMap(self.d_in, self.d_out, self.transfer * float(scalar))

    __rmul__ = __mul__


def identity_map(d: int) -> LocalMap:
    return LocalMap(d, d, np.eye(d * d, dtype=np.complex128))


def zero_map(d_in: int, d_out: int) -> LocalMap:
    return LocalMap(d_in, d_out, np.zeros((d_out**2, d_in**2), dtype=np.complex128))


def transpose_map(d: int) -> LocalMap:
    """ρ -> ρ^T.  Positive but not completely positive for d >= 2."""
    t = np.zeros((d * d, d * d), dtype=np.complex128)
    for r in range(d):
        for s in range(d):
            t[s * d + r, r * d + s] = 1.0  # |r⟩⟨s| -> |s⟩⟨r|
    return LocalMap(d, d, t)


def trace_and_replace(target: np.ndarray, d_in: int) -> LocalMap:
    """ρ -> Tr(ρ)·target."""
    target = as_complex_matrix(target)
    d_out = target.shape[0]
    tr_row = np.eye(d_in, dtype=np.complex128).reshape(-1)  # vec of identity
    t = np.outer(target.reshape(-1), tr_row)
    return LocalMap(d_in, d_out, t)


def map_from_kraus(kraus: list[np.ndarray]) -> LocalMap:
    """Completely positive map ρ -> Σ_i K_i ρ K_i†.

    Row-major vec gives vec(KρK†) = (K ⊗ conj(K)) vec(ρ).
    """
    ks = [as_complex_matrix(k) for k in kraus]
    d_out, d_in = ks[0].shape
    t = np.zeros((d_out**2, d_in**2), dtype=np.complex128)
    for k in ks:
        if k.shape != (d_out, d_in):
            raise ValueError("Kraus operators must share one shape")
        t += np.kron(k, k.conj())
    return LocalMap(d_in, d_out, t)


def apply(m: LocalMap, rho: np.ndarray) -> np.ndarray:
    """Λ(ρ); Hermitian output for Hermitian input."""
    rho = as_complex_matrix(rho)
    if rho.shape != (m.d_in, m.d_in):
        raise ValueError(f"input shape {rho.shape} does not match d_in={m.d_in}")
    return (m.transfer @ rho.reshape(-1)).reshape(m.d_out, m.d_out)


def apply_local_B(m: LocalMap, s: BipartiteState) -> np.ndarray:
    """(I⊗Λ)(s): block (m,n) of the output is Λ(block_{mn}(s)).

    Output is a plain (dA·d_out)² array; it may be non-PSD and unnormalized.
    """
    if m.d_in != s.dB:
        raise ValueError(f"map d_in={m.d_in} does not match state dB={s.dB}")
    out = np.einsum("klrs,mrns->mknl", m.transfer4, s.as_tensor())
    return out.reshape(s.dA * m.d_out, s.dA * m.d_out)


def apply_local_A(m: LocalMap, s: BipartiteState) -> np.ndarray:
    """(Λ⊗I)(s) acting on the A factor."""
    if m.d_in != s.dA:
        raise ValueError(f"map d_in={m.d_in} does not match state dA={s.dA}")
    out = np.einsum("klmn,mrns->krls", m.transfer4, s.as_tensor())
    return out.reshape(m.d_out * s.dB, m.d_out * s.dB)


def apply_local_sum(map_a: LocalMap, map_b: LocalMap, s: BipartiteState) -> np.ndarray:
    """[I⊗Λ_B + Λ_A⊗I](s).  Both one-sided images must share a shape."""
    if map_a.d_out != s.dA or map_b.d_out != s.dB:
        raise ValueError("one-sided images have different shapes; need square maps")
    return apply_local_A(map_a, s) + apply_local_B(map_b, s)


@dataclass(frozen=True)
class ChoiMatrix:
    """Hermitian Choi matrix of a local map, on H_in⊗H_out."""

    d_in: int
    d_out: int
    mat: np.ndarray
    tol_herm: float = field(default=TOL_HERM, repr=False)

    def __post_init__(self):
        m = as_complex_matrix(self.mat)
        n = self.d_in * self.d_out
        if m.shape != (n, n):
            raise ValueError(f"Choi shape {m.shape} does not match ({n},{n})")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
        if herm_defect(m) > self.tol_herm * scale:
            raise ValueError(f"Choi matrix is not Hermitian (defect {herm_defect(m):.3e})")
        object.__setattr__(self, "mat", m)


def choi_of_map(m: LocalMap) -> ChoiMatrix:
    """Z = (1/d_in) Σ_rs |r⟩⟨s| ⊗ Λ(|r⟩⟨s|) = (I⊗Λ)(|ψ⁺⟩⟨ψ⁺|)."""
    # Z[(r,k),(s,l)] = T[(k,l),(r,s)] / d_in
    z4 = m.transfer4.transpose(2, 0, 3, 1) / m.d_in
    n = m.d_in * m.d_out
    return ChoiMatrix(m.d_in, m.d_out, np.ascontiguousarray(z4).reshape(n, n))


def map_of_choi(z: ChoiMatrix | np.ndarray, d_in: int | None = None, d_out: int | None = None) -> LocalMap:
    """Exact inverse of ``choi_of_map``: Λ(ρ) = d_in·Σ ⟨ij|Z|kl⟩ ρ_ik |j⟩⟨l|."""
    if isinstance(z, ChoiMatrix):
        mat, d_in, d_out = z.mat, z.d_in, z.d_out
    else:
        if d_in is None or d_out is None:
            raise ValueError("d_in and d_out are required for a plain Choi array")
        mat = as_complex_matrix(z)
    z4 = mat.reshape(d_in, d_out, d_in, d_out)
    t4 = z4.transpose(1, 3, 0, 2) * d_in  # T[k,l,r,s] = d_in·Z[r,k,s,l]
    return LocalMap(d_in, d_out, np.ascontiguousarray(t4).reshape(d_out**2, d_in**2))


def compose(outer: LocalMap, inner: LocalMap) -> LocalMap:
    """outer ∘ inner; transfer matrices multiply."""
    if inner.d_out != outer.d_in:
        raise ValueError(f"cannot compose: inner d_out={inner.d_out}, outer d_in={outer.d_in}")
    return LocalMap(inner.d_in, outer.d_out, outer.transfer @ inner.transfer)


def random_map(d_in: int, d_out: int, rng: np.random.Generator, scale: float = 1.0) -> LocalMap:
    """Random Hermiticity-preserving map (iid Gaussian Hermitian Choi)."""
    n = d_in * d_out
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return map_of_choi(hermitian_part(g) * scale, d_in, d_out)


def random_cp_map(d_in: int, d_out: int, rng: np.random.Generator, n_kraus: int = 2) -> LocalMap:
    """Random completely positive map as a sum of Gaussian conjugations."""
    kraus = [
        (rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in))) / np.sqrt(2.0)
        for _ in range(n_kraus)
    ]
    return map_from_kraus(kraus)


def is_positive_sampled(
    m: LocalMap, n_samples: int = 100, rng: np.random.Generator | None = None, tol: float = 1e-10
) -> bool:
    """Sampling check of positivity: Λ(ρ) ⪰ -tol for random PSD unit-trace ρ.

    This is evidence, not a proof; callers that need guaranteed positivity
    must get it elsewhere (e.g. a PSD Choi matrix).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(n_samples):
        a = rng.normal(size=(m.d_in, m.d_in)) + 1j * rng.normal(size=(m.d_in, m.d_in))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        w = np.linalg.eigvalsh(hermitian_part(apply(m, rho)))
        if w[0] < -tol:
            return False
    return True
