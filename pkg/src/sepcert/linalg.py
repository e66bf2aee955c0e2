"""Dense complex linear algebra for bipartite operators.

All matrices are plain ``numpy.ndarray`` with ``complex128`` entries.  The
composite index convention is row-major throughout: the basis vector
``|m⟩⊗|r⟩`` of H_A⊗H_B sits at position ``m*dB + r``, so the component
``M[(m,r),(n,s)]`` of a bipartite operator is ``M[m*dB + r, n*dB + s]``.
Every function in this package relies on that single convention; file I/O
uses it bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL_HERM = 1e-12
TOL_PSD = 1e-10
TOL_TRACE = 1e-10


class NonHermitianError(ValueError):
    """Input matrix is not Hermitian within the requested tolerance."""


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    return a


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """(M + M†)/2."""
    return (m + m.conj().T) / 2.0


def herm_defect(m: np.ndarray) -> float:
    """max |M - M†| entry; 0 for exactly Hermitian input."""
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = TOL_HERM) -> bool:
    return herm_defect(m) <= tol


def frob(m: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def eigh_checked(m: np.ndarray, tol_herm: float = TOL_HERM):
    """Hermitian eigendecomposition of the symmetrized matrix.

    Rejects inputs whose anti-Hermitian part exceeds ``tol_herm`` (scaled by
    the matrix magnitude), then diagonalizes (M + M†)/2.  Returns
    ``(eigenvalues ascending, eigenvectors as columns)``.
    """
    m = as_complex_matrix(m)
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    if herm_defect(m) > tol_herm * scale:
        raise NonHermitianError(
            f"matrix is not Hermitian: defect {herm_defect(m):.3e} > {tol_herm:.1e}*{scale:.1e}"
        )
    w, v = np.linalg.eigh(hermitian_part(m))
    return w, v


def min_eigenvalue(m: np.ndarray, tol_herm: float = TOL_HERM) -> float:
    """Smallest eigenvalue of the Hermitian part of ``m``."""
    w, _ = eigh_checked(m, tol_herm)
    return float(w[0])


def spectrum(m: np.ndarray, tol_herm: float = TOL_HERM) -> np.ndarray:
    """Full real spectrum (ascending) of the Hermitian part of ``m``."""
    w, _ = eigh_checked(m, tol_herm)
    return w


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the row-major composite index (m,r) -> m*cols(b)+r."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def _resolve(s, dims):
    """Accept a BipartiteState or an (array, dims) pair."""
    if isinstance(s, BipartiteState):
        return s.mat, s.dA, s.dB
    if dims is None:
        raise ValueError("dims=(dA, dB) is required for plain arrays")
    m = as_complex_matrix(s)
    dA, dB = int(dims[0]), int(dims[1])
    if m.shape != (dA * dB, dA * dB):
        raise ValueError(f"matrix shape {m.shape} does not match dims ({dA},{dB})")
    return m, dA, dB


def partial_trace(s, subsystem: str, dims=None) -> np.ndarray:
    """Trace out subsystem 'A' or 'B' of a bipartite operator."""
    m, dA, dB = _resolve(s, dims)
    t = m.reshape(dA, dB, dA, dB)
    if subsystem == "A":
        return np.einsum("mrms->rs", t)
    if subsystem == "B":
        return np.einsum("mrnr->mn", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def partial_transpose(s, subsystem: str = "B", dims=None) -> np.ndarray:
    """Transpose one tensor factor of a bipartite operator."""
    m, dA, dB = _resolve(s, dims)
    t = m.reshape(dA, dB, dA, dB)
    if subsystem == "B":
        return np.ascontiguousarray(t.transpose(0, 3, 2, 1)).reshape(dA * dB, dA * dB)
    if subsystem == "A":
        return np.ascontiguousarray(t.transpose(2, 1, 0, 3)).reshape(dA * dB, dA * dB)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def swap_operator(d: int) -> np.ndarray:
    """Swap E = Σ_ij |ij⟩⟨ji| on H_d⊗H_d.  E² = 1 and E = E†."""
    if d < 1:
        raise ValueError("d must be >= 1")
    e = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            e[i * d + j, j * d + i] = 1.0
    return e


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthonormal (Frobenius) basis of n×n Hermitian matrices, n² elements.

    Order: diagonal units E_aa, then (E_ab+E_ba)/√2 for a<b, then
    i(E_ab-E_ba)/√2 for a<b.  Matches the coordinates used by
    ``herm_to_realvec``/``realvec_to_herm``.
    """
    basis = []
    for a in range(n):
        m = np.zeros((n, n), dtype=np.complex128)
        m[a, a] = 1.0
        basis.append(m)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for a in range(n):
        for b in range(a + 1, n):
            m = np.zeros((n, n), dtype=np.complex128)
            m[a, b] = inv_sqrt2
            m[b, a] = inv_sqrt2
            basis.append(m)
    for a in range(n):
        for b in range(a + 1, n):
            m = np.zeros((n, n), dtype=np.complex128)
            m[a, b] = 1j * inv_sqrt2
            m[b, a] = -1j * inv_sqrt2
            basis.append(m)
    return basis


def herm_to_realvec(m: np.ndarray) -> np.ndarray:
    """Coordinates of a Hermitian matrix in the ``hermitian_basis`` frame.

    Isometric: ``||herm_to_realvec(M)||_2 == ||M||_F``.
    """
    m = as_complex_matrix(m)
    n = m.shape[0]
    iu = np.triu_indices(n, k=1)
    sqrt2 = np.sqrt(2.0)
    return np.concatenate(
        [np.real(np.diag(m)), sqrt2 * np.real(m[iu]), sqrt2 * np.imag(m[iu])]
    )


def realvec_to_herm(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of ``herm_to_realvec``."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n * n,):
        raise ValueError(f"expected vector of length {n * n}, got {v.shape}")
    m = np.zeros((n, n), dtype=np.complex128)
    np.fill_diagonal(m, v[:n])
    iu = np.triu_indices(n, k=1)
    k = iu[0].size
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    upper = (v[n : n + k] + 1j * v[n + k :]) * inv_sqrt2
    m[iu] = upper
    m[(iu[1], iu[0])] = upper.conj()
    return m


@dataclass(frozen=True)
class BipartiteState:
    """Hermitian PSD operator on H_A⊗H_B with explicit local dimensions.

    ``unnormalized=True`` skips the unit-trace check (cone elements produced
    by local maps before rescaling); Hermiticity and positivity are always
    enforced.
    """

    dA: int
    dB: int
    mat: np.ndarray
    unnormalized: bool = False
    tol_herm: float = field(default=TOL_HERM, repr=False)
    tol_psd: float = field(default=TOL_PSD, repr=False)

    def __post_init__(self):
        m = as_complex_matrix(self.mat)
        d = self.dA * self.dB
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match dims ({self.dA},{self.dB})")
        if herm_defect(m) > self.tol_herm:
            raise NonHermitianError(
                f"state is not Hermitian: defect {herm_defect(m):.3e} > {self.tol_herm:.1e}"
            )
        object.__setattr__(self, "mat", m)
        w = np.linalg.eigvalsh(hermitian_part(m))
        if w[0] < -self.tol_psd:
            raise ValueError(f"state is not PSD: min eigenvalue {w[0]:.3e}")
        if not self.unnormalized and abs(np.trace(m).real - 1.0) > TOL_TRACE:
            raise ValueError(f"state trace {np.trace(m).real!r} is not 1")

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dA, self.dB)

    def as_tensor(self) -> np.ndarray:
        """View as a (dA, dB, dA, dB) tensor; T[m,r,n,s] = M[(m,r),(n,s)]."""
        return self.mat.reshape(self.dA, self.dB, self.dA, self.dB)

    def block(self, m: int, n: int) -> np.ndarray:
        """The dB×dB block ⟨m|·|n⟩_A, i.e. components R_{mn··}."""
        return self.mat[m * self.dB : (m + 1) * self.dB, n * self.dB : (n + 1) * self.dB]

    def partial_trace(self, subsystem: str) -> np.ndarray:
        return partial_trace(self, subsystem)

    def partial_transpose(self, subsystem: str = "B") -> np.ndarray:
        return partial_transpose(self, subsystem)

    def min_eigenvalue(self) -> float:
        return min_eigenvalue(self.mat, self.tol_herm)
