"""Separability certificates: explicit product decompositions plus provenance.

A certificate is the proof object this package exists to produce: a weighted
list of product states that reassembles to the target within a stated
tolerance.  Builders derive certificates from feasible maps (one-sided or
two-sided) or from the eigenvalue criterion's closed-form construction.
``verify_certificate`` is the independent arbiter: it recomputes every
invariant from the raw arrays using nothing but linalg primitives.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .criteria import SEPARABLE, eigenvalue_check, filter_normalize
from .linalg import BipartiteState, eigh_checked, hermitian_part
from .maps import LocalMap, apply, choi_of_map, map_of_choi
from .states import ProductEnsemble, isotropic_base_ensemble, phase_ket, phase_vectors

CERT_TOL = 1e-6
FACTOR_CLIP = 1e-9
ZERO_WEIGHT = 1e-12


class CertificateError(Exception):
    """Base class for certificate construction failures."""


class CriterionNotMet(CertificateError):
    """The eigenvalue criterion does not certify this state."""


class ResidualTooLarge(CertificateError):
    """The decomposition does not reassemble to the target within tolerance."""


class NegativeFactor(CertificateError):
    """A factor is negative beyond the clip tolerance (marginal feasible point)."""


def state_digest(state: BipartiteState) -> str:
    """Content digest of a state: dims plus the exact float64 entries."""
    h = hashlib.sha256()
    h.update(f"{state.dA}x{state.dB}:".encode())
    h.update(np.ascontiguousarray(state.mat, dtype=np.complex128).tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class Certificate:
    """Verifiable proof of separability for one specific target state."""

    dims: tuple[int, int]
    target_hash: str
    ensemble: ProductEnsemble
    residual: float
    provenance: dict
    tolerances: dict = field(default_factory=lambda: {"cert_tol": CERT_TOL, "clip": FACTOR_CLIP})

    @property
    def n_terms(self) -> int:
        return len(self.ensemble)


def _clip_factor(factor: np.ndarray, clip: float) -> np.ndarray:
    """Project a unit-trace near-PSD factor onto PSD; reject beyond -clip."""
    w, v = eigh_checked(factor)
    if w[0] < -clip:
        raise NegativeFactor(f"factor eigenvalue {w[0]:.3e} below -{clip:.1e}")
    if w[0] >= 0.0:
        return factor
    w = np.maximum(w, 0.0)
    out = (v * w) @ v.conj().T
    tr = np.trace(out).real
    if tr <= 0.0:
        raise NegativeFactor("factor vanished after clipping")
    return hermitian_part(out / tr)


def _finish(
    raw_terms: list[tuple[float, np.ndarray, np.ndarray]],
    sigma: BipartiteState,
    provenance: dict,
    cert_tol: float,
    clip: float,
) -> Certificate:
    """Shared builder tail: drop zero terms, clip, renormalize, check residual.

    The weights are rescaled by one common factor so they form a simplex;
    that single degree of freedom absorbs any residual global normalization
    of the construction, and the reassembly residual is the final judge.
    """
    kept = []
    for w, a, b in raw_terms:
        if w < -ZERO_WEIGHT:
            raise NegativeFactor(f"negative term weight {w:.3e}")
        if w <= ZERO_WEIGHT:
            continue
        kept.append((w, _clip_factor(a, clip), _clip_factor(b, clip)))
    if not kept:
        raise ResidualTooLarge("all terms vanished")
    total = sum(w for w, _, _ in kept)
    terms = tuple((w / total, a, b) for w, a, b in kept)
    ensemble = ProductEnsemble(terms, psd_tol=clip)
    dA, dB = sigma.dims
    acc = np.zeros((dA * dB, dA * dB), dtype=np.complex128)
    for w, a, b in terms:
        acc += w * linalg.tensor_product(a, b)
    residual = linalg.frob(sigma.mat - acc)
    provenance = dict(provenance)
    provenance["weight_rescale"] = 1.0 / total
    cert = Certificate(
        dims=sigma.dims,
        target_hash=state_digest(sigma),
        ensemble=ensemble,
        residual=residual,
        provenance=provenance,
        tolerances={"cert_tol": cert_tol, "clip": clip},
    )
    if residual > cert_tol:
        raise ResidualTooLarge(f"residual {residual:.3e} exceeds {cert_tol:.1e}")
    return cert


def _map_terms(
    base: ProductEnsemble, m: LocalMap, side: str, clip: float
) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Terms p_i·(ρ_A, Λ(ρ_B)) or p_i·(Λ(ρ_A), ρ_B), trace-normalized."""
    out = []
    for p, a, b in base.terms:
        image = hermitian_part(apply(m, b if side == "B" else a))
        t = float(np.trace(image).real)
        if t < -ZERO_WEIGHT:
            raise NegativeFactor(f"map image has negative trace {t:.3e}")
        if p * t <= ZERO_WEIGHT:
            continue
        factor = image / t
        if side == "B":
            out.append((p * t, a, factor))
        else:
            out.append((p * t, factor, b))
    return out


def build_from_map(
    base: ProductEnsemble,
    map_b: LocalMap,
    sigma: BipartiteState,
    cert_tol: float = CERT_TOL,
    clip: float = FACTOR_CLIP,
) -> Certificate:
    """Certificate for σ = (I⊗Λ)(base): terms p_i·ρ_A^(i) ⊗ Λ(ρ_B^(i)).

    The map only needs to be positive on the ensemble members.  Weights pick
    up the (generally non-unit) traces of the images and are renormalized.
    """
    terms = _map_terms(base, map_b, "B", clip)
    provenance = {
        "mode": "map",
        "base_ensemble": base,
        "choi_b": choi_of_map(map_b).mat,
    }
    return _finish(terms, sigma, provenance, cert_tol, clip)


def build_from_enhanced(
    base: ProductEnsemble,
    map_a: LocalMap,
    map_b: LocalMap,
    sigma: BipartiteState,
    cert_tol: float = CERT_TOL,
    clip: float = FACTOR_CLIP,
) -> Certificate:
    """Certificate for σ = [I⊗Λ_B + Λ_A⊗I](base); at most twice the base terms."""
    terms = _map_terms(base, map_b, "B", clip) + _map_terms(base, map_a, "A", clip)
    provenance = {
        "mode": "enhanced",
        "base_ensemble": base,
        "choi_b": choi_of_map(map_b).mat,
        "choi_a": choi_of_map(map_a).mat,
    }
    return _finish(terms, sigma, provenance, cert_tol, clip)


def build_from_eigenvalue_criterion(
    sigma: BipartiteState,
    cert_tol: float = CERT_TOL,
    clip: float = FACTOR_CLIP,
) -> Certificate:
    """Constructive certificate for states passing ``eigenvalue_check``.

    With σ̃ the marginal-rescaled state and W = σ̃ - 1/(d(d+1)) ⪰ 0, the map
    Λ with Choi matrix (d+1)·W is positive (PSD Choi) and maps the known
    product decomposition of the boundary isotropic state onto σ:

        σ = Σ_z  d²/((d+1)4^d) |Φ_z⟩⟨Φ_z| ⊗ √σ_B Λ(|Φ_z*⟩⟨Φ_z*|) √σ_B
          + Σ_j  1/(d+1)       |j⟩⟨j|   ⊗ √σ_B Λ(|j⟩⟨j|) √σ_B,

    giving 4^d + d product terms before zero-weight drops.
    """
    report = eigenvalue_check(sigma)
    if report.verdict != SEPARABLE:
        raise CriterionNotMet(
            f"min eigenvalue {report.statistic:.6g} below threshold {report.threshold:.6g}"
        )
    d = sigma.dA
    tilde, sigma_b = filter_normalize(sigma)
    w_mat = tilde.mat - np.eye(d * d) / (d * (d + 1))
    lam = map_of_choi((d + 1) * w_mat, d, d)
    wb, vb = eigh_checked(sigma_b)
    sqrt_b = (vb * np.sqrt(np.maximum(wb, 0.0))) @ vb.conj().T

    raw = []
    c_z = d * d / ((d + 1) * 4.0**d)
    for z in phase_vectors(d):
        ket = phase_ket(z)
        a = np.outer(ket, ket.conj())
        ket_c = ket.conj()
        image = hermitian_part(sqrt_b @ apply(lam, np.outer(ket_c, ket_c.conj())) @ sqrt_b)
        t = float(np.trace(image).real)
        if c_z * t <= ZERO_WEIGHT:
            continue
        raw.append((c_z * t, a, image / t))
    c_j = 1.0 / (d + 1)
    for j in range(d):
        proj = np.zeros((d, d), dtype=np.complex128)
        proj[j, j] = 1.0
        image = hermitian_part(sqrt_b @ apply(lam, proj) @ sqrt_b)
        t = float(np.trace(image).real)
        if c_j * t <= ZERO_WEIGHT:
            continue
        raw.append((c_j * t, proj, image / t))

    provenance = {
        "mode": "eigenvalue",
        "base_ensemble": isotropic_base_ensemble(d),
        "choi_b": choi_of_map(lam).mat,
        "criterion_statistic": report.statistic,
        "criterion_threshold": report.threshold,
    }
    return _finish(raw, sigma, provenance, cert_tol, clip)


def verify_certificate(
    cert: Certificate, sigma: BipartiteState, tol: float = CERT_TOL
) -> tuple[bool, dict]:
    """Recheck a certificate from raw data; shares only linalg with the builders.

    Recomputes the target digest, the weight simplex, factor Hermiticity,
    positivity and normalization, and the reassembly residual.  Returns
    (verdict, itemized report); never raises.
    """
    checks: dict[str, bool] = {}
    dA, dB = sigma.dims
    checks["dims"] = cert.dims == (dA, dB)
    checks["target_hash"] = cert.target_hash == state_digest(sigma)

    weights = [w for w, _, _ in cert.ensemble.terms]
    checks["weights_positive"] = all(w > 0 for w in weights)
    checks["weights_simplex"] = abs(sum(weights) - 1.0) <= 1e-9

    herm_ok = psd_ok = trace_ok = shape_ok = True
    for _, a, b in cert.ensemble.terms:
        shape_ok &= a.shape == (dA, dA) and b.shape == (dB, dB)
        if not shape_ok:
            break
        for f in (a, b):
            herm_ok &= linalg.herm_defect(f) <= 1e-10
            trace_ok &= abs(np.trace(f).real - 1.0) <= 1e-8
            psd_ok &= float(np.linalg.eigvalsh(hermitian_part(f))[0]) >= -1e-9
    checks["factor_shapes"] = bool(shape_ok)
    checks["factors_hermitian"] = bool(herm_ok)
    checks["factors_unit_trace"] = bool(trace_ok)
    checks["factors_psd"] = bool(psd_ok)

    residual = float("inf")
    if shape_ok:
        acc = np.zeros((dA * dB, dA * dB), dtype=np.complex128)
        for w, a, b in cert.ensemble.terms:
            acc += w * linalg.tensor_product(a, b)
        residual = linalg.frob(sigma.mat - acc)
    checks["residual"] = residual <= tol

    ok = all(checks.values())
    report = {
        "checks": checks,
        "residual": residual,
        "tol": tol,
        "failures": sorted(name for name, passed in checks.items() if not passed),
    }
    return ok, report
