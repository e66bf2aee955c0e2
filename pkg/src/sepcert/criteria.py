"""Analytical separability criteria and test oracles.

``eigenvalue_check`` is the constructive sufficient condition at the heart of
this package: rescale the state so its B marginal is maximally mixed and
compare the smallest eigenvalue against 1/(d(d+1)).  ``gurvits_barnum_check``
(the largest Frobenius ball of separable states around the maximally mixed
state) and ``ppt_check`` (partial transpose) are standard criteria used for
comparison and as independent oracles in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    BipartiteState,
    eigh_checked,
    hermitian_part,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
    tensor_product,
)
from .states import maximally_entangled

SEPARABLE = "separable"
ENTANGLED = "entangled"
INCONCLUSIVE = "inconclusive"

EPS_INV = 1e-10
PPT_TOL = 1e-10

#: cushion for verdicts at the exact criterion boundary; the criterion regions
#: are closed sets, so boundary states are covered and only roundoff is absorbed
BOUNDARY_TOL = 1e-12


class SingularMarginal(ValueError):
    """The reduced state is not invertible; the rescaled state is undefined."""


@dataclass(frozen=True)
class CriterionReport:
    """Uniform outcome of a single criterion evaluation.

    ``verdict`` is determined by comparing ``statistic`` against ``threshold``
    in the criterion's documented direction; ``detail`` carries free-form
    diagnostics.
    """

    name: str
    verdict: str
    statistic: float
    threshold: float
    detail: dict

    @property
    def is_separable(self) -> bool:
        return self.verdict == SEPARABLE


def filter_normalize(
    sigma: BipartiteState, eps_inv: float = EPS_INV
) -> tuple[BipartiteState, np.ndarray]:
    """Rescale σ by its B marginal: (1/d)(1⊗σ_B^{-1/2}) σ (1⊗σ_B^{-1/2}).

    The result has a maximally mixed B marginal and the same separability
    status as σ.  Raises SingularMarginal when σ_B has an eigenvalue ≤
    ``eps_inv`` (interior states always qualify).  Returns (rescaled state,
    σ_B).
    """
    if sigma.dA != sigma.dB:
        raise ValueError("marginal rescaling needs dA == dB")
    d = sigma.dA
    sigma_b = hermitian_part(partial_trace(sigma, "A"))
    w, v = eigh_checked(sigma_b)
    if w[0] <= eps_inv:
        raise SingularMarginal(f"B marginal has eigenvalue {w[0]:.3e} <= {eps_inv:.1e}")
    inv_sqrt = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    filt = tensor_product(np.eye(d), inv_sqrt)
    mat = hermitian_part(filt @ sigma.mat @ filt) / d
    return BipartiteState(d, d, mat), sigma_b


def eigenvalue_check(sigma: BipartiteState, eps_inv: float = EPS_INV) -> CriterionReport:
    """Sufficient eigenvalue condition: min eig of the rescaled state ≥ 1/(d(d+1)).

    Never reports Entangled; below threshold the test is simply inconclusive.
    Exact on isotropic states: the verdict flips at mixing parameter 1/(d+1).
    """
    d = sigma.dA
    threshold = 1.0 / (d * (d + 1))
    try:
        tilde, _ = filter_normalize(sigma, eps_inv)
    except SingularMarginal as exc:
        return CriterionReport(
            "eigenvalue", INCONCLUSIVE, float("nan"), threshold, {"error": str(exc)}
        )
    stat = tilde.min_eigenvalue()
    verdict = SEPARABLE if stat >= threshold - BOUNDARY_TOL else INCONCLUSIVE
    return CriterionReport("eigenvalue", verdict, stat, threshold, {"d": d})


def gurvits_barnum_check(sigma: BipartiteState) -> CriterionReport:
    """Frobenius-ball test: ||σ - 1/d²||₂² ≤ 1/(d²(d²-1)) guarantees separability."""
    if sigma.dA != sigma.dB:
        raise ValueError("ball criterion needs dA == dB")
    d = sigma.dA
    diff = sigma.mat - np.eye(d * d) / (d * d)
    stat = float(np.linalg.norm(diff) ** 2)
    threshold = 1.0 / (d * d * (d * d - 1))
    verdict = SEPARABLE if stat <= threshold + BOUNDARY_TOL else INCONCLUSIVE
    return CriterionReport("gurvits-barnum", verdict, stat, threshold, {"d": d})


def ppt_check(sigma: BipartiteState, tol_psd: float = PPT_TOL) -> CriterionReport:
    """Partial-transpose criterion; the oracle used throughout the test suite.

    Entangled iff σ^{T_B} has an eigenvalue below -tol; for dA·dB ≤ 6 a
    non-negative spectrum is sufficient for separability, elsewhere it is
    only necessary and the verdict stays inconclusive.
    """
    stat = min_eigenvalue(partial_transpose(sigma, "B"))
    if stat < -tol_psd:
        verdict = ENTANGLED
    elif sigma.dA * sigma.dB <= 6:
        verdict = SEPARABLE
    else:
        verdict = INCONCLUSIVE
    return CriterionReport("ppt", verdict, stat, -tol_psd, {"dims": sigma.dims})


def spiked_isotropic(d: int, eps: float) -> BipartiteState:
    """Benchmark family: spectrum (ε + 1/(d(d+1)), λ, ..., λ) with uniform marginals.

    λ = 1/(d(d+1)) + δ and δ = (1 - ε - d/(d+1))/(d²-1) ≥ 0, which forces
    ε ≤ 1 - d/(d+1).  Realized inside the isotropic family,
    λ·1 + (ε-δ)·|ψ⁺⟩⟨ψ⁺|, so both marginals are maximally mixed and the
    eigenvalue criterion certifies every member, while for d ≥ 3 part of the
    family lies outside the Gurvits–Barnum ball (see ``gb_gap``).
    """
    eps_max = 1.0 - d / (d + 1.0)
    if not 0.0 <= eps <= eps_max + 1e-15:
        raise ValueError(f"eps must lie in [0, {eps_max}], got {eps}")
    delta = (1.0 - eps - d / (d + 1.0)) / (d * d - 1.0)
    lam = 1.0 / (d * (d + 1.0)) + delta
    mat = lam * np.eye(d * d, dtype=np.complex128) + (eps - delta) * maximally_entangled(d).mat
    return BipartiteState(d, d, mat)


def gb_gap(d: int, eps: float) -> float:
    """||σ(ε) - 1/d²||₂² minus the ball radius² 1/(d²(d²-1)).

    Positive means the eigenvalue criterion certifies a state the ball test
    cannot; at ε = 1 - d/(d+1) the gap is (d-2)/(d³-d), positive for d ≥ 3.
    """
    sigma = spiked_isotropic(d, eps)
    diff = sigma.mat - np.eye(d * d) / (d * d)
    return float(np.linalg.norm(diff) ** 2 - 1.0 / (d * d * (d * d - 1)))
