"""Detection pipeline: reach a target state from a separable base by a local map.

Given a base state ρ₀ with known product decomposition and a target σ, the
component identity  S_mnkl = Σ_rs R_mnrs x_klrs  turns (I⊗Λ)(ρ₀) = σ into a
linear system in the map coefficients.  Faithful bases make the system
uniquely solvable (only an eigenvalue check remains); otherwise, and for the
two-sided variant [I⊗Λ_B + Λ_A⊗I](ρ₀) = σ, the search over maps positive on
the ensemble members is an LMI feasibility problem.  Every Separable verdict
is backed by a certificate that has passed the independent verifier; failure
to find a map is always Inconclusive, never a proof of entanglement.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .certificate import (
    Certificate,
    CertificateError,
    build_from_eigenvalue_criterion,
    build_from_enhanced,
    build_from_map,
    verify_certificate,
)
from .criteria import SEPARABLE as CRIT_SEPARABLE
from .criteria import eigenvalue_check
from .linalg import (
    BipartiteState,
    herm_to_realvec,
    hermitian_basis,
    hermitian_part,
    realvec_to_herm,
)
from .maps import LocalMap, apply, apply_local_A, apply_local_B, is_positive_sampled, map_of_choi
from .sdp import (
    EPS_EQ,
    EPS_FEAS,
    InconsistentEqualities,
    LmiBlock,
    LmiProblem,
    solve_feasibility,
)
from .states import (
    MAX_PHASE_DIM,
    ProductEnsemble,
    assemble,
    is_faithful,
    random_faithful_separable,
)

SEPARABLE = "separable"
INCONCLUSIVE = "inconclusive"

LINEAR_PSD_EPS = 1e-9


@dataclass(frozen=True)
class DetectionOutcome:
    """Result of one detection attempt.

    ``status`` is Separable only when ``certificate`` passed verification;
    Inconclusive carries diagnostics but proves nothing about the target.
    """

    status: str
    mode: str | None = None
    certificate: Certificate | None = None
    base_ensemble: ProductEnsemble | None = None
    maps: tuple[LocalMap, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_separable(self) -> bool:
        return self.status == SEPARABLE


def _basis_maps(d_in: int, d_out: int) -> list[LocalMap]:
    """Hermiticity-preserving map basis: one map per Hermitian Choi basis element."""
    return [map_of_choi(h, d_in, d_out) for h in hermitian_basis(d_in * d_out)]


def map_from_coeffs(x: np.ndarray, d_in: int, d_out: int) -> LocalMap:
    """Map with Hermitian Choi matrix given by real coordinates x."""
    return map_of_choi(realvec_to_herm(np.asarray(x, float), d_in * d_out), d_in, d_out)


def assemble_linear_system(
    base: BipartiteState, target: BipartiteState
) -> tuple[np.ndarray, np.ndarray]:
    """Real equality system C·x = b expressing (I⊗Λ_x)(base) = target.

    Unknowns are the real Choi coordinates of a map sending operators on the
    base's B factor to operators on the target's B factor; both sides of the
    equation are Hermitian, giving (dA·dB)² real equations.  For equal local
    dimensions this is the square d⁴×d⁴ system whose invertibility is
    equivalent to faithfulness of the base.
    """
    if base.dA != target.dA:
        raise ValueError(f"base dA={base.dA} does not match target dA={target.dA}")
    cols = [
        herm_to_realvec(apply_local_B(bm, base))
        for bm in _basis_maps(base.dB, target.dB)
    ]
    return np.column_stack(cols), herm_to_realvec(target.mat)


def _ensemble_min_eig(m: LocalMap, ensemble: ProductEnsemble, side: str) -> float:
    vals = []
    for _, a, b in ensemble.terms:
        image = hermitian_part(apply(m, b if side == "B" else a))
        vals.append(float(np.linalg.eigvalsh(image)[0]))
    return min(vals)


def _certified(target, cert_builder, mode, base, maps, diagnostics, cert_tol):
    """Build + independently verify; downgrade to Inconclusive on any failure."""
    try:
        cert = cert_builder()
    except CertificateError as exc:
        diagnostics = dict(diagnostics, certificate_error=str(exc))
        return DetectionOutcome(INCONCLUSIVE, mode, None, base, maps, diagnostics)
    ok, report = verify_certificate(cert, target, cert_tol)
    if not ok:
        diagnostics = dict(diagnostics, verify_failures=report["failures"])
        return DetectionOutcome(INCONCLUSIVE, mode, None, base, maps, diagnostics)
    diagnostics = dict(diagnostics, residual=cert.residual)
    return DetectionOutcome(SEPARABLE, mode, cert, base, maps, diagnostics)


def detect_linear(
    base: ProductEnsemble,
    target: BipartiteState,
    eps_psd: float = LINEAR_PSD_EPS,
    eps_eq: float = EPS_EQ,
    cert_tol: float = 1e-6,
) -> DetectionOutcome:
    """Unique-solution route for faithful bases: solve, then check eigenvalues.

    Falls through to ``detect_basic_sdp`` when the base is not faithful (or
    not square).  Separable iff the solved map is positive on every ensemble
    member to -eps_psd and the reconstruction residual is within tolerance.
    """
    base_state = assemble(base)
    faithful = False
    if base_state.dA == base_state.dB:
        faithful, sigma_min = is_faithful(base_state)
    if not faithful:
        out = detect_basic_sdp(base, target, eps_eq=eps_eq, cert_tol=cert_tol)
        out.diagnostics["fallback"] = "base not faithful: linear -> basic_sdp"
        return out

    c, b = assemble_linear_system(base_state, target)
    x, *_ = np.linalg.lstsq(c, b, rcond=None)
    residual = float(np.linalg.norm(c @ x - b))
    diagnostics = {"eq_residual": residual, "base_sigma_min": sigma_min}
    if residual > eps_eq * (1.0 + float(np.linalg.norm(b))):
        diagnostics["reason"] = "no map connects base to target"
        return DetectionOutcome(INCONCLUSIVE, "linear", None, base, (), diagnostics)
    lam = map_from_coeffs(x, base_state.dB, target.dB)
    min_eig = _ensemble_min_eig(lam, base, "B")
    diagnostics["ensemble_min_eig"] = min_eig
    if min_eig < -eps_psd:
        diagnostics["reason"] = "unique map is not positive on the ensemble"
        return DetectionOutcome(INCONCLUSIVE, "linear", None, base, (lam,), diagnostics)
    return _certified(
        target,
        lambda: build_from_map(base, lam, target, cert_tol),
        "linear",
        base,
        (lam,),
        diagnostics,
        cert_tol,
    )


def _lmi_problem_one_sided(
    base: ProductEnsemble, base_state: BipartiteState, target: BipartiteState
) -> LmiProblem:
    c, b = assemble_linear_system(base_state, target)
    basis = _basis_maps(base_state.dB, target.dB)
    blocks = []
    for _, _, rho_b in base.terms:
        coeffs = np.stack([apply(bm, rho_b) for bm in basis])
        blocks.append(LmiBlock(np.zeros_like(coeffs[0]), coeffs))
    return LmiProblem(len(basis), tuple(blocks), c, b)


def detect_basic_sdp(
    base: ProductEnsemble,
    target: BipartiteState,
    eps_feas: float = EPS_FEAS,
    eps_eq: float = EPS_EQ,
    cert_tol: float = 1e-6,
) -> DetectionOutcome:
    """One-sided LMI feasibility: works for any base, faithful or not.

    Equality constraints pin (I⊗Λ)(ρ₀) = σ; the PSD blocks are Λ(ρ_B^(i))
    over the ensemble members.  Feasible points become verified certificates.
    """
    base_state = assemble(base)
    problem = _lmi_problem_one_sided(base, base_state, target)
    diagnostics: dict = {"n_vars": problem.n_vars}
    try:
        res = solve_feasibility(problem, eps_feas=eps_feas, eps_eq=eps_eq)
    except InconsistentEqualities as exc:
        diagnostics["reason"] = f"inconsistent equalities: {exc}"
        return DetectionOutcome(INCONCLUSIVE, "basic_sdp", None, base, (), diagnostics)
    diagnostics.update(margin=res.margin, iterations=res.iterations, solver=res.solver)
    if not res.feasible:
        return DetectionOutcome(INCONCLUSIVE, "basic_sdp", None, base, (), diagnostics)
    lam = map_from_coeffs(res.x, base_state.dB, target.dB)
    return _certified(
        target,
        lambda: build_from_map(base, lam, target, cert_tol),
        "basic_sdp",
        base,
        (lam,),
        diagnostics,
        cert_tol,
    )


def detect_enhanced(
    base: ProductEnsemble,
    target: BipartiteState,
    eps_feas: float = EPS_FEAS,
    eps_eq: float = EPS_EQ,
    cert_tol: float = 1e-6,
) -> DetectionOutcome:
    """Two-sided variant [I⊗Λ_B + Λ_A⊗I](ρ₀) = σ.

    Strictly enlarges the feasible set of the one-sided search (Λ_A = 0
    embeds it).  Requires equal local dimensions on both factors; for
    rectangular targets it falls back to the one-sided search.
    """
    base_state = assemble(base)
    if not (base_state.dA == base_state.dB == target.dA == target.dB):
        out = detect_basic_sdp(base, target, eps_feas, eps_eq, cert_tol)
        out.diagnostics["fallback"] = "unequal local dims: enhanced -> basic_sdp"
        return out
    d = target.dA
    basis_a = _basis_maps(base_state.dA, d)
    basis_b = _basis_maps(base_state.dB, d)
    na, nb = len(basis_a), len(basis_b)
    cols_a = [herm_to_realvec(apply_local_A(bm, base_state)) for bm in basis_a]
    cols_b = [herm_to_realvec(apply_local_B(bm, base_state)) for bm in basis_b]
    c = np.column_stack(cols_a + cols_b)
    b = herm_to_realvec(target.mat)

    blocks = []
    zero_a = np.zeros((na, d, d), dtype=np.complex128)
    zero_b = np.zeros((nb, d, d), dtype=np.complex128)
    for _, rho_a, rho_b in base.terms:
        coeffs_b = np.concatenate([zero_a, np.stack([apply(bm, rho_b) for bm in basis_b])])
        blocks.append(LmiBlock(np.zeros((d, d), dtype=np.complex128), coeffs_b))
        coeffs_a = np.concatenate([np.stack([apply(bm, rho_a) for bm in basis_a]), zero_b])
        blocks.append(LmiBlock(np.zeros((d, d), dtype=np.complex128), coeffs_a))
    problem = LmiProblem(na + nb, tuple(blocks), c, b)

    diagnostics: dict = {"n_vars": problem.n_vars}
    try:
        res = solve_feasibility(problem, eps_feas=eps_feas, eps_eq=eps_eq)
    except InconsistentEqualities as exc:
        diagnostics["reason"] = f"inconsistent equalities: {exc}"
        return DetectionOutcome(INCONCLUSIVE, "enhanced", None, base, (), diagnostics)
    diagnostics.update(margin=res.margin, iterations=res.iterations, solver=res.solver)
    if not res.feasible:
        return DetectionOutcome(INCONCLUSIVE, "enhanced", None, base, (), diagnostics)
    lam_a = map_from_coeffs(res.x[:na], base_state.dA, d)
    lam_b = map_from_coeffs(res.x[na:], base_state.dB, d)
    return _certified(
        target,
        lambda: build_from_enhanced(base, lam_a, lam_b, target, cert_tol),
        "enhanced",
        base,
        (lam_a, lam_b),
        diagnostics,
        cert_tol,
    )


def _eigenvalue_fast_path(target: BipartiteState, cert_tol: float) -> DetectionOutcome | None:
    if target.dA != target.dB or target.dA > MAX_PHASE_DIM:
        return None
    report = eigenvalue_check(target)
    if report.verdict != CRIT_SEPARABLE:
        return None
    out = _certified(
        target,
        lambda: build_from_eigenvalue_criterion(target, cert_tol),
        "eigenvalue",
        None,
        (),
        {"criterion_statistic": report.statistic, "criterion_threshold": report.threshold},
        cert_tol,
    )
    return out if out.is_separable else None


def detect_auto(
    target: BipartiteState,
    n_bases: int = 16,
    seed: int = 0,
    table: tuple[ProductEnsemble, ...] = (),
    enhanced: bool = True,
    jobs: int = 1,
    eps_feas: float = EPS_FEAS,
    eps_eq: float = EPS_EQ,
    cert_tol: float = 1e-6,
) -> DetectionOutcome:
    """Full policy: analytical fast path, stored bases, then random faithful bases.

    Deterministic given ``seed`` (each base trial gets a spawned child RNG,
    and with jobs > 1 results are merged by trial index, so concurrency does
    not change the outcome).  Inconclusive after all trials means only that
    no connecting map was found.
    """
    fast = _eigenvalue_fast_path(target, cert_tol)
    if fast is not None:
        return fast

    square = target.dA == target.dB
    d_base = target.dA
    n_min, n_max = d_base**2, d_base**4 + 1
    seeds = np.random.SeedSequence(seed).spawn(n_bases)

    trials: list[tuple[str, ProductEnsemble | None]] = [
        (f"table[{i}]", ens) for i, ens in enumerate(table)
    ]

    def draw_base(i: int) -> ProductEnsemble | None:
        rng = np.random.default_rng(seeds[i])
        n_terms = int(rng.integers(n_min, n_max + 1))
        try:
            ens, _, _ = random_faithful_separable(d_base, n_terms, rng)
        except RuntimeError:
            return None
        return ens

    trials += [(f"random[{i}]", draw_base(i)) for i in range(n_bases)]

    def run(item):
        label, ens = item
        if ens is None:
            return label, DetectionOutcome(INCONCLUSIVE, None, diagnostics={"reason": "no faithful base"})
        if enhanced and square:
            return label, detect_enhanced(ens, target, eps_feas, eps_eq, cert_tol)
        return label, detect_basic_sdp(ens, target, eps_feas, eps_eq, cert_tol)

    log = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for start in range(0, len(trials), jobs):
                wave = list(pool.map(run, trials[start : start + jobs]))
                log.extend(wave)
                for label, out in wave:
                    if out.is_separable:
                        out.diagnostics["trials"] = _trial_log(log)
                        return out
    else:
        for item in trials:
            label, out = run(item)
            log.append((label, out))
            if out.is_separable:
                out.diagnostics["trials"] = _trial_log(log)
                return out

    return DetectionOutcome(
        INCONCLUSIVE,
        None,
        diagnostics={"trials": _trial_log(log), "n_bases": n_bases, "seed": seed},
    )


def _trial_log(log) -> list[dict]:
    rows = []
    for label, out in log:
        row = {"base": label, "status": out.status, "mode": out.mode}
        for key in ("margin", "reason", "certificate_error"):
            if key in out.diagnostics:
                row[key] = out.diagnostics[key]
        rows.append(row)
    return rows


def table_prune(
    ensembles: list[ProductEnsemble],
    seed: int = 0,
    n_positivity_samples: int = 100,
    eps_feas: float = EPS_FEAS,
) -> tuple[list[int], list[tuple[int, int]]]:
    """Drop table entries reachable from another entry by a positive map.

    Entry j is dropped when some surviving entry i reaches it via a feasible
    map that is additionally positive on sampled PSD inputs (ensemble
    feasibility alone does not imply positivity, which the dominance argument
    needs).  Returns (kept indices, [(dropped, dominating), ...]); dropped
    entries are recoverable, not destroyed.
    """
    states = [assemble(e) for e in ensembles]
    active = list(range(len(ensembles)))
    dropped: list[tuple[int, int]] = []
    rng = np.random.default_rng(seed)
    for j in list(active):
        for i in active:
            if i == j:
                continue
            out = detect_basic_sdp(ensembles[i], states[j], eps_feas=eps_feas)
            if not (out.is_separable and out.maps):
                continue
            if is_positive_sampled(out.maps[0], n_positivity_samples, rng):
                active.remove(j)
                dropped.append((j, i))
                break
    return active, dropped
