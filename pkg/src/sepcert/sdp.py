"""Equality-constrained LMI feasibility.

Problems have the shape: find real x with C·x = b and, for every block i,

    A₀^(i) + Σ_J x_J · A_J^(i)  ⪰  0        (Hermitian blocks)

Feasibility is decided by maximizing the worst block margin t (every block
⪰ t·1), a concave program solved through cvxpy after eliminating the
equalities onto the nullspace.  A result is only reported Feasible after an
independent numpy re-evaluation of the margin and the equality residual at
the returned point; the solver's own claims are never trusted directly.
Infeasibility is never certified: anything short of a verified feasible
point is NotFound, which callers must treat as inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import herm_defect, hermitian_part

FEASIBLE = "feasible"
NOT_FOUND = "not_found"

EPS_FEAS = 1e-7
EPS_EQ = 1e-8
RANK_TOL = 1e-10
MAX_ITER = 20000


class InconsistentEqualities(ValueError):
    """The equality system C·x = b has no solution within tolerance."""


@dataclass(frozen=True)
class LmiBlock:
    """One affine Hermitian family A₀ + Σ_J x_J A_J."""

    const: np.ndarray  # (k, k) Hermitian
    coeffs: np.ndarray  # (n_vars, k, k), each slice Hermitian

    def __post_init__(self):
        const = np.asarray(self.const, dtype=np.complex128)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        k = const.shape[0]
        if const.shape != (k, k) or coeffs.ndim != 3 or coeffs.shape[1:] != (k, k):
            raise ValueError("block shapes are inconsistent")
        for mat in (const, *coeffs):
            scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 0.0)
            if herm_defect(mat) > 1e-12 * scale:
                raise ValueError("block matrices must be Hermitian")
        object.__setattr__(self, "const", const)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def size(self) -> int:
        return self.const.shape[0]

    def at(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the family at x."""
        if self.coeffs.shape[0] == 0:
            return self.const
        return self.const + np.einsum("j,jkl->kl", np.asarray(x, dtype=float), self.coeffs)


@dataclass(frozen=True)
class LmiProblem:
    """Block LMI with optional real equality constraints C·x = b."""

    n_vars: int
    blocks: tuple[LmiBlock, ...]
    eq_c: np.ndarray | None = None
    eq_b: np.ndarray | None = None

    def __post_init__(self):
        for blk in self.blocks:
            if blk.coeffs.shape[0] != self.n_vars:
                raise ValueError("block variable count differs from n_vars")
        if (self.eq_c is None) != (self.eq_b is None):
            raise ValueError("eq_c and eq_b must be given together")
        if self.eq_c is not None:
            c = np.asarray(self.eq_c, dtype=np.float64)
            b = np.asarray(self.eq_b, dtype=np.float64)
            if c.ndim != 2 or c.shape[1] != self.n_vars or b.shape != (c.shape[0],):
                raise ValueError("equality system shapes are inconsistent")
            object.__setattr__(self, "eq_c", c)
            object.__setattr__(self, "eq_b", b)


@dataclass(frozen=True)
class Reduction:
    """Affine reconstruction x = x0 + basis @ y after equality elimination."""

    x0: np.ndarray
    basis: np.ndarray  # (n_vars, nullity), orthonormal columns
    residual: float

    @property
    def nullity(self) -> int:
        return self.basis.shape[1]

    def reconstruct(self, y: np.ndarray | None) -> np.ndarray:
        if self.nullity == 0 or y is None:
            return self.x0
        return self.x0 + self.basis @ np.asarray(y, dtype=float)


@dataclass(frozen=True)
class FeasResult:
    """Outcome of a feasibility solve.

    ``margin`` is the independently re-evaluated min-eigenvalue over blocks at
    ``x`` (for NotFound, at the best candidate seen).  NotFound means "no
    verified feasible point", never "proven infeasible".
    """

    status: str
    x: np.ndarray | None
    margin: float
    iterations: int
    scale: float = 1.0
    eq_residual: float = 0.0
    solver: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def eliminate_equalities(
    p: LmiProblem, eps_eq: float = EPS_EQ, rank_tol: float = RANK_TOL
) -> tuple[LmiProblem, Reduction]:
    """Least-squares particular solution plus orthonormal nullspace basis.

    Raises InconsistentEqualities when the best solution misses b by more
    than eps_eq relative to ||b||.  The reduced problem has one variable per
    nullspace direction; its constant blocks absorb the particular solution.
    """
    if p.eq_c is None:
        ident = np.eye(p.n_vars)
        return p, Reduction(np.zeros(p.n_vars), ident, 0.0)
    c, b = p.eq_c, p.eq_b
    u, s, vt = np.linalg.svd(c, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > max(rank_tol * smax, 1e-300)))
    x0 = np.zeros(p.n_vars)
    if rank:
        x0 = vt[:rank].T @ ((u[:, :rank].T @ b) / s[:rank])
    residual = float(np.linalg.norm(c @ x0 - b))
    if residual > eps_eq * (1.0 + float(np.linalg.norm(b))):
        raise InconsistentEqualities(
            f"equality residual {residual:.3e} exceeds tolerance (rank {rank})"
        )
    basis = vt[rank:].T  # (n_vars, nullity), orthonormal
    reduced_blocks = []
    for blk in p.blocks:
        const = blk.at(x0)
        if basis.shape[1]:
            coeffs = np.einsum("jkl,jm->mkl", blk.coeffs, basis)
        else:
            coeffs = np.zeros((0, blk.size, blk.size), dtype=np.complex128)
        reduced_blocks.append(LmiBlock(hermitian_part(const), coeffs))
    reduced = LmiProblem(basis.shape[1], tuple(reduced_blocks))
    return reduced, Reduction(x0, basis, residual)


def evaluate_margin(p: LmiProblem, x: np.ndarray) -> float:
    """min over blocks of the smallest eigenvalue at x (independent of any solver)."""
    margins = [float(np.linalg.eigvalsh(hermitian_part(blk.at(x)))[0]) for blk in p.blocks]
    return min(margins) if margins else float("inf")


def _real_embed(h: np.ndarray) -> np.ndarray:
    """Symmetric real embedding [[Re, -Im], [Im, Re]]; preserves eigenvalues."""
    re, im = np.real(h), np.imag(h)
    return np.block([[re, -im], [im, re]])


def _margin_sdp_candidates(blocks, n, max_iter):
    """Maximize t with every embedded block ⪰ t·1, one candidate per solver.

    Yields (y, iterations, solver name, clean) where ``clean`` marks a
    converged-optimal status.  Solver output is only a candidate; the caller
    re-evaluates margins independently and may reject it.
    """
    import warnings

    import cvxpy as cp

    y = cp.Variable(n) if n else None
    t = cp.Variable()
    constraints = [t <= 1e6]
    if n:
        constraints.append(cp.norm(y) <= 1e6)
    for blk in blocks:
        k2 = 2 * blk.size
        expr = cp.Constant(_real_embed(blk.const)) - t * np.eye(k2)
        if n:
            flat = np.stack([_real_embed(a) for a in blk.coeffs]).reshape(n, -1)
            lin = cp.reshape(y @ flat, (k2, k2), order="C")
            expr = expr + (lin + lin.T) / 2
        constraints.append(expr >> 0)
    prob = cp.Problem(cp.Maximize(t), constraints)
    for solver, opts in (
        (cp.CLARABEL, {"max_iter": min(max_iter, 500)}),
        (cp.SCS, {"max_iters": min(max_iter, 5000)}),
    ):
        try:
            with warnings.catch_warnings():
                # inaccurate-solution warnings are expected: candidates are
                # re-verified outside the solver
                warnings.simplefilter("ignore")
                prob.solve(solver=solver, **opts)
        except Exception:  # solver-level failure: try the next one
            continue
        if t.value is not None:
            iters = 0
            stats = prob.solver_stats
            if stats is not None and stats.num_iters is not None:
                iters = int(stats.num_iters)
            yv = np.asarray(y.value, dtype=float) if n else np.zeros(0)
            yield yv, iters, str(solver), prob.status == cp.OPTIMAL


def solve_feasibility(
    p: LmiProblem,
    eps_feas: float = EPS_FEAS,
    eps_eq: float = EPS_EQ,
    max_iter: int = MAX_ITER,
) -> FeasResult:
    """Search for x with C·x = b and every block ⪰ eps_feas·scale.

    ``eps_feas`` is relative: blocks are normalized by the largest
    constant-block spectral norm, so rescaling a problem by a positive factor
    cannot change the decision.  Raises InconsistentEqualities when the
    equality system itself rules out any map.
    """
    reduced, red = eliminate_equalities(p, eps_eq)
    norms = [
        float(np.max(np.abs(np.linalg.eigvalsh(hermitian_part(blk.const)))))
        for blk in reduced.blocks
    ]
    scale = max(norms) if norms else 1.0
    if scale <= 0.0:
        scale = 1.0
    eq_norm = 1.0 + (float(np.linalg.norm(p.eq_b)) if p.eq_b is not None else 0.0)

    def finish(x, iters, solver):
        margin = evaluate_margin(p, x)
        eq_res = (
            float(np.linalg.norm(p.eq_c @ x - p.eq_b)) if p.eq_c is not None else 0.0
        )
        ok = margin >= eps_feas * scale and eq_res <= eps_eq * eq_norm
        return FeasResult(
            status=FEASIBLE if ok else NOT_FOUND,
            x=x if ok else None,
            margin=margin,
            iterations=iters,
            scale=scale,
            eq_residual=eq_res,
            solver=solver,
            detail={"nullity": red.nullity},
        )

    if reduced.n_vars == 0 or not reduced.blocks:
        return finish(red.reconstruct(None), 0, "direct")
    best: FeasResult | None = None
    for yv, iters, solver, clean in _margin_sdp_candidates(
        reduced.blocks, reduced.n_vars, max_iter
    ):
        res = finish(red.reconstruct(yv), iters, solver)
        if res.feasible:
            return res
        if best is None or res.margin > best.margin:
            best = res
        if clean:
            # converged optimum below the feasibility floor: no point asking
            # another solver for the same (infeasible-at-level) problem
            break
    if best is None:
        raise RuntimeError("all SDP solvers failed to return a candidate")
    return best
