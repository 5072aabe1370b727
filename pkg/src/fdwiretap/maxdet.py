"""Generic concave log-det-plus-linear maximization over PSD variables.

Solves problems of the form

    maximize   sum_t w_t * log|C_t + sum_v A_tv(V_v)|  -  sum_v tr(C_v V_v)
    subject to V_v >= 0,   sum_{v in g} tr(V_v) <= budget_g,

where every A_tv is a Hermitian-preserving linear map.  The method is a
monotone spectral projected gradient ascent: the feasible set admits an
exact Euclidean projection (per-variable eigendecomposition plus a joint
water-level clip of the eigenvalues against each trace budget), Barzilai-
Borwein steps give fast local convergence, and an Armijo backtracking line
search guarantees the objective never decreases across iterates.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from . import linalg
from .errors import InfeasibleStart, NonPositiveDefinite

# ---------------------------------------------------------------------------
# Linear maps on Hermitian matrices, with adjoints for gradient assembly.


class LinearMap:
    """A Hermitian-preserving linear map with an explicit adjoint."""

    def apply(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Congruence(LinearMap):
    """V -> scale * H V H^H."""

    H: np.ndarray
    scale: float = 1.0

    def apply(self, v):
        return self.scale * (self.H @ v @ self.H.conj().T)

    def adjoint(self, g):
        return self.scale * (self.H.conj().T @ g @ self.H)


@dataclass(frozen=True, eq=False)
class ScaledTrace(LinearMap):
    """V -> tr(V) * D for a fixed Hermitian D; V is dim_in x dim_in."""

    D: np.ndarray
    dim_in: int

    def apply(self, v):
        return np.real(np.trace(v)) * self.D

    def adjoint(self, g):
        c = float(np.real(np.sum(np.conj(self.D) * g)))
        return c * np.eye(self.dim_in, dtype=complex)


@dataclass(frozen=True, eq=False)
class DiagCongruence(LinearMap):
    """V -> scale * H diag(V) H^H (transmit-distortion shape)."""

    H: np.ndarray
    scale: float = 1.0

    def apply(self, v):
        d = np.real(np.diagonal(v))
        return self.scale * ((self.H * d) @ self.H.conj().T)

    def adjoint(self, g):
        inner = self.H.conj().T @ g @ self.H
        return self.scale * np.diag(np.real(np.diagonal(inner))).astype(complex)


@dataclass(frozen=True, eq=False)
class CongruenceDiag(LinearMap):
    """V -> scale * diag(H V H^H) (receive-distortion shape)."""

    H: np.ndarray
    scale: float = 1.0

    def apply(self, v):
        full = self.H @ v @ self.H.conj().T
        return self.scale * np.diag(np.real(np.diagonal(full))).astype(complex)

    def adjoint(self, g):
        d = np.real(np.diagonal(g))
        return self.scale * ((self.H.conj().T * d) @ self.H)


# ---------------------------------------------------------------------------
# Problem container.


@dataclass(eq=False)
class LogDetTerm:
    """Contributes weight * log|const + sum_v map_v(V_v)| to the objective."""

    const: np.ndarray
    maps: list  # list of (var_name, LinearMap)
    weight: float = 1.0


@dataclass(eq=False)
class MaxDetProblem:
    """Problem data; see the module docstring for the optimization form.

    ``linear_terms`` maps variable names to Hermitian coefficient matrices C
    contributing -tr(C V).  ``constraints`` is a list of (variable-name
    tuple, budget); a variable may appear in at most one group.  ``offset``
    is an additive constant reported in the objective value.
    """

    variables: list  # list of (name, dim)
    logdet_terms: list = field(default_factory=list)
    linear_terms: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    offset: float = 0.0

    def __post_init__(self):
        names = [name for name, _ in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        seen = set()
        for group, budget in self.constraints:
            if budget <= 0:
                raise ValueError("budgets must be strictly positive")
            for name in group:
                if name in seen:
                    raise ValueError(f"variable {name} in two constraint groups")
                seen.add(name)

    def dims(self) -> dict:
        return dict(self.variables)


class SolverStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    NUMERICAL_TROUBLE = "NumericalTrouble"


@dataclass(eq=False)
class SolverReport:
    objective: float
    iterations: int
    residual: float
    status: SolverStatus
    objective_trace: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Objective evaluation.


def _term_matrix(term: LogDetTerm, point: dict) -> np.ndarray:
    y = term.const.astype(complex, copy=True)
    for name, lmap in term.maps:
        y = y + lmap.apply(point[name])
    return linalg.hermitize(y)


def objective_value(prob: MaxDetProblem, point: dict) -> float:
    """Objective at a feasible point (includes the constant offset)."""
    total = prob.offset
    for term in prob.logdet_terms:
        total += term.weight * linalg.logdet(_term_matrix(term, point))
    for name, coeff in prob.linear_terms.items():
        total -= linalg.inner(coeff, point[name])
    return total


def objective_gradient(prob: MaxDetProblem, point: dict) -> dict:
    """Hermitian gradient of the objective with respect to each variable."""
    grads = {name: -prob.linear_terms[name].astype(complex, copy=True)
             if name in prob.linear_terms
             else np.zeros((dim, dim), complex)
             for name, dim in prob.variables}
    for term in prob.logdet_terms:
        y_inv = linalg.psd_inverse(_term_matrix(term, point))
        for name, lmap in term.maps:
            grads[name] = grads[name] + term.weight * lmap.adjoint(y_inv)
    return {name: linalg.hermitize(g) for name, g in grads.items()}


def _chol_logdet(y: np.ndarray) -> tuple:
    try:
        chol, low = scipy.linalg.cho_factor(y, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NonPositiveDefinite("log-det argument not PD") from exc
    ld = 2.0 * float(np.sum(np.log(np.real(np.diagonal(chol)))))
    return (chol, low), ld


def _term_delta(term: LogDetTerm, direction: dict) -> np.ndarray:
    """Change of the term matrix along a direction (the map part only)."""
    y = np.zeros_like(term.const)
    for name, lmap in term.maps:
        y = y + lmap.apply(direction[name])
    return linalg.hermitize(y)


def _eval_state(prob: MaxDetProblem, point: dict,
                y_mats: list | None = None) -> tuple:
    """Objective, gradient and per-term matrices/log-dets at a point.

    ``y_mats`` can carry the affinely updated term matrices from the line
    search to avoid re-applying the linear maps.
    """
    total = prob.offset
    grads = {name: -prob.linear_terms[name].astype(complex, copy=True)
             if name in prob.linear_terms
             else np.zeros((dim, dim), complex)
             for name, dim in prob.variables}
    for name, coeff in prob.linear_terms.items():
        total -= linalg.inner(coeff, point[name])
    if y_mats is None:
        y_mats = [_term_matrix(term, point) for term in prob.logdet_terms]
    logdets = []
    for term, y in zip(prob.logdet_terms, y_mats):
        factor, ld = _chol_logdet(y)
        logdets.append(ld)
        total += term.weight * ld
        y_inv = scipy.linalg.cho_solve(
            factor, np.eye(y.shape[0], dtype=complex), check_finite=False)
        y_inv = linalg.hermitize(y_inv)
        for name, lmap in term.maps:
            grads[name] = grads[name] + term.weight * lmap.adjoint(y_inv)
    grads = {name: linalg.hermitize(g) for name, g in grads.items()}
    return total, grads, y_mats, logdets


# ---------------------------------------------------------------------------
# Exact projection onto { V >= 0, per-group trace budgets }.


def _clip_to_budget(vals: np.ndarray, budget: float) -> np.ndarray:
    """Project eigenvalues onto {p >= 0, sum p <= budget}."""
    clipped = np.maximum(vals, 0.0)
    total = clipped.sum()
    if total <= budget:
        return clipped
    # Water-level shift: find theta with sum max(vals - theta, 0) = budget.
    srt = np.sort(vals)[::-1]
    csum = np.cumsum(srt)
    k = np.arange(1, srt.size + 1)
    theta_cand = (csum - budget) / k
    valid = theta_cand < srt  # largest k with srt[k-1] > theta
    k_star = int(np.max(k[valid]))
    theta = float((csum[k_star - 1] - budget) / k_star)
    return np.maximum(vals - theta, 0.0)


def project_feasible(prob: MaxDetProblem, point: dict) -> dict:
    """Euclidean projection onto the feasible set.

    Unitary invariance of both the PSD cone and the trace budgets reduces
    the projection to an eigenvalue problem per variable plus a joint
    water-level clip per constraint group.
    """
    out = {}
    grouped = set()
    for group, budget in prob.constraints:
        eigs = []
        for name in group:
            vals, vecs = np.linalg.eigh(linalg.hermitize(point[name]))
            eigs.append((name, vals, vecs))
            grouped.add(name)
        stacked = np.concatenate([vals for _, vals, _ in eigs])
        clipped = _clip_to_budget(stacked, budget)
        pos = 0
        for name, vals, vecs in eigs:
            new_vals = clipped[pos:pos + vals.size]
            pos += vals.size
            out[name] = linalg.hermitize((vecs * new_vals) @ vecs.conj().T)
    for name, _ in prob.variables:
        if name not in grouped:
            out[name] = linalg.psd_clip(point[name])
    return out


def _check_feasible(prob: MaxDetProblem, point: dict,
                    psd_tol: float = 1e-8, budget_tol: float = 1e-8) -> None:
    dims = prob.dims()
    for name, dim in dims.items():
        v = point.get(name)
        if v is None or v.shape != (dim, dim):
            raise InfeasibleStart(f"variable {name} missing or misshaped")
        if linalg.min_eigenvalue(v) < -psd_tol:
            raise InfeasibleStart(f"variable {name} is not PSD")
    for group, budget in prob.constraints:
        total = sum(linalg.real_trace(point[name]) for name in group)
        if total > budget + budget_tol:
            raise InfeasibleStart("trace budget violated at the initial point")


def _stationarity_residual(prob: MaxDetProblem, point: dict, grads: dict) -> float:
    """Norm of the unit-step projected-gradient mapping."""
    shifted = {name: point[name] + grads[name] for name, _ in prob.variables}
    projected = project_feasible(prob, shifted)
    sq = 0.0
    for name, _ in prob.variables:
        diff = point[name] - projected[name]
        sq += float(np.real(np.sum(np.conj(diff) * diff)))
    return float(np.sqrt(sq))


def solve(prob: MaxDetProblem, initial: dict, max_iter: int = 200,
          tol: float = 1e-6) -> tuple[dict, SolverReport]:
    """Monotone spectral projected gradient ascent.

    Returns the final PSD-feasible point and a report whose residual is the
    projected-gradient norm actually tested against ``tol``.  Every accepted
    step increases the objective (Armijo condition), so the returned
    objective is never below the objective at ``initial``.
    """
    _check_feasible(prob, initial)
    point = {name: linalg.hermitize(np.asarray(initial[name], complex))
             for name, _ in prob.variables}
    point = project_feasible(prob, point)
    try:
        f_cur, grads, y_cur, ld_cur = _eval_state(prob, point)
    except Exception as exc:
        raise InfeasibleStart("objective undefined at the initial point") from exc
    trace = [f_cur]
    alpha = 1.0
    residual = _stationarity_residual(prob, point, grads)
    status = SolverStatus.MAX_ITER
    iters = 0
    for iters in range(1, max_iter + 1):
        if residual <= tol:
            status = SolverStatus.CONVERGED
            iters -= 1
            break
        trial = {name: point[name] + alpha * grads[name]
                 for name, _ in prob.variables}
        proj = project_feasible(prob, trial)
        direction = {name: proj[name] - point[name] for name, _ in prob.variables}
        slope = sum(linalg.inner(grads[name], direction[name])
                    for name, _ in prob.variables)
        if slope <= 0:
            # The projected direction is not an ascent direction; the point
            # is numerically stationary at this step scale.
            alpha = max(alpha * 0.1, 1e-10)
            residual = _stationarity_residual(prob, point, grads)
            if residual <= tol:
                status = SolverStatus.CONVERGED
                break
            if alpha <= 1e-10:
                status = SolverStatus.NUMERICAL_TROUBLE
                break
            continue
        # The term matrices are affine along the segment, so each trial
        # step needs only small factorizations, no map applications.
        y_dir = [_term_delta(term, direction) for term in prob.logdet_terms]
        lin_delta = -sum(linalg.inner(coeff, direction[name])
                         for name, coeff in prob.linear_terms.items())
        step = 1.0
        accepted = False
        for _ in range(40):
            try:
                f_cand = f_cur + step * lin_delta
                y_cand = []
                for term, y0, ld0, yd in zip(prob.logdet_terms, y_cur,
                                             ld_cur, y_dir):
                    y = y0 + step * yd
                    _, ld = _chol_logdet(y)
                    f_cand += term.weight * (ld - ld0)
                    y_cand.append(y)
            except NonPositiveDefinite:
                f_cand = -np.inf
            if f_cand >= f_cur + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            status = SolverStatus.NUMERICAL_TROUBLE
            break
        new_point = {name: point[name] + step * direction[name]
                     for name, _ in prob.variables}
        f_cand, new_grads, y_cur, ld_cur = _eval_state(prob, new_point,
                                                       y_mats=y_cand)
        # Barzilai-Borwein step length for the next trial point.
        ss = 0.0
        sy = 0.0
        for name, _ in prob.variables:
            s = new_point[name] - point[name]
            y = grads[name] - new_grads[name]
            ss += float(np.real(np.sum(np.conj(s) * s)))
            sy += float(np.real(np.sum(np.conj(s) * y)))
        alpha = min(max(ss / sy, 1e-8), 1e8) if sy > 1e-16 else 1.0
        point, grads, f_cur = new_point, new_grads, f_cand
        trace.append(f_cur)
        residual = _stationarity_residual(prob, point, grads)
    point = project_feasible(prob, point)
    f_final = objective_value(prob, point)
    trace.append(f_final)
    report = SolverReport(objective=f_final, iterations=iters,
                          residual=residual, status=status,
                          objective_trace=trace)
    return point, report


# ---------------------------------------------------------------------------
# Complexity reporting.


def complexity_from_dims(n: float, n_y: float, n_f: float,
                         gamma: float = 1.0) -> float:
    """Per-iteration FLOP-order estimate gamma*sqrt(n)*(n^2 + n_y^2)*n_f^2."""
    return float(gamma * np.sqrt(n) * (n ** 2 + n_y ** 2) * n_f ** 2)


def complexity_estimate(prob: MaxDetProblem, gamma: float = 1.0) -> float:
    """FLOP-order estimate for one interior-point iteration on ``prob``.

    The scalar variable space counts d^2 real parameters per Hermitian d x d
    variable; the determinant space sums the log-det term dimensions; the
    constraint space sums the variable PSD blocks plus one slack per trace
    budget.  Reporting only, not a runtime guarantee.
    """
    n = sum(dim ** 2 for _, dim in prob.variables)
    n_y = sum(term.const.shape[0] for term in prob.logdet_terms)
    n_f = sum(dim for _, dim in prob.variables) + len(prob.constraints)
    return complexity_from_dims(n, n_y, n_f, gamma)
