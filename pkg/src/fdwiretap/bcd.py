"""Block coordinate ascent for sum secrecy rate maximization.

The unclamped secrecy objective is a difference of log-dets, so it is not
concave.  Each -log|R| term is replaced by its tight concave surrogate
max_Q log|Q| - tr(Q R) + dim, which splits the problem into two blocks:
the transmit covariances (a concave log-det-plus-linear program handed to
:mod:`fdwiretap.maxdet`) and the auxiliary matrices, whose optimum is the
closed form Q = R^{-1}.  Alternating the blocks increases the surrogate
monotonically, and after every auxiliary update the surrogate equals the
true unclamped objective.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg, maxdet, system_model
from .channel import ChannelRealization, SystemParams
from .errors import DegenerateChannel
from .maxdet import Congruence, CongruenceDiag, DiagCongruence, ScaledTrace
from .system_model import BidirectionalDesign, SecrecyReport, TransmitDesign


@dataclass(eq=False)
class BcdState:
    """Optimizer state: current design, auxiliaries and objective history.

    ``objective_trace`` holds the surrogate objective in nats after every
    outer iteration and is non-decreasing along the run.
    """

    aux_Q: np.ndarray
    aux_T: np.ndarray
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    status: str = "Running"
    inner_reports: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Affine covariance maps shared by the subproblem builder.


def _sigma_b_maps(params: SystemParams, ch: ChannelRealization, n: int):
    """Variable-dependent part of Bob's interference covariance."""
    maps = []
    d_corr = params.D_corr["b"]
    if np.any(d_corr):
        maps.append((f"W{n}", ScaledTrace(d_corr, params.M_bt)))
    kappa = params.kappa["b"][n]
    if kappa > 0:
        h_n = ch.link("bb", n)
        for m in range(params.N):
            maps.append((f"W{m}", DiagCongruence(h_n, kappa)))
    beta = params.beta["b"][n]
    if beta > 0:
        for m in range(params.N):
            maps.append((f"W{m}", CongruenceDiag(ch.link("bb", m), beta)))
    return maps


def _sigma_e_maps(ch: ChannelRealization, n: int):
    return [(f"W{n}", Congruence(ch.link("be", n)))]


def _fold(maps, const, free: set, fixed: dict):
    """Partial-evaluate fixed variables of an affine expression."""
    out_maps = []
    for name, lmap in maps:
        if name in free:
            out_maps.append((name, lmap))
        else:
            const = const + lmap.apply(fixed[name])
    return out_maps, linalg.hermitize(const)


def _design_point(design: TransmitDesign) -> dict:
    point = {}
    for n, x in enumerate(design.X):
        point[f"X{n}"] = x
    for n, w in enumerate(design.W):
        point[f"W{n}"] = w
    return point


def _one_directional_problem(params: SystemParams, ch: ChannelRealization,
                             aux_q: np.ndarray, aux_t: np.ndarray,
                             design: TransmitDesign, free_x: bool,
                             free_w: bool) -> maxdet.MaxDetProblem:
    n_sub = params.N
    free = set()
    variables = []
    if free_x:
        variables += [(f"X{n}", params.M_a) for n in range(n_sub)]
    if free_w:
        variables += [(f"W{n}", params.M_bt) for n in range(n_sub)]
    free = {name for name, _ in variables}
    fixed = _design_point(design)

    logdet_terms = []
    linear = {name: np.zeros((dim, dim), complex) for name, dim in variables}
    offset = 0.0
    eye_b = np.eye(params.M_br, dtype=complex)
    eye_e = np.eye(params.M_e, dtype=complex)
    for n in range(n_sub):
        sb_maps = _sigma_b_maps(params, ch, n)
        se_maps = _sigma_e_maps(ch, n)
        nb = params.noise["b"][n]
        ne = params.noise["e"][n]
        # log| Sigma_b + H_ab X H_ab^H |
        maps, const = _fold(sb_maps + [(f"X{n}", Congruence(ch.link("ab", n)))],
                            nb * eye_b, free, fixed)
        logdet_terms.append(maxdet.LogDetTerm(const=const, maps=maps))
        # log| Sigma_e |
        maps, const = _fold(se_maps, ne * eye_e, free, fixed)
        logdet_terms.append(maxdet.LogDetTerm(const=const, maps=maps))
        # -tr(Q Sigma_b)
        offset -= nb * linalg.real_trace(aux_q[n])
        for name, lmap in sb_maps:
            coeff = lmap.adjoint(aux_q[n])
            if name in free:
                linear[name] = linear[name] + coeff
            else:
                offset -= linalg.inner(coeff, fixed[name])
        # -tr(T (Sigma_e + H_ae X H_ae^H))
        offset -= ne * linalg.real_trace(aux_t[n])
        for name, lmap in se_maps + [(f"X{n}", Congruence(ch.link("ae", n)))]:
            coeff = lmap.adjoint(aux_t[n])
            if name in free:
                linear[name] = linear[name] + coeff
            else:
                offset -= linalg.inner(coeff, fixed[name])
        offset += (linalg.logdet(aux_q[n]) + linalg.logdet(aux_t[n])
                   + params.M_br + params.M_e)

    constraints = []
    if free_x:
        constraints.append((tuple(f"X{n}" for n in range(n_sub)), params.X_max))
    if free_w:
        constraints.append((tuple(f"W{n}" for n in range(n_sub)), params.W_max))
    return maxdet.MaxDetProblem(
        variables=variables,
        logdet_terms=logdet_terms,
        linear_terms={k: linalg.hermitize(v) for k, v in linear.items()},
        constraints=constraints,
        offset=offset,
    )


# ---------------------------------------------------------------------------
# Auxiliary updates and surrogate evaluation.


def update_auxiliaries(params: SystemParams, ch: ChannelRealization,
                       design: TransmitDesign) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form block update: Q = Sigma_b^{-1}, T = (Sigma_e + Theta_e)^{-1}."""
    aux_q = np.zeros((params.N, params.M_br, params.M_br), complex)
    aux_t = np.zeros((params.N, params.M_e, params.M_e), complex)
    for n in range(params.N):
        aux_q[n] = linalg.psd_inverse(
            system_model.sigma_bob(params, ch, design, n))
        h_ae = ch.link("ae", n)
        se = system_model.sigma_eve(params, ch, design, n)
        aux_t[n] = linalg.psd_inverse(
            linalg.hermitize(se + h_ae @ design.X[n] @ h_ae.conj().T))
    return aux_q, aux_t


def surrogate_objective(params: SystemParams, ch: ChannelRealization,
                        design: TransmitDesign, aux_q: np.ndarray,
                        aux_t: np.ndarray) -> float:
    """Surrogate objective in nats, including the tightness constants.

    With the auxiliaries at their closed-form optimum this equals the
    unclamped secrecy objective exactly.
    """
    total = 0.0
    for n in range(params.N):
        sb = system_model.sigma_bob(params, ch, design, n)
        se = system_model.sigma_eve(params, ch, design, n)
        h_ab = ch.link("ab", n)
        h_ae = ch.link("ae", n)
        theta_b = h_ab @ design.X[n] @ h_ab.conj().T
        theta_e = h_ae @ design.X[n] @ h_ae.conj().T
        total += linalg.logdet(linalg.hermitize(sb + theta_b))
        total += linalg.logdet(se)
        total -= linalg.inner(aux_q[n], sb)
        total -= linalg.inner(aux_t[n], linalg.hermitize(se + theta_e))
        total += linalg.logdet(aux_q[n]) + linalg.logdet(aux_t[n])
        total += params.M_br + params.M_e
    return total


# ---------------------------------------------------------------------------
# Initializations.


def init_uniform(params: SystemParams, with_jamming: bool = False) -> TransmitDesign:
    """Scaled-identity covariances with equal power across subcarriers.

    Information covariances take the full budget; jamming starts at zero
    unless ``with_jamming`` spreads the full jamming budget uniformly.
    """
    design = TransmitDesign.zeros(params)
    x_scale = params.X_max / (params.N * params.M_a)
    for n in range(params.N):
        design.X[n] = x_scale * np.eye(params.M_a)
    if with_jamming:
        w_scale = params.W_max / (params.N * params.M_bt)
        for n in range(params.N):
            design.W[n] = w_scale * np.eye(params.M_bt)
    return design


def _spatial_beam(f: np.ndarray, g_gram: np.ndarray, nu_f: float,
                  nu_g: float) -> np.ndarray:
    """Unit-trace rank-1 covariance maximizing the desired-to-undesired
    power ratio (tr(F Q F^H) + nu_f) / (tr(G Q G^H) + nu_g).

    ``g_gram`` is G^H G.  The optimizer is the dominant generalized
    eigenvector of the pencil (F^H F + nu_f I, G^H G + nu_g I), computed
    through a Hermitian whitening so the deterministic phase convention of
    :func:`fdwiretap.linalg.dominant_eigenpair` applies.
    """
    dim = g_gram.shape[0]
    if not np.any(f) and not np.any(g_gram):
        raise DegenerateChannel("both desired and undesired channels are zero")
    a = linalg.hermitize(f.conj().T @ f + nu_f * np.eye(dim))
    b = linalg.hermitize(g_gram + nu_g * np.eye(dim))
    vals, vecs = np.linalg.eigh(b)
    b_inv_half = (vecs / np.sqrt(vals)) @ vecs.conj().T
    _, u, _ = linalg.dominant_eigenpair(
        linalg.hermitize(b_inv_half @ a @ b_inv_half))
    m = b_inv_half @ u
    m = m / np.linalg.norm(m)
    idx = np.flatnonzero(np.abs(m) > 1e-12)
    if idx.size:
        m = m * (np.conj(m[idx[0]]) / np.abs(m[idx[0]]))
    return np.outer(m, m.conj())


def residual_si_gram(params: SystemParams, ch: ChannelRealization,
                     n: int, node: str = "b") -> np.ndarray:
    """Gram matrix of the effective SI leakage channel for the jamming beam.

    tr(residual_si_gram @ W) is the total distortion power the jamming
    covariance W injects into the node's own receiver on subcarrier n.
    """
    si_link = "bb" if node == "b" else "aa"
    h = ch.link(si_link, n)
    gram = h.conj().T @ h
    kappa = params.kappa[node][n]
    beta = params.beta[node][n]
    d_corr = params.D_corr[node]
    out = kappa * np.diag(np.real(np.diagonal(gram))).astype(complex)
    out = out + beta * gram
    out = out + linalg.real_trace(d_corr) * np.eye(gram.shape[0])
    return linalg.hermitize(out)


def init_optimal_beam(params: SystemParams, ch: ChannelRealization) -> TransmitDesign:
    """Rank-1 beams toward the desired receiver, away from leakage paths.

    The information beam treats the Alice-Eve channel as undesired; the
    jamming beam treats the residual-SI leakage into Bob's own receiver as
    undesired.  Power is split equally across subcarriers.
    """
    design = TransmitDesign.zeros(params)
    for n in range(params.N):
        h_ae = ch.link("ae", n)
        q_x = _spatial_beam(ch.link("ab", n), h_ae.conj().T @ h_ae,
                            params.noise["b"][n], params.noise["e"][n])
        design.X[n] = (params.X_max / params.N) * q_x
        q_w = _spatial_beam(ch.link("be", n), residual_si_gram(params, ch, n),
                            params.noise["e"][n], params.noise["b"][n])
        design.W[n] = (params.W_max / params.N) * q_w
    return design


def init_random(params: SystemParams, seed: int) -> TransmitDesign:
    """Wishart-style random PSD covariances, trace-normalized per budget."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    design = TransmitDesign.zeros(params)
    for n in range(params.N):
        design.X[n] = _random_covariance(rng, params.M_a,
                                         params.X_max / params.N)
        design.W[n] = _random_covariance(rng, params.M_bt,
                                         params.W_max / params.N)
    return design


def _random_covariance(rng: np.random.Generator, dim: int,
                       trace: float) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    v = g @ g.conj().T
    return v * (trace / np.real(np.trace(v)))


# ---------------------------------------------------------------------------
# Main loop.


@dataclass(eq=False)
class BcdResult:
    design: TransmitDesign
    report: SecrecyReport
    state: BcdState


def _design_from_point(design: TransmitDesign, point: dict) -> None:
    for name, value in point.items():
        n = int(name[1:])
        if name.startswith("X"):
            design.X[n] = value
        else:
            design.W[n] = value


def _extrapolate(params, ch, design, prob, point, prev_point, f_new, state,
                 setter=_design_from_point,
                 aux_fn=None, surrogate_fn=None):
    """Safeguarded extrapolation along the last block-update displacement.

    Alternating updates contract linearly near the optimum, so stepping
    past the new iterate along (point - prev_point) and projecting back
    often recovers several iterations at once.  A candidate is kept only
    when the tight surrogate improves, which preserves the monotone
    objective trace.
    """
    aux_fn = aux_fn or update_auxiliaries
    surrogate_fn = surrogate_fn or surrogate_objective
    best_point, best_f, best_aux = point, f_new, None
    for theta in (1.0, 3.0, 9.0):
        cand = {name: point[name] + theta * (point[name] - prev_point[name])
                for name in point}
        cand = maxdet.project_feasible(prob, cand)
        trial = design.copy()
        setter(trial, cand)
        aux = aux_fn(params, ch, trial)
        args = aux if isinstance(aux, tuple) else (aux,)
        f_cand = surrogate_fn(params, ch, trial, *args)
        if f_cand <= best_f:
            break
        best_point, best_f, best_aux = cand, f_cand, aux
    if best_aux is not None:
        setter(design, best_point)
        if isinstance(best_aux, tuple):
            state.aux_Q, state.aux_T = best_aux
        else:
            state.aux_Q, state.aux_T = best_aux["Qb"], best_aux["Tae"]
    return best_point, best_f, best_aux


def optimize(params: SystemParams, ch: ChannelRealization,
             init: TransmitDesign | None = None, outer_tol: float = 1e-4,
             max_outer: int = 50, inner_tol: float = 1e-6,
             inner_max_iter: int = 200, optimize_x: bool = True,
             optimize_w: bool = True) -> BcdResult:
    """Alternate the transmit-covariance subproblem with the closed-form
    auxiliary updates until the surrogate objective stabilizes.

    The auxiliaries are refreshed from the initial design before the first
    subproblem so the surrogate starts tight.  Blocks can be frozen
    (``optimize_x`` / ``optimize_w``) for the half-duplex and equal-power
    comparison strategies.
    """
    design = (init or init_uniform(params)).copy()
    aux_q, aux_t = update_auxiliaries(params, ch, design)
    state = BcdState(aux_Q=aux_q, aux_T=aux_t)
    f_cur = surrogate_objective(params, ch, design, aux_q, aux_t)
    state.objective_trace.append(f_cur)
    if optimize_x or optimize_w:
        prev_point = None
        for _ in range(max_outer):
            state.iterations += 1
            prob = _one_directional_problem(params, ch, state.aux_Q,
                                            state.aux_T, design,
                                            optimize_x, optimize_w)
            full = _design_point(design)
            point = {name: full[name] for name, _ in prob.variables}
            point, inner_report = maxdet.solve(prob, point,
                                               max_iter=inner_max_iter,
                                               tol=inner_tol)
            state.inner_reports.append(inner_report)
            _design_from_point(design, point)
            state.aux_Q, state.aux_T = update_auxiliaries(params, ch, design)
            f_new = surrogate_objective(params, ch, design, state.aux_Q,
                                        state.aux_T)
            if prev_point is not None:
                point, f_new, _ = _extrapolate(params, ch, design, prob,
                                               point, prev_point, f_new,
                                               state)
            prev_point = point
            state.objective_trace.append(f_new)
            gap = abs(f_new - f_cur)
            if gap < outer_tol * (1.0 + abs(f_new)):
                state.converged = True
                state.status = "Converged"
                f_cur = f_new
                break
            f_cur = f_new
        else:
            state.status = "StalledBelowTolerance"
    else:
        state.converged = True
        state.status = "Converged"
    report = system_model.secrecy_rates(params, ch, design)
    return BcdResult(design=design, report=report, state=state)


def benchmark_best(params: SystemParams, ch: ChannelRealization,
                   restarts: int = 20, seed: int = 0,
                   **opt_kwargs) -> BcdResult:
    """Best of ``restarts`` random initializations, by clamped sum rate."""
    best = None
    for r in range(restarts):
        init = init_random(params, np.random.SeedSequence([seed, r])
                           .generate_state(1)[0])
        result = optimize(params, ch, init=init, **opt_kwargs)
        if best is None or result.report.I_sum > best.report.I_sum:
            best = result
    return best


# ---------------------------------------------------------------------------
# Bidirectional variant.


def _bi_point(design: BidirectionalDesign) -> dict:
    point = {}
    for n in range(design.X_a.shape[0]):
        point[f"Xa{n}"] = design.X_a[n]
        point[f"Wa{n}"] = design.W_a[n]
        point[f"Xb{n}"] = design.X_b[n]
        point[f"Wb{n}"] = design.W_b[n]
    return point


def _bi_from_point(design: BidirectionalDesign, point: dict) -> None:
    arrays = {"Xa": design.X_a, "Wa": design.W_a,
              "Xb": design.X_b, "Wb": design.W_b}
    for name, value in point.items():
        arrays[name[:2]][int(name[2:])] = value


def _sigma_node_maps(params: SystemParams, ch: ChannelRealization,
                     node: str, n: int):
    """Variable-dependent part of a FD node's interference covariance."""
    if node == "a":
        si_link, cross_link, partner_w = "aa", "ba", "Wb"
        own = ("Xa", "Wa")
        dim_own = params.M_at
    else:
        si_link, cross_link, partner_w = "bb", "ab", "Wa"
        own = ("Xb", "Wb")
        dim_own = params.M_bt
    maps = [(f"{partner_w}{n}", Congruence(ch.link(cross_link, n)))]
    d_corr = params.D_corr[node]
    if np.any(d_corr):
        for key in own:
            maps.append((f"{key}{n}", ScaledTrace(d_corr, dim_own)))
    kappa = params.kappa[node][n]
    if kappa > 0:
        h_n = ch.link(si_link, n)
        for m in range(params.N):
            for key in own:
                maps.append((f"{key}{m}", DiagCongruence(h_n, kappa)))
    beta = params.beta[node][n]
    if beta > 0:
        for m in range(params.N):
            h_m = ch.link(si_link, m)
            for key in own:
                maps.append((f"{key}{m}", CongruenceDiag(h_m, beta)))
    return maps


def _sigma_e_bi_maps(ch: ChannelRealization, n: int):
    return [(f"Wa{n}", Congruence(ch.link("ae", n))),
            (f"Wb{n}", Congruence(ch.link("be", n)))]


def update_auxiliaries_bidirectional(params: SystemParams,
                                     ch: ChannelRealization,
                                     design: BidirectionalDesign) -> dict:
    """Closed-form auxiliary updates for both directions."""
    aux = {"Qb": np.zeros((params.N, params.M_br, params.M_br), complex),
           "Qa": np.zeros((params.N, params.M_ar, params.M_ar), complex),
           "Tae": np.zeros((params.N, params.M_e, params.M_e), complex),
           "Tbe": np.zeros((params.N, params.M_e, params.M_e), complex)}
    for n in range(params.N):
        aux["Qb"][n] = linalg.psd_inverse(
            system_model.sigma_node_bidirectional(params, ch, design, "b", n))
        aux["Qa"][n] = linalg.psd_inverse(
            system_model.sigma_node_bidirectional(params, ch, design, "a", n))
        se = system_model.sigma_eve_bidirectional(params, ch, design, n)
        h_ae = ch.link("ae", n)
        h_be = ch.link("be", n)
        aux["Tae"][n] = linalg.psd_inverse(linalg.hermitize(
            se + h_ae @ design.X_a[n] @ h_ae.conj().T))
        aux["Tbe"][n] = linalg.psd_inverse(linalg.hermitize(
            se + h_be @ design.X_b[n] @ h_be.conj().T))
    return aux


def surrogate_objective_bidirectional(params: SystemParams,
                                      ch: ChannelRealization,
                                      design: BidirectionalDesign,
                                      aux: dict) -> float:
    total = 0.0
    for n in range(params.N):
        sb = system_model.sigma_node_bidirectional(params, ch, design, "b", n)
        sa = system_model.sigma_node_bidirectional(params, ch, design, "a", n)
        se = system_model.sigma_eve_bidirectional(params, ch, design, n)
        h_ab = ch.link("ab", n)
        h_ba = ch.link("ba", n)
        h_ae = ch.link("ae", n)
        h_be = ch.link("be", n)
        total += linalg.logdet(linalg.hermitize(
            sb + h_ab @ design.X_a[n] @ h_ab.conj().T))
        total += linalg.logdet(linalg.hermitize(
            sa + h_ba @ design.X_b[n] @ h_ba.conj().T))
        total += 2.0 * linalg.logdet(se)
        total -= linalg.inner(aux["Qb"][n], sb)
        total -= linalg.inner(aux["Qa"][n], sa)
        total -= linalg.inner(aux["Tae"][n], linalg.hermitize(
            se + h_ae @ design.X_a[n] @ h_ae.conj().T))
        total -= linalg.inner(aux["Tbe"][n], linalg.hermitize(
            se + h_be @ design.X_b[n] @ h_be.conj().T))
        total += (linalg.logdet(aux["Qb"][n]) + linalg.logdet(aux["Qa"][n])
                  + linalg.logdet(aux["Tae"][n]) + linalg.logdet(aux["Tbe"][n]))
        total += params.M_br + params.M_ar + 2 * params.M_e
    return total


def _bidirectional_problem(params: SystemParams, ch: ChannelRealization,
                           aux: dict, design: BidirectionalDesign,
                           free_keys: set) -> maxdet.MaxDetProblem:
    n_sub = params.N
    dims = {"Xa": params.M_at, "Wa": params.M_at,
            "Xb": params.M_bt, "Wb": params.M_bt}
    variables = [(f"{key}{n}", dims[key]) for key in ("Xa", "Wa", "Xb", "Wb")
                 if key in free_keys for n in range(n_sub)]
    free = {name for name, _ in variables}
    fixed = _bi_point(design)

    logdet_terms = []
    linear = {name: np.zeros((dim, dim), complex) for name, dim in variables}
    offset = 0.0
    eye = {"a": np.eye(params.M_ar, dtype=complex),
           "b": np.eye(params.M_br, dtype=complex),
           "e": np.eye(params.M_e, dtype=complex)}

    def add_linear(maps, aux_mat):
        nonlocal offset
        for name, lmap in maps:
            coeff = lmap.adjoint(aux_mat)
            if name in free:
                linear[name] = linear[name] + coeff
            else:
                offset -= linalg.inner(coeff, fixed[name])

    for n in range(n_sub):
        na = params.noise["a"][n]
        nb = params.noise["b"][n]
        ne = params.noise["e"][n]
        sb_maps = _sigma_node_maps(params, ch, "b", n)
        sa_maps = _sigma_node_maps(params, ch, "a", n)
        se_maps = _sigma_e_bi_maps(ch, n)
        theta_ab = [(f"Xa{n}", Congruence(ch.link("ab", n)))]
        theta_ba = [(f"Xb{n}", Congruence(ch.link("ba", n)))]
        theta_ae = [(f"Xa{n}", Congruence(ch.link("ae", n)))]
        theta_be = [(f"Xb{n}", Congruence(ch.link("be", n)))]

        maps, const = _fold(sb_maps + theta_ab, nb * eye["b"], free, fixed)
        logdet_terms.append(maxdet.LogDetTerm(const=const, maps=maps))
        maps, const = _fold(sa_maps + theta_ba, na * eye["a"], free, fixed)
        logdet_terms.append(maxdet.LogDetTerm(const=const, maps=maps))
        maps, const = _fold(se_maps, ne * eye["e"], free, fixed)
        logdet_terms.append(maxdet.LogDetTerm(const=const, maps=maps,
                                              weight=2.0))

        offset -= nb * linalg.real_trace(aux["Qb"][n])
        add_linear(sb_maps, aux["Qb"][n])
        offset -= na * linalg.real_trace(aux["Qa"][n])
        add_linear(sa_maps, aux["Qa"][n])
        offset -= ne * linalg.real_trace(aux["Tae"][n])
        add_linear(se_maps + theta_ae, aux["Tae"][n])
        offset -= ne * linalg.real_trace(aux["Tbe"][n])
        add_linear(se_maps + theta_be, aux["Tbe"][n])
        offset += (linalg.logdet(aux["Qb"][n]) + linalg.logdet(aux["Qa"][n])
                   + linalg.logdet(aux["Tae"][n]) + linalg.logdet(aux["Tbe"][n]))
        offset += params.M_br + params.M_ar + 2 * params.M_e

    constraints = []
    group_a = tuple(name for name, _ in variables if name[1] == "a")
    group_b = tuple(name for name, _ in variables if name[1] == "b")
    if group_a:
        constraints.append((group_a, params.P_A_max))
    if group_b:
        constraints.append((group_b, params.P_B_max))
    return maxdet.MaxDetProblem(
        variables=variables,
        logdet_terms=logdet_terms,
        linear_terms={k: linalg.hermitize(v) for k, v in linear.items()},
        constraints=constraints,
        offset=offset,
    )


@dataclass(eq=False)
class BcdBidirectionalResult:
    design: BidirectionalDesign
    report: SecrecyReport
    state: BcdState


def init_uniform_bidirectional(params: SystemParams) -> BidirectionalDesign:
    """Full-budget uniform information covariances, zero jamming."""
    design = BidirectionalDesign.zeros(params)
    for n in range(params.N):
        design.X_a[n] = (params.P_A_max / (params.N * params.M_at)
                         ) * np.eye(params.M_at)
        design.X_b[n] = (params.P_B_max / (params.N * params.M_bt)
                         ) * np.eye(params.M_bt)
    return design


def optimize_bidirectional(params: SystemParams, ch: ChannelRealization,
                           init: BidirectionalDesign | None = None,
                           outer_tol: float = 1e-4, max_outer: int = 50,
                           inner_tol: float = 1e-6, inner_max_iter: int = 200,
                           jam_a: bool = True, jam_b: bool = True,
                           tx_a: bool = True, tx_b: bool = True
                           ) -> BcdBidirectionalResult:
    """Bidirectional block coordinate ascent over up to four covariance sets.

    ``jam_a`` / ``jam_b`` control whether each node's jamming covariances
    are optimized; disabled jammers stay at their initial value (zero for
    the default initialization).  ``tx_a`` / ``tx_b`` likewise freeze a
    node's information covariances, which silences that direction when the
    initial value is zero.
    """
    design = (init or init_uniform_bidirectional(params)).copy()
    free_keys = set()
    if tx_a:
        free_keys.add("Xa")
    if tx_b:
        free_keys.add("Xb")
    if jam_a:
        free_keys.add("Wa")
    if jam_b:
        free_keys.add("Wb")
    aux = update_auxiliaries_bidirectional(params, ch, design)
    state = BcdState(aux_Q=aux["Qb"], aux_T=aux["Tae"])
    f_cur = surrogate_objective_bidirectional(params, ch, design, aux)
    state.objective_trace.append(f_cur)
    if not free_keys:
        state.converged = True
        state.status = "Converged"
        report = system_model.secrecy_rates_bidirectional(params, ch, design)
        return BcdBidirectionalResult(design=design, report=report,
                                      state=state)
    prev_point = None
    for _ in range(max_outer):
        state.iterations += 1
        prob = _bidirectional_problem(params, ch, aux, design, free_keys)
        full = _bi_point(design)
        point = {name: full[name] for name, _ in prob.variables}
        point, inner_report = maxdet.solve(prob, point,
                                           max_iter=inner_max_iter,
                                           tol=inner_tol)
        state.inner_reports.append(inner_report)
        _bi_from_point(design, point)
        aux = update_auxiliaries_bidirectional(params, ch, design)
        state.aux_Q, state.aux_T = aux["Qb"], aux["Tae"]
        f_new = surrogate_objective_bidirectional(params, ch, design, aux)
        if prev_point is not None:
            point, f_new, aux_best = _extrapolate(
                params, ch, design, prob, point, prev_point, f_new, state,
                setter=_bi_from_point,
                aux_fn=update_auxiliaries_bidirectional,
                surrogate_fn=surrogate_objective_bidirectional)
            if aux_best is not None:
                aux = aux_best
        prev_point = point
        state.objective_trace.append(f_new)
        gap = abs(f_new - f_cur)
        if gap < outer_tol * (1.0 + abs(f_new)):
            state.converged = True
            state.status = "Converged"
            break
        f_cur = f_new
    else:
        state.status = "StalledBelowTolerance"
    report = system_model.secrecy_rates_bidirectional(params, ch, design)
    return BcdBidirectionalResult(design=design, report=report, state=state)
