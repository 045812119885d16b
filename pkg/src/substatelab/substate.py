"""Constructive substate witnesses.

The pieces, from the bottom up:

* :func:`classical_substate` discards the outcomes whose likelihood ratio is
  too large and renormalises;
* :func:`pure_substate` handles a pure first argument through a rank-one
  perturbation argument confined to a two-dimensional subspace;
* :func:`lifting_step`, :func:`saddle_extension` and
  :func:`divergence_lifting` build an extension ``omega`` of ``sigma`` on
  ``H ⊗ K`` that a purification of ``rho`` cannot tell apart from it by
  much, measured by observational divergence;
* :func:`quantum_substate` chains them into the purified substate
  decomposition ``zeta = sqrt(alpha) |phi>|1> + sqrt(1 - alpha) |theta>|0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .divergence import (
    DivergenceResult,
    SweepConfig,
    obs_divergence_classical,
    obs_divergence_quantum,
    relative_entropy,
    support_violation,
    total_variation,
    trace_distance,
)
from .qstate import (
    DimensionError,
    PureState,
    SubsystemLayout,
    as_ket,
    as_operator,
    canonical_purification,
    eigh_desc,
    hermitian_part,
    ket_to_matrix,
    matrix_to_json,
    partial_trace_ket,
    uhlmann_closest_purification,
    vector_to_json,
)


class SubstateError(ValueError):
    """A construction cannot proceed on the given inputs."""


def substate_alpha(r: float, k: float) -> float:
    """``(r - 1) / (r 2^(r k))``."""
    return (r - 1) / r * 2.0 ** (-r * k)


def lifted_kprime(d: float, beta: float) -> float:
    """``beta D - 2 log(1 - beta^(-1/2))``, the exponent of a single lifting step."""
    return beta * d - 2 * math.log2(1 - beta ** -0.5)


def entropy_kprime(k: float) -> float:
    """Closed-form exponent ``k + 4 sqrt(k + 2) + 2 log(k + 2) + 5``."""
    return k + 4 * math.sqrt(k + 2) + 2 * math.log2(k + 2) + 5


def lifting_bound(d: float) -> float:
    """``D + 4 sqrt(D + 1) + 2 log(D + 1) + 4``."""
    return d + 4 * math.sqrt(d + 1) + 2 * math.log2(d + 1) + 4


@dataclass
class SubstateWitness:
    rho_prime: np.ndarray
    alpha: float
    r: float
    k_used: float
    achieved_distance: float
    rho_doubleprime: np.ndarray | None = None

    def to_json(self) -> dict:
        enc = lambda a: None if a is None else (a.tolist() if a.ndim == 1 and np.isrealobj(a) else matrix_to_json(a))
        return {
            "rho_prime": enc(self.rho_prime),
            "rho_doubleprime": enc(self.rho_doubleprime),
            "alpha": self.alpha,
            "r": self.r,
            "k_used": self.k_used,
            "achieved_distance": self.achieved_distance,
        }


@dataclass(frozen=True)
class SubstateCheck:
    passed: bool
    min_eigenvalue: float

    def __bool__(self):
        return self.passed


def substate_check(rho_prime, sigma, c: float, tol: float = 1e-9) -> SubstateCheck:
    """Is ``c rho' <= sigma``, judged by the minimum eigenvalue of the difference?"""
    a, b = as_operator(rho_prime), as_operator(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"states have dims {a.shape[0]} and {b.shape[0]}")
    m = float(np.linalg.eigvalsh(hermitian_part(b - c * a))[0])
    return SubstateCheck(m >= -tol, m)


# classical ------------------------------------------------------------------

def classical_substate(p, q, r: float, k: float, mode: str = "divergence") -> SubstateWitness:
    """Keep the outcomes with ``P(i) / 2^(r k) <= Q(i)`` and renormalise.

    ``mode="divergence"`` expects ``k >= D(P||Q)`` and uses exponent ``r k``;
    ``mode="relative_entropy"`` expects ``k >= S(P||Q)`` and uses
    ``r (k + 1)``. Either way ``alpha P' <= Q`` and ``|P - P'|_1 <= 2/r``,
    and ``P''`` completes ``Q = alpha P' + (1 - alpha) P''``.
    """
    if r <= 1:
        raise ValueError(f"r must exceed 1, got {r}")
    p, q = np.asarray(p, float), np.asarray(q, float)
    if p.shape != q.shape:
        raise DimensionError(f"distributions have lengths {p.size} and {q.size}")
    if mode not in ("divergence", "relative_entropy"):
        raise ValueError(f"unknown mode {mode!r}")
    if np.any((p > 0) & (q <= 0)):
        raise SubstateError("supp(P) is not contained in supp(Q); no finite k works")
    exponent = r * k if mode == "divergence" else r * (k + 1)
    good = p * 2.0 ** (-exponent) <= q
    p_good = p[good].sum()
    p_prime = np.where(good, p, 0.0) / p_good
    alpha = (r - 1) / r * 2.0 ** (-exponent)
    p_dd = (q - alpha * p_prime) / (1 - alpha)
    p_dd = np.clip(p_dd, 0.0, None)
    p_dd /= p_dd.sum()
    return SubstateWitness(p_prime, alpha, r, k, total_variation(p, p_prime), p_dd)


def classical_substate_exact(p, q, r: float) -> SubstateWitness:
    """:func:`classical_substate` with ``k`` the exact ``D(P||Q)``."""
    k = obs_divergence_classical(p, q).value
    if math.isinf(k):
        raise SubstateError("supp(P) is not contained in supp(Q)")
    return classical_substate(p, q, r, k)


# pure first argument ----------------------------------------------------------

@dataclass
class PureSubstate:
    phi: np.ndarray
    alpha: float
    r: float
    k: float
    blocks: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.phi, self.alpha))


def pure_substate(psi, sigma, r: float, k: float, neg_tol: float = 1e-12) -> PureSubstate:
    """Pure state ``phi`` close to ``psi`` with ``alpha |phi><phi| <= sigma``.

    Requires ``k >= D(|psi><psi| || sigma)``. With
    ``M = sigma - |psi><psi| / 2^(r k)``: if ``M >= 0`` then ``phi = psi``.
    Otherwise ``M`` has a single negative eigenvector ``w``; in an orthonormal
    basis ``{v, w}`` of ``span{psi, w}`` the compression of ``sigma`` is
    ``[[a, b], [b*, c]]`` and the rank-one piece ``[[|b|^2/c, b], [b*, c]]``
    still sits below ``sigma``, so ``phi`` is its normalised range
    ``(b v + c w) / norm``. ``blocks`` records the entries ``a, b, c`` of
    ``sigma`` and ``x, y, z`` of ``|psi><psi| / 2^(r k)`` in that basis.
    """
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    v_psi = as_ket(psi)
    s = as_operator(sigma)
    if s.shape[0] != v_psi.shape[0]:
        raise DimensionError(f"psi has dim {v_psi.shape[0]}, sigma has dim {s.shape[0]}")
    alpha = substate_alpha(r, k)
    scale = 2.0 ** (-r * k)
    m = hermitian_part(s - scale * np.outer(v_psi, v_psi.conj()))
    w, vecs = np.linalg.eigh(m)
    neg = np.flatnonzero(w < -neg_tol)
    if neg.size == 0:
        return PureSubstate(v_psi.copy(), alpha, r, k, {"case": "psd", "min_eig": float(w[0])})
    if neg.size > 1:
        raise SubstateError(f"M has {neg.size} negative eigenvalues; k is below the true divergence")
    wv = vecs[:, neg[0]]
    u = v_psi - np.vdot(wv, v_psi) * wv
    if np.linalg.norm(u) < 1e-14:
        raise SubstateError("psi is an eigenvector of M with negative eigenvalue; k is too small")
    vv = u / np.linalg.norm(u)
    a = float(np.real(np.vdot(vv, s @ vv)))
    b = complex(np.vdot(vv, s @ wv))
    c = float(np.real(np.vdot(wv, s @ wv)))
    if c <= 0:
        raise SubstateError("degenerate block c = 0; sigma and psi are numerically inconsistent")
    phi = b * vv + c * wv
    phi = phi / np.linalg.norm(phi)
    ov_v, ov_w = np.vdot(vv, v_psi), np.vdot(wv, v_psi)
    blocks = {
        "case": "rank_one_split",
        "neg_eig": float(w[neg[0]]),
        "a": a,
        "b": b,
        "c": c,
        "x": float(abs(ov_v) ** 2 * scale),
        "y": complex(ov_v * np.conj(ov_w) * scale),
        "z": float(abs(ov_w) ** 2 * scale),
        "scale": scale,
    }
    return PureSubstate(phi, alpha, r, k, blocks)


def pure_substate_measured(psi, sigma, r: float, cfg: SweepConfig | None = None) -> PureSubstate:
    """:func:`pure_substate` with ``k`` from the divergence solver."""
    k = obs_divergence_quantum(as_operator(psi), sigma, cfg).value
    if math.isinf(k):
        raise SubstateError("infinite divergence: psi leaves the support of sigma")
    return pure_substate(psi, sigma, r, k)


# divergence lifting -----------------------------------------------------------

@dataclass(frozen=True)
class LiftingParams:
    """Lifting settings; ``beta``/``gamma`` of ``None`` mean "from the measured D"."""

    beta: float | None = None
    gamma: float | None = None
    l: int = 8
    game_iters: int = 2000
    game_tol: float = 1e-4
    patience: int = 25

    def __post_init__(self):
        if self.beta is not None and self.beta <= 1:
            raise ValueError("beta must exceed 1")
        if self.gamma is not None and self.gamma < 1:
            raise ValueError("gamma must be at least 1")
        if self.l < 1 or self.game_iters < 1 or self.patience < 1:
            raise ValueError("l, game_iters and patience must be positive")
        if self.game_tol <= 0:
            raise ValueError("game_tol must be positive")

    def resolved(self, d: float) -> "LiftingParams":
        beta = self.beta if self.beta is not None else (1 + (d + 1) ** -0.5) ** 2
        gamma = self.gamma if self.gamma is not None else math.sqrt(d + 1)
        return LiftingParams(beta, gamma, self.l, self.game_iters, self.game_tol, self.patience)


def _split_dims(psi, dim_h: int) -> tuple[np.ndarray, int]:
    v = as_ket(psi)
    if v.shape[0] % dim_h:
        raise DimensionError(f"state of dim {v.shape[0]} does not live on H ⊗ K with dim(H) = {dim_h}")
    dk = v.shape[0] // dim_h
    if dk < dim_h:
        raise DimensionError(f"dim(K) = {dk} is smaller than dim(H) = {dim_h}")
    return v, dk


def reduced_state(psi, dim_h: int) -> np.ndarray:
    v, dk = _split_dims(psi, dim_h)
    return hermitian_part(partial_trace_ket(v, (dim_h, dk), [0]))


def _divergence_of_purified(psi, sigma, cfg) -> float:
    d = obs_divergence_quantum(reduced_state(psi, as_operator(sigma).shape[0]), sigma, cfg).value
    if math.isinf(d):
        raise SubstateError("infinite divergence: supp(rho) is not contained in supp(sigma)")
    return d


@dataclass
class LiftingStep:
    phi: np.ndarray
    p: float
    q: float
    k_prime: float

    @property
    def bound(self) -> float:
        return self.p * 2.0 ** (-self.k_prime / self.p)

    @property
    def holds(self) -> bool:
        return self.q >= self.bound - 1e-8


def lifting_step(psi, sigma, f, beta: float, d: float | None = None, cfg: SweepConfig | None = None) -> LiftingStep:
    """Purification ``phi`` of ``sigma`` that keeps the POVM element ``f`` likely.

    Projects ``psi`` through ``f`` (``theta ∝ f |psi>``) and returns the
    purification of ``sigma`` closest to ``theta``. With
    ``k' = beta D(rho||sigma) - 2 log(1 - beta^(-1/2))`` this guarantees
    ``Tr(f phi phi^†) >= p / 2^(k'/p)`` where ``p = Tr(f psi psi^†)``.
    ``d`` defaults to the solver's value of ``D(Tr_K psi || sigma)``.
    """
    if beta <= 1:
        raise ValueError("beta must exceed 1")
    s = as_operator(sigma)
    v, dk = _split_dims(psi, s.shape[0])
    fm = as_operator(f)
    if fm.shape[0] != v.shape[0]:
        raise DimensionError(f"POVM element has dim {fm.shape[0]}, state has dim {v.shape[0]}")
    fv = fm @ v
    p = float(np.real(np.vdot(v, fv)))
    if p <= 0:
        raise SubstateError("Tr(F psi psi^†) = 0; the lifting bound is vacuous")
    if d is None:
        d = _divergence_of_purified(v, s, cfg)
    theta = PureState.normalized(fv, SubsystemLayout((s.shape[0], dk)))
    phi = uhlmann_closest_purification(s, theta).amplitudes
    q = float(np.real(np.vdot(phi, fm @ phi)))
    return LiftingStep(np.array(phi), p, q, lifted_kprime(d, beta))


@dataclass
class BestResponse:
    f: np.ndarray
    value: float
    certified: float
    lam: float


def best_response(omega: np.ndarray, psi: np.ndarray, p: float, rounds: int = 6, points: int = 48) -> BestResponse:
    """Minimise ``Tr(F omega)`` over ``0 <= F <= 1`` with ``<psi|F|psi> >= p``.

    For a multiplier ``lam >= 0`` the Lagrangian minimiser is the projector
    onto the negative eigenspace of ``omega - lam |psi><psi|``, whose weight on
    ``psi`` grows with ``lam``. ``lam`` is bracketed on a log grid and the
    bracket refined on batched linear grids; the two bracketing projectors are
    then mixed to meet the constraint exactly. ``certified`` is the best dual
    value ``lam p + sum(negative eigenvalues)`` seen, a lower bound on the true
    minimum for every ``lam``.
    """
    n = psi.shape[0]
    proj_psi = np.outer(psi, psi.conj())
    if p <= 0:
        return BestResponse(np.zeros((n, n), complex), 0.0, 0.0, 0.0)
    if p >= 1 - 1e-12:
        val = float(np.real(np.vdot(psi, omega @ psi)))
        return BestResponse(proj_psi, val, val, math.inf)

    def evaluate(lams):
        w, v = np.linalg.eigh(omega[None] - lams[:, None, None] * proj_psi[None])
        neg = w < 0
        weight = np.sum(np.abs(np.einsum("lij,i->lj", v.conj(), psi)) ** 2 * neg, axis=1)
        dual = lams * p + np.sum(w * neg, axis=1)
        return w, v, weight, dual

    lams = np.concatenate([[0.0], np.geomspace(1e-6, 1e15, points)])
    best_dual = -math.inf
    lo = hi = None
    for _ in range(rounds):
        w, v, weight, dual = evaluate(lams)
        best_dual = max(best_dual, float(dual.max()))
        above = np.flatnonzero(weight >= p)
        j = int(above[0]) if above.size else lams.size - 1
        hi = (lams[j], w[j], v[j], weight[j])
        if j == 0:
            lo = hi
            break
        lo = (lams[j - 1], w[j - 1], v[j - 1], weight[j - 1])
        if lo[0] >= hi[0] * (1 - 1e-15):
            break
        lams = np.linspace(lo[0], hi[0], points)

    def projector(entry):
        sel = entry[1] < 0
        vs = entry[2][:, sel]
        return vs @ vs.conj().T

    f_lo, f_hi = projector(lo), projector(hi)
    g_lo, g_hi = lo[3], hi[3]
    mu = 1.0 if g_hi <= g_lo else min(max((p - g_lo) / (g_hi - g_lo), 0.0), 1.0)
    f = hermitian_part((1 - mu) * f_lo + mu * f_hi)
    value = float(np.real(np.vdot(f, omega)))
    return BestResponse(f, value, min(best_dual, value), 0.5 * (lo[0] + hi[0]))


@dataclass
class SaddleResult:
    omega: np.ndarray
    p: float
    target: float
    certified_value: float
    iterations: int
    certified: bool

    @property
    def shortfall(self) -> float:
        return max(self.target - self.certified_value, 0.0)


def saddle_extension(psi, sigma, p: float, beta: float, params: LiftingParams | None = None,
                     d: float | None = None, cfg: SweepConfig | None = None) -> SaddleResult:
    """Extension ``omega`` of ``sigma`` with ``Tr(F omega) >= p / 2^(k'/p)`` for
    every POVM element ``F`` satisfying ``Tr(F psi psi^†) >= p``.

    Plays the zero-sum game between the extension and the POVM element by
    fictitious play: the POVM player best-responds to the running average of
    extensions (:func:`best_response`), the extension player answers the
    running average of POVM elements with :func:`lifting_step`. The returned
    ``omega`` is the averaged iterate with the best certified min-value;
    ``certified`` is False when that value stays below ``target - game_tol``.
    """
    params = params or LiftingParams()
    s = as_operator(sigma)
    v, dk = _split_dims(psi, s.shape[0])
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if d is None:
        d = _divergence_of_purified(v, s, cfg)
    kp = lifted_kprime(d, beta)
    target = p * 2.0 ** (-kp / p)
    layout = SubsystemLayout((s.shape[0], dk))

    phi0 = uhlmann_closest_purification(s, PureState(v, layout)).amplitudes
    omega = np.outer(phi0, phi0.conj())
    count = 1
    f_sum = np.zeros_like(omega)
    best_val, best_omega = -math.inf, omega
    last_gain_at = 0
    it = 0
    for it in range(1, params.game_iters + 1):
        br = best_response(omega, v, p)
        if br.certified > best_val + params.game_tol:
            last_gain_at = it
        if br.certified > best_val:
            best_val, best_omega = br.certified, omega
        if it - last_gain_at >= params.patience:
            break
        f_sum += br.f
        step = lifting_step(v, s, f_sum / it, beta, d)
        omega = (count * omega + np.outer(step.phi, step.phi.conj())) / (count + 1)
        count += 1
    return SaddleResult(best_omega, p, target, best_val, it, best_val >= target - params.game_tol)


@dataclass
class LiftingResult:
    omega: np.ndarray
    levels: list
    weights: np.ndarray
    params: LiftingParams
    d_rho_sigma: float
    measured: DivergenceResult
    bound: float
    extension_error: float

    @property
    def certified(self) -> bool:
        return all(lv.certified for lv in self.levels)

    @property
    def measured_divergence(self) -> float:
        return self.measured.value

    def report(self) -> dict:
        return {
            "D_rho_sigma": self.d_rho_sigma,
            "measured_lifted_D": self.measured.value,
            "bound": self.bound,
            "extension_error": self.extension_error,
            "certified": self.certified,
            "beta": self.params.beta,
            "gamma": self.params.gamma,
            "l": self.params.l,
            "levels": [
                {"p": lv.p, "target": lv.target, "certified_value": lv.certified_value,
                 "iterations": lv.iterations, "certified": lv.certified}
                for lv in self.levels
            ],
        }


def divergence_lifting(psi, sigma, params: LiftingParams | None = None, d: float | None = None,
                       cfg: SweepConfig | None = None) -> LiftingResult:
    """Weighted mixture ``sum_i i^(gamma-1) omega(i/l) / sum_i i^(gamma-1)``
    of saddle extensions at the levels ``p = i/l``.

    Also measures ``D(psi psi^† || omega)`` on ``H ⊗ K`` and the bound
    ``D + 4 sqrt(D + 1) + 2 log(D + 1) + 4`` it is compared with.
    """
    params = params or LiftingParams()
    s = as_operator(sigma)
    v, dk = _split_dims(psi, s.shape[0])
    if d is None:
        d = _divergence_of_purified(v, s, cfg)
    params = params.resolved(d)
    levels = [saddle_extension(v, s, i / params.l, params.beta, params, d, cfg) for i in range(1, params.l + 1)]
    weights = np.arange(1, params.l + 1, dtype=float) ** (params.gamma - 1)
    weights /= weights.sum()
    omega = hermitian_part(sum(wt * lv.omega for wt, lv in zip(weights, levels)))
    ext_err = float(np.abs(np.linalg.eigvalsh(
        hermitian_part(_trace_out_k(omega, s.shape[0], dk) - s))).sum())
    measured = obs_divergence_quantum(np.outer(v, v.conj()), omega, cfg)
    return LiftingResult(omega, levels, weights, params, d, measured, lifting_bound(d), ext_err)


def _trace_out_k(omega: np.ndarray, dh: int, dk: int) -> np.ndarray:
    return np.einsum("ikjk->ij", omega.reshape(dh, dk, dh, dk))


# full pipeline ------------------------------------------------------------------

@dataclass
class QuantumSubstate:
    zeta: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    alpha: float
    k_prime: float
    k_prime_theory: float
    alpha_theory: float
    lifting: LiftingResult
    pure: PureSubstate
    report: dict

    @property
    def layout(self) -> SubsystemLayout:
        dh = self.report["dim_h"]
        return SubsystemLayout((dh, self.report["dim_k"], 2))


def _compress_purification(v: np.ndarray, dh: int) -> tuple[np.ndarray, np.ndarray]:
    """Isometry ``V: C^dh -> K`` containing the K-support of ``v``, and the
    coefficients of ``v`` on ``H ⊗ C^dh``."""
    x = ket_to_matrix(v, dh)
    _, _, wh = np.linalg.svd(x, full_matrices=True)
    iso = wh[:dh].T  # rows of x live in the span of these columns
    return iso, (x @ iso.conj()).reshape(-1)


def quantum_substate(rho, sigma, r: float, params: LiftingParams | None = None, psi=None,
                     cfg: SweepConfig | None = None, clamp_tol: float = 1e-9,
                     max_clamped_mass: float = 1e-6) -> QuantumSubstate:
    """Purified substate decomposition of ``sigma`` relative to ``rho``.

    ``psi`` is a purification of ``rho`` on ``H ⊗ K`` (default: the canonical
    one on ``H ⊗ H``). When ``dim K > dim H`` the construction runs on the
    ``dim H``-dimensional subspace of ``K`` carrying ``psi`` and is mapped back.

    Returns ``zeta`` on ``H ⊗ K ⊗ C^2`` with ``Tr_{K C^2} zeta zeta^† = sigma``,
    the pure state ``phi`` near ``psi``, the purification ``theta`` of the
    remainder ``tau_2`` and the weight ``alpha`` computed from the measured
    lifted divergence. ``report`` holds every checked quantity.
    """
    if r <= 1:
        raise ValueError(f"r must exceed 1, got {r}")
    a, s = as_operator(rho), as_operator(sigma)
    if a.shape != s.shape:
        raise DimensionError(f"states have dims {a.shape[0]} and {s.shape[0]}")
    dh = s.shape[0]
    if support_violation(a, s):
        raise SubstateError("infinite divergence: supp(rho) is not contained in supp(sigma)")
    if psi is None:
        v_full = canonical_purification(a).amplitudes
    else:
        v_full = as_ket(psi)
    v_full, dk_full = _split_dims(v_full, dh)
    iso, v = _compress_purification(v_full, dh)

    d_res = obs_divergence_quantum(a, s, cfg)
    lift = divergence_lifting(v, s, params, d_res.value, cfg)
    k_meas = lift.measured.value
    pure = pure_substate(v, lift.omega, r, k_meas)
    phi, alpha = pure.phi, pure.alpha

    tau1 = hermitian_part(partial_trace_ket(phi, (dh, dh), [0]))
    w, vecs = eigh_desc((s - alpha * tau1) / (1 - alpha))
    clamped = float(-w[w < 0].sum())
    if w.min() < -clamp_tol * max(1.0, 1 / (1 - alpha)) and clamped > max_clamped_mass:
        raise SubstateError(f"sigma - alpha tau_1 has negative mass {clamped:.3g}")
    if clamped > max_clamped_mass:
        raise SubstateError(f"clamping would discard mass {clamped:.3g}")
    w = np.clip(w, 0.0, None)
    tau2 = hermitian_part((vecs * (w / w.sum())) @ vecs.conj().T)
    theta = canonical_purification(tau2).amplitudes

    # map H ⊗ C^dh back into H ⊗ K
    lift_k = lambda x: (ket_to_matrix(x, dh) @ iso.T).reshape(-1)
    phi_k, theta_k = lift_k(phi), lift_k(theta)
    e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    zeta = math.sqrt(alpha) * np.kron(phi_k, e1) + math.sqrt(1 - alpha) * np.kron(theta_k, e0)

    zmat = ket_to_matrix(zeta, dh)
    red = hermitian_part(zmat @ zmat.conj().T)
    s_rel = relative_entropy(a, s)
    kp_theory = entropy_kprime(s_rel)
    alpha_theory = substate_alpha(r, kp_theory)
    pp = np.outer(v_full, v_full.conj())
    dist = trace_distance(pp, np.outer(phi_k, phi_k.conj()))
    report = {
        "dim_h": dh,
        "dim_k": dk_full,
        "r": r,
        "S_rho_sigma": s_rel,
        "D_rho_sigma": d_res.value,
        "measured_lifted_D": k_meas,
        "lifting_bound": lift.bound,
        "lifting_certified": lift.certified,
        "alpha": alpha,
        "alpha_theory": alpha_theory,
        "k_prime_theory": kp_theory,
        "trace_distance_psi_phi": dist,
        "distance_bound": 2 / math.sqrt(r),
        "reduction_error": float(np.max(np.abs(red - s))),
        "reduction_error_trace_norm": float(np.abs(np.linalg.eigvalsh(red - s)).sum()),
        "clamped_mass": clamped,
        "substate_min_eig": float(np.linalg.eigvalsh(hermitian_part(lift.omega - alpha * np.outer(phi, phi.conj())))[0]),
    }
    return QuantumSubstate(zeta, phi_k, theta_k, v_full, alpha, k_meas, kp_theory, alpha_theory, lift, pure, report)


def zeta_to_json(res: QuantumSubstate) -> dict:
    return {"zeta": vector_to_json(res.zeta), "layout": res.layout.to_json(), "report": res.report}
