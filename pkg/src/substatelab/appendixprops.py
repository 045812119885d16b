"""Substate properties and their relations to relative entropy and
observational divergence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .divergence import (
    obs_divergence_classical,
    obs_divergence_quantum,
    plogpq,
    relative_entropy,
    relative_entropy_classical,
    support_violation,
    trace_distance,
)
from .qstate import (
    DimensionError,
    Povm,
    as_operator,
    hermitian_part,
    support_projector,
)
from .substate import pure_substate

MODES = ("standard", "weak", "strong")


@dataclass(frozen=True)
class SubstatePropertyQuery:
    rho: np.ndarray
    sigma: np.ndarray
    k: float
    mode: str = "standard"
    r_grid: tuple = (1.5, 2.0, 4.0, 10.0)
    budget: int = 60

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "strong":
            if len(self.r_grid) == 0:
                raise ValueError("r_grid is empty")
            if any(r <= 1 for r in self.r_grid):
                raise ValueError("every r must exceed 1")
        a, b = as_operator(self.rho), as_operator(self.sigma)
        if a.shape != b.shape:
            raise DimensionError(f"states have dims {a.shape[0]} and {b.shape[0]}")
        object.__setattr__(self, "rho", a)
        object.__setattr__(self, "sigma", b)
        object.__setattr__(self, "r_grid", tuple(float(r) for r in self.r_grid))


@dataclass
class RWitness:
    r: float
    status: str  # "holds", "fails" or "inconclusive"
    path: str
    distance: float | None
    bound: float
    min_eig: float | None
    witness: np.ndarray | None = None

    def row(self) -> dict:
        return {"r": self.r, "status": self.status, "path": self.path,
                "distance": self.distance, "bound": self.bound, "min_eig": self.min_eig}


@dataclass
class SubstatePropertyReport:
    mode: str
    k: float
    rows: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return bool(self.rows) and all(w.status == "holds" for w in self.rows)

    @property
    def refuted(self) -> bool:
        return any(w.status == "fails" for w in self.rows)

    @property
    def verdict(self) -> str:
        if self.holds:
            return "holds"
        return "fails" if self.refuted else "inconclusive"

    def to_json(self) -> dict:
        return {"mode": self.mode, "k": self.k, "verdict": self.verdict, "rows": [w.row() for w in self.rows]}


def _is_diagonal(a: np.ndarray, tol: float = 1e-12) -> bool:
    return float(np.max(np.abs(a - np.diag(np.diag(a))), initial=0.0)) <= tol


def _common_basis(a: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    """Eigenbasis shared by two commuting Hermitian matrices, or None."""
    if _is_diagonal(a) and _is_diagonal(b):
        return np.eye(a.shape[0])
    if np.max(np.abs(a @ b - b @ a)) > tol:
        return None
    # a generic combination separates the joint eigenspaces
    _, v = np.linalg.eigh(a + math.e * b)
    if _is_diagonal(v.conj().T @ a @ v, 1e-9) and _is_diagonal(v.conj().T @ b @ v, 1e-9):
        return v
    return None


def _classical_witness(p, q, c):
    """Closest ``P'`` with ``c P' <= Q`` and the exact ``|P - P'|_1``.

    Cap ``P`` at ``Q/c``, then pour the removed mass into the remaining slack.
    """
    cap = q / c
    excess = np.clip(p - cap, 0.0, None)
    m = float(excess.sum())
    pp = np.minimum(p, cap)
    slack = cap - pp
    if m > 0:
        pp = pp + slack * (m / slack.sum())
    return pp, 2 * m


def _clip_candidate(rho, sigma, c):
    """Noncommutative truncation of the likelihood ratio ``sigma^-1/2 rho sigma^-1/2``.

    Returns the state ``sigma^1/2 min(X, s) sigma^1/2 / N`` with the largest
    ``s`` for which ``c`` times it still sits below ``sigma``.
    """
    proj = support_projector(sigma)
    w, v = np.linalg.eigh(hermitian_part(sigma))
    keep = w > 1e-12 * max(w.max(), 1e-300)
    s_half = (v[:, keep] * np.sqrt(w[keep])) @ v[:, keep].conj().T
    s_ihalf = (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].conj().T
    x = hermitian_part(s_ihalf @ (proj @ rho @ proj) @ s_ihalf)
    xw, xv = np.linalg.eigh(x)
    xw = np.clip(xw, 0.0, None)
    weights = np.real(np.einsum("ij,jk,ki->i", xv.conj().T, hermitian_part(sigma), xv))

    def norm(s):
        return float(np.dot(np.minimum(xw, s), weights))

    lo, hi = 0.0, max(float(xw.max()), 1e-300)
    if c * hi <= norm(hi):
        s = hi
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if c * mid <= norm(mid):
                lo = mid
            else:
                hi = mid
        s = lo
    if s <= 0 or norm(s) <= 0:
        return None
    core = (xv * np.minimum(xw, s)) @ xv.conj().T
    tau = hermitian_part(s_half @ core @ s_half)
    return tau / np.real(np.trace(tau))


def _min_eig(sigma, c, tau):
    return float(np.linalg.eigvalsh(hermitian_part(sigma - c * tau))[0])


def _rank_one(a: np.ndarray, tol: float = 1e-10):
    w, v = np.linalg.eigh(hermitian_part(a))
    if w[-1] > 1 - tol and abs(w[:-1]).sum() < tol:
        return v[:, -1]
    return None


def substate_property_check(q: SubstatePropertyQuery) -> SubstatePropertyReport:
    """Search for substate witnesses ``rho(r)`` for every ``r`` on the grid.

    Strong mode is the single test ``rho / 2^k <= sigma``. The other modes try,
    in order: the exact linear-programming answer when ``rho`` and ``sigma``
    commute, the rank-one construction when ``rho`` is pure, and otherwise a
    truncation of the likelihood ratio refined by alternating between moving
    toward ``rho`` and re-truncating. ``"fails"`` is only reported with a
    certificate; a failed search is ``"inconclusive"``.
    """
    rho, sigma, k = q.rho, q.sigma, q.k
    rep = SubstatePropertyReport(q.mode, k)
    if q.mode == "strong":
        m = _min_eig(sigma, 2.0 ** -k, rho) if math.isfinite(k) else 0.0
        rep.rows.append(RWitness(math.nan, "holds" if m >= -1e-9 else "fails", "strong", 0.0, 0.0, m, rho))
        return rep
    scale = (lambda r: 2 / r) if q.mode == "standard" else (lambda r: 2 / math.sqrt(r))
    if support_violation(rho, sigma):
        for r in q.r_grid:
            rep.rows.append(RWitness(r, "fails", "support", None, scale(r), None))
        return rep
    basis = _common_basis(rho, sigma)
    psi = _rank_one(rho)
    for r in q.r_grid:
        c = (r - 1) / (r * 2.0 ** (r * k))
        bound = scale(r)
        if basis is not None:
            p = np.clip(np.real(np.diag(basis.conj().T @ rho @ basis)), 0.0, None)
            qq = np.clip(np.real(np.diag(basis.conj().T @ sigma @ basis)), 0.0, None)
            pp, dist = _classical_witness(p, qq, c)
            tau = (basis * pp) @ basis.conj().T
            status = "holds" if dist <= bound + 1e-12 else "fails"
            rep.rows.append(RWitness(r, status, "commuting", dist, bound, _min_eig(sigma, c, tau), tau))
            continue
        if psi is not None:
            try:
                res = pure_substate(psi, sigma, r, k)
                phi = res.phi
                tau = np.outer(phi, phi.conj())
                dist = trace_distance(rho, tau)
                me = _min_eig(sigma, c, tau)
                if dist <= bound + 1e-9 and me >= -1e-9:
                    rep.rows.append(RWitness(r, "holds", "pure", dist, bound, me, tau))
                    continue
            except ValueError:
                pass
            # any tau with c tau <= sigma has <psi|tau|psi> <= <psi|sigma|psi>/c,
            # so |rho - tau|_1 >= 2 (1 - <psi|sigma|psi>/c)
            lower = 2 * (1 - min(1.0, float(np.real(np.vdot(psi, sigma @ psi))) / c))
            status = "fails" if lower > bound + 1e-12 else "inconclusive"
            rep.rows.append(RWitness(r, status, "pure", lower, bound, None))
            continue
        rep.rows.append(_alternating_search(rho, sigma, c, r, bound, q.budget))
    return rep


def _alternating_search(rho, sigma, c, r, bound, budget) -> RWitness:
    best = None
    target = rho
    for _ in range(budget):
        tau = _clip_candidate(target, sigma, c)
        if tau is None:
            break
        dist = trace_distance(rho, tau)
        if best is None or dist < best[0]:
            best = (dist, tau)
        if dist <= bound:
            break
        # reflect through rho so the next truncation lands closer to it
        target = rho + (rho - tau)
        w, v = np.linalg.eigh(hermitian_part(target))
        w = np.clip(w, 0.0, None)
        target = (v * (w / w.sum())) @ v.conj().T
    if best is None:
        return RWitness(r, "inconclusive", "search", None, bound, None)
    dist, tau = best
    me = _min_eig(sigma, c, tau)
    status = "holds" if dist <= bound and me >= -1e-9 else "inconclusive"
    return RWitness(r, status, "search", dist, bound, me, tau)


def minimal_substate_k(p, q, r_grid: Sequence[float], weak: bool = False, tol: float = 1e-9) -> float:
    """Smallest ``k`` for which the classical pair passes the exact check at every ``r``."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    if np.any((p > 0) & (q <= 0)):
        return math.inf

    def ok(k):
        for r in r_grid:
            c = (r - 1) / (r * 2.0 ** (r * k))
            lim = 1 / math.sqrt(r) if weak else 1 / r
            if float(np.clip(p - q / c, 0.0, None).sum()) > lim:
                return False
        return True

    lo, hi = 0.0, 1.0
    while not ok(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


def minimal_verified_k(rho, sigma, r_grid: Sequence[float], hi: float, mode: str = "standard",
                       tol: float = 1e-6) -> float:
    """Bisect for the smallest ``k <= hi`` at which :func:`substate_property_check`
    confirms the property on ``r_grid``; returns ``hi`` if even that fails."""
    def ok(k):
        return substate_property_check(SubstatePropertyQuery(rho, sigma, k, mode, tuple(r_grid))).holds

    if not ok(hi):
        return hi
    lo = 0.0
    if ok(lo):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


# converses and sandwiches ------------------------------------------------------

@dataclass
class BoundReport:
    name: str
    measured: float
    bound: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.measured, self.bound, self.passed = float(self.measured), float(self.bound), bool(self.passed)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {"name": self.name, "measured": self.measured, "bound": self.bound, "pass": self.passed, **self.extra}


def _divergence(rho, sigma) -> float:
    a, b = as_operator(rho), as_operator(sigma)
    if _is_diagonal(a) and _is_diagonal(b) and a.shape[0] <= 20:
        return obs_divergence_classical(np.real(np.diag(a)), np.real(np.diag(b))).value
    return obs_divergence_quantum(a, b).value


def converse_divergence_bound(rho, sigma, k: float, r_grid: Sequence[float] = (1.5, 2.0, 4.0, 10.0),
                              verify: bool = True) -> BoundReport:
    """``D(rho||sigma) <= 2k + 2`` for a pair with the k-substate property.

    With ``verify`` the property is first confirmed on ``r_grid``; an
    unconfirmed precondition raises ``ValueError``.
    """
    if verify:
        rep = substate_property_check(SubstatePropertyQuery(rho, sigma, k, "standard", tuple(r_grid)))
        if not rep.holds:
            raise ValueError(f"k-substate property not confirmed ({rep.verdict})")
    d = _divergence(rho, sigma)
    return BoundReport("converse_divergence", d, 2 * k + 2, d <= 2 * k + 2 + 1e-6)


def strong_substate_entropy_bound(rho, sigma, k: float) -> BoundReport:
    """``S(rho||sigma) <= k`` when ``rho / 2^k <= sigma``."""
    a, b = as_operator(rho), as_operator(sigma)
    m = _min_eig(b, 2.0 ** -k, a)
    if m < -1e-9:
        raise ValueError(f"rho / 2^k is not below sigma (min eigenvalue {m:.3g})")
    s = relative_entropy(a, b)
    return BoundReport("strong_substate_entropy", s, k, s <= k + 1e-6, {"min_eig": m})


def d_s_sandwich_check(rho, sigma) -> tuple[BoundReport, BoundReport]:
    """``D - 1 <= S`` and ``S <= D (n - 1)`` (classical) or ``+ log n`` (quantum)."""
    a, b = as_operator(rho), as_operator(sigma)
    n = a.shape[0]
    classical = _is_diagonal(a) and _is_diagonal(b)
    if classical:
        s = relative_entropy_classical(np.real(np.diag(a)), np.real(np.diag(b)))
    else:
        s = relative_entropy(a, b)
    if math.isinf(s):
        raise ValueError("relative entropy is infinite")
    d = _divergence(a, b)
    upper = d * (n - 1) + (0.0 if classical else math.log2(n))
    lower = BoundReport("divergence_minus_one_below_entropy", d - 1, s, d - 1 <= s + 1e-6, {"D": d, "S": s})
    upp = BoundReport("entropy_below_scaled_divergence", s, upper, s <= upper + 1e-6,
                      {"D": d, "S": s, "classical": classical})
    return lower, upp


# gap family ----------------------------------------------------------------------

@dataclass
class GapFamily:
    n: int
    k: float
    a: float
    p: np.ndarray
    log2_q: np.ndarray
    s: float
    d: float
    checks: list

    @property
    def q(self) -> np.ndarray:
        return np.exp2(self.log2_q)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "a": self.a, "p": self.p.tolist(), "log2_q": self.log2_q.tolist(),
                "S": self.s, "D": self.d, "checks": [c.to_json() for c in self.checks]}


def truncation_length(r: float, a: float) -> int:
    """Number of leading entries kept by the truncation witness: ``floor(log_a r) + 1``."""
    m = 0
    while a ** m <= r * (1 + 1e-12):
        m += 1
    return m


def gap_family(n: int, k: float, a: float, r_grid: Sequence[float] = (1.5, 2.0, 4.0, 10.0, 100.0)) -> GapFamily:
    """Pair with ``S(P||Q) > (D(P||Q)/2 - 1)(n - 2) - 1``.

    ``p_1 = (a-1)/a``, ``p_i = a^-i (a-1)`` for ``1 < i < n``, ``p_n = a^-(n-1)``,
    ``q_i = p_i 2^(-k a^(i-1))`` for ``i > 1`` and ``q_1`` takes the rest.
    ``Q`` is kept as base-2 logarithms because its tail underflows quickly.
    """
    if n < 4 or k <= 0 or a <= 1:
        raise ValueError("need n >= 4, k > 0 and a > 1")
    a = float(a)
    idx = np.arange(1, n + 1, dtype=float)
    p = np.empty(n)
    p[0] = (a - 1) / a
    p[1:n - 1] = a ** -idx[1:n - 1] * (a - 1)
    p[n - 1] = a ** -(n - 1.0)
    x = np.empty(n)
    x[1:] = k * a ** (idx[1:] - 1)
    log2_q = np.log2(p) - np.where(idx > 1, x, 0.0)
    q1 = 1 - float(np.sum(np.exp2(log2_q[1:])))
    if q1 <= 0:
        raise ValueError(f"infeasible parameters: q_1 = {q1:.3g}")
    log2_q[0] = math.log2(q1)
    x[0] = math.log2(p[0]) - log2_q[0]
    if np.min(np.diff(np.sort(x))) < 1e-12:
        # separate tied likelihood ratios
        q = np.exp2(log2_q) + idx * 1e-12
        log2_q = np.log2(q / q.sum())
        x = np.log2(p) - log2_q
    s = float(np.dot(p, x))
    d = obs_divergence_classical(p, log2_q=log2_q).value

    checks = [
        BoundReport("normalised", float(abs(p.sum() - 1) + abs(np.exp2(log2_q).sum() - 1)), 1e-12,
                    abs(p.sum() - 1) <= 1e-12 and abs(np.exp2(log2_q).sum() - 1) <= 1e-12),
        BoundReport("entropy_above_intermediate", s, k * (n - 1) - k * (n - 2) / a - 1,
                    s > k * (n - 1) - k * (n - 2) / a - 1),
        BoundReport("divergence_converse", d, 2 * (k + 1), d <= 2 * (k + 1) + 1e-9),
        BoundReport("separation", s, (d / 2 - 1) * (n - 2) - 1, s > (d / 2 - 1) * (n - 2) - 1),
    ]
    for r in r_grid:
        m = min(truncation_length(r, a), n)
        pt = np.zeros(n)
        pt[:m] = p[:m]
        pt /= pt.sum()
        dist = float(np.abs(p - pt).sum())
        lhs = np.log2(pt[:m]) + math.log2((r - 1) / r) - r * k
        gap = float(np.max(lhs - log2_q[:m]))
        checks.append(BoundReport(f"truncation_distance_r{r:g}", dist, 2 / r, dist <= 2 / r + 1e-12, {"kept": m}))
        checks.append(BoundReport(f"truncation_substate_r{r:g}", gap, 0.0, gap <= 1e-12, {"kept": m}))
    return GapFamily(n, k, a, p, log2_q, s, d, checks)


def smallest_separating_a(n: int, k: float, a_grid: Sequence[float]) -> float | None:
    """First ``a`` on the grid whose family has ``S > k(n - 2) - 1``."""
    for a in sorted(a_grid):
        try:
            fam = gap_family(n, k, a)
        except ValueError:
            continue
        if fam.s > k * (n - 2) - 1:
            return float(a)
    return None


# two-outcome measurement -----------------------------------------------------------

def _binary_relentropy(p: float, q: float) -> float:
    return plogpq(p, q) + plogpq(1 - p, 1 - q)


def two_outcome_relentropy_bound(rho, sigma) -> tuple[Povm, BoundReport, BoundReport]:
    """Two-outcome POVM ``(F, 1 - F)`` from the divergence witness and the bounds
    ``S(rho||sigma) >= S(F rho||F sigma) >= (S(rho||sigma) - log n)/(n - 1) - 1``."""
    a, b = as_operator(rho), as_operator(sigma)
    n = a.shape[0]
    s = relative_entropy(a, b)
    if math.isinf(s):
        raise ValueError("relative entropy is infinite")
    if _is_diagonal(a) and _is_diagonal(b) and n <= 20:
        res = obs_divergence_classical(np.real(np.diag(a)), np.real(np.diag(b)))
        f = np.zeros((n, n), complex)
        f[list(res.witness), list(res.witness)] = 1.0
    else:
        res = obs_divergence_quantum(a, b)
        f = np.asarray(res.witness)
    f = hermitian_part(f)
    povm = Povm.two_outcome(f)
    p = float(np.clip(np.real(np.trace(f @ a)), 0.0, 1.0))
    q = float(np.clip(np.real(np.trace(f @ b)), 0.0, 1.0))
    s2 = _binary_relentropy(p, q)
    floor = (s - math.log2(n)) / (n - 1) - 1
    upper = BoundReport("measured_below_full", s2, s, s2 <= s + 1e-9, {"D": res.value})
    lower = BoundReport("measured_above_floor", s2, floor, s2 >= floor - 1e-4, {"D": res.value})
    return povm, upper, lower
