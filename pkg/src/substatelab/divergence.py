"""Distinguishability measures between quantum states.

All logarithms are base 2. Besides the textbook quantities (trace distance,
fidelity, entropies, mutual information) this module computes the
observational divergence

    D(rho || sigma) = sup_F Tr(F rho) log(Tr(F rho) / Tr(F sigma)),

the supremum running over POVM elements ``0 <= F <= 1``. Two solvers are
provided: an exact enumeration over subsets for classical (diagonal) inputs,
and a boundary sweep for general inputs.

Why the sweep works: the map ``F -> (Tr F rho, Tr F sigma)`` sends the convex
set of POVM elements onto a convex region of the unit square, and
``(p, q) -> p log(p/q)`` is jointly convex, so its maximum sits at an extreme
point of that region. Extreme points with ``p > q`` are exposed by the linear
functionals ``p - t q`` with ``t >= 0``; the maximiser of ``Tr(F (rho - t sigma))``
is the projector onto the positive eigenspace of ``rho - t sigma``, plus
optionally its kernel when the kernel is nontrivial. For diagonal inputs those
projectors are the likelihood-ratio threshold sets, which is why the classical
supremum is attained at an indicator of a subset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qstate import (
    DimensionError,
    LayoutError,
    Povm,
    SubsystemLayout,
    as_operator,
    hermitian_part,
    matrix_to_json,
    partial_trace_matrix,
    psd_sqrt,
)

SUPPORT_REL_TOL = 1e-10
MAX_CLASSICAL_N = 24
OBJECTIVE_P_FLOOR = 1e-12


def _pair(rho, sigma):
    a, b = as_operator(rho), as_operator(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"states have dims {a.shape[0]} and {b.shape[0]}")
    return a, b


def plogpq(p: float, q: float) -> float:
    """``p log(p/q)`` with ``0 log 0 = 0`` and ``+inf`` when only ``q`` vanishes."""
    if p <= 0.0:
        return 0.0
    if q <= 0.0:
        return math.inf
    return p * math.log2(p / q)


def entropy_of_spectrum(w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    return float(max(-np.sum(w * np.log2(w)), 0.0))


def shannon_entropy(p) -> float:
    return entropy_of_spectrum(np.asarray(p, dtype=float))


def binary_entropy(x: float) -> float:
    return shannon_entropy([x, 1.0 - x])


def total_variation(p, q) -> float:
    """``sum_i |P(i) - Q(i)|`` (no factor 1/2)."""
    return float(np.abs(np.asarray(p, float) - np.asarray(q, float)).sum())


def bhattacharyya(p, q) -> float:
    return float(np.sum(np.sqrt(np.clip(np.asarray(p, float), 0, None) * np.clip(np.asarray(q, float), 0, None))))


def relative_entropy_classical(p, q) -> float:
    p, q = np.asarray(p, float), np.asarray(q, float)
    if p.shape != q.shape:
        raise DimensionError(f"distributions have lengths {p.size} and {q.size}")
    if np.any((p > 0) & (q <= 0)):
        return math.inf
    m = p > 0
    return float(max(np.sum(p[m] * np.log2(p[m] / q[m])), 0.0))


def trace_distance(rho, sigma) -> float:
    """``Tr |rho - sigma|``, between 0 and 2."""
    a, b = _pair(rho, sigma)
    return float(np.abs(np.linalg.eigvalsh(hermitian_part(a - b))).sum())


def optimal_distinguishing_measurement(rho, sigma) -> Povm:
    """Two-outcome projective measurement whose outcome distributions are at
    total variation distance ``trace_distance(rho, sigma)``."""
    a, b = _pair(rho, sigma)
    w, v = np.linalg.eigh(hermitian_part(a - b))
    vp = v[:, w >= 0]
    f = vp @ vp.conj().T
    return Povm.two_outcome(f)


def fidelity(rho, sigma) -> float:
    """``Tr sqrt(sqrt(rho) sigma sqrt(rho))``, computed as the trace norm of
    ``sqrt(rho) sqrt(sigma)``."""
    a, b = _pair(rho, sigma)
    s = np.linalg.svd(psd_sqrt(a) @ psd_sqrt(b), compute_uv=False)
    return float(min(s.sum(), 1.0))


def fuchs_caves_measurement(rho, sigma) -> Povm:
    """Complete orthogonal measurement attaining ``fidelity`` as the
    Bhattacharyya coefficient of its outcome distributions.

    With ``x`` one of the two states (the better conditioned on its own
    support) and ``y`` the other, both are compressed onto ``supp(x)``, where
    ``x`` is invertible. The measurement is the eigenbasis of the positive
    operator ``M`` solving ``M x M = y`` there, completed by any basis of
    ``ker(x)``. Compressing ``y`` leaves the fidelity unchanged because
    ``sqrt(x) P sqrt(y)`` and ``sqrt(x) (P y P)^(1/2)`` have the same modulus.
    """
    a, b = _pair(rho, sigma)
    n = a.shape[0]

    def restricted(m):
        w, v = np.linalg.eigh(hermitian_part(m))
        keep = w > SUPPORT_REL_TOL * w[-1]
        return w[keep], v[:, keep], v[:, ~keep]

    ra, rb = restricted(a), restricted(b)
    cond = lambda r: r[0][0] / r[0][-1]
    (w, vs, vk), y = (ra, b) if cond(ra) >= cond(rb) else (rb, a)
    xs = np.diag(np.sqrt(w))
    xi = np.diag(1 / np.sqrt(w))
    yr = hermitian_part(vs.conj().T @ y @ vs)
    m = hermitian_part(xi @ psd_sqrt(xs @ yr @ xs) @ xi)
    _, u = np.linalg.eigh(m)
    basis = np.hstack([vs @ u, vk])
    return Povm.from_basis(basis.reshape(n, n))


def von_neumann_entropy(rho) -> float:
    return entropy_of_spectrum(np.linalg.eigvalsh(hermitian_part(as_operator(rho))))


def support_violation(rho, sigma, rel_tol: float = SUPPORT_REL_TOL) -> bool:
    """True when ``supp(rho)`` is not contained in ``supp(sigma)``.

    Both supports use an eigenvalue cutoff relative to the largest eigenvalue.
    """
    a, b = _pair(rho, sigma)
    wb, vb = np.linalg.eigh(hermitian_part(b))
    null = vb[:, wb <= rel_tol * max(wb[-1], 0.0)]
    if null.shape[1] == 0:
        return False
    wa = np.linalg.eigvalsh(hermitian_part(a))
    outside = np.linalg.eigvalsh(hermitian_part(null.conj().T @ a @ null))
    return bool(outside[-1] > rel_tol * max(wa[-1], 0.0))


def relative_entropy(rho, sigma) -> float:
    """``Tr rho (log rho - log sigma)``; ``+inf`` on a support violation."""
    a, b = _pair(rho, sigma)
    if support_violation(a, b):
        return math.inf
    wa = np.linalg.eigvalsh(hermitian_part(a))
    wb, vb = np.linalg.eigh(hermitian_part(b))
    keep = wb > SUPPORT_REL_TOL * wb[-1]
    vk = vb[:, keep]
    log_b = (vk * np.log2(wb[keep])) @ vk.conj().T
    cross = float(np.real(np.vdot(log_b.conj().T, a)))
    return float(max(-entropy_of_spectrum(wa) - cross, 0.0))


def mutual_information(joint, layout: SubsystemLayout) -> float:
    """``I(A:B) = S(A) + S(B) - S(AB)`` for a two-factor layout."""
    a = as_operator(joint)
    if len(layout) != 2:
        raise LayoutError(f"mutual information needs two factors, got {layout.factors}")
    if layout.dim != a.shape[0]:
        raise LayoutError(f"layout {layout.factors} does not match dim {a.shape[0]}")
    sa = von_neumann_entropy(partial_trace_matrix(a, layout.factors, [0]))
    sb = von_neumann_entropy(partial_trace_matrix(a, layout.factors, [1]))
    val = sa + sb - von_neumann_entropy(a)
    if val < -1e-9:
        raise ArithmeticError(f"mutual information came out negative: {val}")
    return max(val, 0.0)


def encoding_information(prior, states) -> float:
    """``I(X:M) = S(sum_x p_x rho_x) - sum_x p_x S(rho_x)`` for a quantum
    encoding of a classical variable."""
    prior = np.asarray(prior, float)
    ops = [as_operator(s) for s in states]
    avg = sum(p * s for p, s in zip(prior, ops))
    return max(von_neumann_entropy(avg) - sum(p * von_neumann_entropy(s) for p, s in zip(prior, ops)), 0.0)


# observational divergence ---------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    """Grid and refinement settings for :func:`obs_divergence_quantum`."""

    t_count: int = 2000
    t_min: float = 1e-6
    t_max: float = 1e6
    refine_iters: int = 60
    rel_tol: float = 1e-7

    def __post_init__(self):
        if self.t_count < 1 or self.refine_iters < 1:
            raise ValueError("t_count and refine_iters must be at least 1")
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")


@dataclass
class DivergenceResult:
    value: float
    witness: object = None
    stats: dict = field(default_factory=dict)
    p: float = float("nan")
    q: float = float("nan")

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def to_json(self) -> dict:
        if isinstance(self.witness, np.ndarray):
            witness = matrix_to_json(self.witness)
        elif self.witness is None:
            witness = None
        else:
            witness = sorted(int(i) for i in self.witness)
        return {
            "value": "inf" if self.is_infinite else float(self.value),
            "witness": witness,
            "stats": {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.stats.items()},
        }


def obs_divergence_classical(p, q=None, *, log2_q=None) -> DivergenceResult:
    """Exact ``max_S P(S) log(P(S)/Q(S))`` over all ``2^n`` subsets.

    ``Q`` may be given directly or through ``log2_q`` (entries ``-inf`` for
    zeros) when its entries underflow double precision. The witness is the
    maximising subset as a tuple of 0-based indices; ties go to the subset
    with the smallest bitmask.
    """
    p = np.asarray(p, dtype=float)
    if log2_q is None:
        q = np.asarray(q, dtype=float)
        if q.shape != p.shape:
            raise DimensionError(f"distributions have lengths {p.size} and {q.size}")
        if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-12:
            raise ValueError("Q is not a probability vector")
        with np.errstate(divide="ignore"):
            log2_q = np.where(q > 0, np.log2(np.where(q > 0, q, 1.0)), -np.inf)
    else:
        log2_q = np.asarray(log2_q, dtype=float)
        if log2_q.shape != p.shape:
            raise DimensionError(f"distributions have lengths {p.size} and {log2_q.size}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("P is not a probability vector")
    n = p.size
    if n > MAX_CLASSICAL_N:
        raise ValueError(f"subset enumeration refused for n = {n} > {MAX_CLASSICAL_N}")
    bad = np.flatnonzero((p > 0) & np.isneginf(log2_q))
    if bad.size:
        return DivergenceResult(math.inf, tuple(bad.tolist()), {"subsets": 0}, float(p[bad].sum()), 0.0)

    ps = np.zeros(1)
    lq = np.full(1, -np.inf)
    for i in range(n):
        ps = np.concatenate([ps, ps + p[i]])
        lq = np.concatenate([lq, np.logaddexp2(lq, log2_q[i])])
    pos = ps > 0
    obj = np.zeros_like(ps)
    obj[pos] = ps[pos] * (np.log2(ps[pos]) - lq[pos])
    best = int(np.argmax(obj))
    subset = tuple(i for i in range(n) if best >> i & 1)
    return DivergenceResult(
        float(max(obj[best], 0.0)), subset, {"subsets": int(ps.size)}, float(ps[best]), float(2.0 ** lq[best])
    )


def _breakpoints(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Positive ``t`` at which ``a - t b`` becomes singular, on ``supp(b)``."""
    wb, vb = np.linalg.eigh(b)
    keep = wb > SUPPORT_REL_TOL * wb[-1]
    vk = vb[:, keep] / np.sqrt(wb[keep])
    g = np.linalg.eigvalsh(hermitian_part(vk.conj().T @ a @ vk))
    return np.unique(g[g > 0])


class _Sweep:
    """Evaluates the objective at ``F_t`` (and ``F_t`` plus the kernel)."""

    def __init__(self, a: np.ndarray, b: np.ndarray):
        self.a, self.b = a, b
        self.calls = 0

    def batch(self, ts: np.ndarray):
        ts = np.asarray(ts, dtype=float)
        mats = self.a[None] - ts[:, None, None] * self.b[None]
        w, v = np.linalg.eigh(mats)
        self.calls += ts.size
        pa = np.einsum("tij,ik,tkj->tj", v.conj(), self.a, v).real
        pb = np.einsum("tij,ik,tkj->tj", v.conj(), self.b, v).real
        tol = 1e-12 * (1.0 + ts)[:, None]
        pos = w > tol
        ker = np.abs(w) <= tol
        p1, q1 = (pa * pos).sum(1), (pb * pos).sum(1)
        p2, q2 = p1 + (pa * ker).sum(1), q1 + (pb * ker).sum(1)
        return (p1, q1, _objective(p1, q1)), (p2, q2, _objective(p2, q2))

    def value(self, t: float) -> float:
        (_, _, v1), (_, _, v2) = self.batch(np.array([t]))
        return float(max(v1[0], v2[0]))

    def projector(self, t: float, with_kernel: bool) -> np.ndarray:
        w, v = np.linalg.eigh(self.a - t * self.b)
        tol = 1e-12 * (1.0 + t)
        sel = w > tol
        if with_kernel:
            sel |= np.abs(w) <= tol
        vs = v[:, sel]
        return vs @ vs.conj().T


def _objective(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # support violations are handled before the sweep, so a weight on an
    # exact kernel of sigma at this level is rounding noise
    p = np.clip(p, 0.0, 1.0)
    q = np.clip(q, 1e-300, 1.0)
    out = np.zeros_like(p)
    m = p > OBJECTIVE_P_FLOOR
    with np.errstate(divide="ignore"):
        out[m] = p[m] * (np.log2(p[m]) - np.log2(q[m]))
    return np.where(np.isnan(out), -np.inf, out)


def obs_divergence_quantum(rho, sigma, cfg: SweepConfig | None = None) -> DivergenceResult:
    """Certified lower bound on the observational divergence.

    Sweeps ``t`` over ``{0}``, a log grid and the breakpoints of the pencil
    ``rho - t sigma`` (with midpoints between consecutive breakpoints), takes
    the better of ``F_t`` and ``F_t + kernel`` at each point, then
    golden-section refines ``log t`` around the best grid point. The
    reported value is the objective evaluated at the returned witness.
    """
    cfg = cfg or SweepConfig()
    a, b = _pair(rho, sigma)
    a, b = hermitian_part(a), hermitian_part(b)
    n = a.shape[0]
    if support_violation(a, b):
        wb, vb = np.linalg.eigh(b)
        null = vb[:, wb <= SUPPORT_REL_TOL * max(wb[-1], 0.0)]
        f = null @ null.conj().T
        return DivergenceResult(math.inf, f, {"support_violation": True}, float(np.real(np.vdot(f, a))), 0.0)

    bps = _breakpoints(a, b)
    grid = np.geomspace(cfg.t_min, cfg.t_max, cfg.t_count)
    extra = [bps]
    if bps.size:
        extra.append(np.sqrt(bps[1:] * bps[:-1]))
        extra.append(np.array([bps[0] / 2, bps[-1] * 2]))
    ts = np.unique(np.concatenate([[0.0], grid, *extra]))

    sweep = _Sweep(a, b)
    (p1, q1, v1), (p2, q2, v2) = sweep.batch(ts)
    vals = np.stack([v1, v2], axis=1).reshape(-1)  # order: t ascending, F_t before F_t + kernel
    best = int(np.argmax(vals))
    grid_best = float(vals[best])
    t_best, kernel_best = float(ts[best // 2]), bool(best % 2)

    # golden-section refinement on log t between the neighbouring grid points
    i = best // 2
    lo = ts[i - 1] if i > 0 else 0.0
    hi = ts[i + 1] if i + 1 < ts.size else ts[i] * 2
    lo = lo if lo > 0 else (ts[i] if ts[i] > 0 else hi) * 1e-6
    x0, x1 = math.log(lo), math.log(hi)
    gr = (math.sqrt(5) - 1) / 2
    c, d = x1 - gr * (x1 - x0), x0 + gr * (x1 - x0)
    fc, fd = sweep.value(math.exp(c)), sweep.value(math.exp(d))
    refine_best, refine_t = grid_best, t_best
    iters = 0
    for iters in range(1, cfg.refine_iters + 1):
        if fc >= fd:
            x1, d, fd = d, c, fc
            c = x1 - gr * (x1 - x0)
            fc = sweep.value(math.exp(c))
        else:
            x0, c, fc = c, d, fd
            d = x0 + gr * (x1 - x0)
            fd = sweep.value(math.exp(d))
        for x, fx in ((c, fc), (d, fd)):
            if fx > refine_best:
                refine_best, refine_t = fx, math.exp(x)
        if x1 - x0 < cfg.rel_tol:
            break
    if refine_best > grid_best:
        t_best = refine_t
        (_, _, r1), (_, _, r2) = sweep.batch(np.array([t_best]))
        kernel_best = bool(r2[0] > r1[0])

    f = sweep.projector(t_best, kernel_best)
    p = float(np.clip(np.real(np.vdot(f, a)), 0.0, 1.0))
    q = float(np.clip(np.real(np.vdot(f, b)), 0.0, 1.0))
    value = plogpq(p, q)
    if value < 0:
        f, p, q, value = np.zeros((n, n), dtype=complex), 0.0, 0.0, 0.0
    stats = {
        "grid_size": int(ts.size),
        "breakpoints": int(bps.size),
        "iterations": iters,
        "evaluations": sweep.calls,
        "t": t_best,
        "refinement_gap": float(max(refine_best - grid_best, 0.0)),
    }
    return DivergenceResult(value, f, stats, p, q)


def observational_divergence(rho, sigma, cfg: SweepConfig | None = None) -> DivergenceResult:
    """Exact enumeration for commuting diagonal pairs, the sweep otherwise."""
    a, b = _pair(rho, sigma)
    off = lambda m: np.max(np.abs(m - np.diag(np.diag(m)))) if m.size else 0.0
    if off(a) == 0.0 and off(b) == 0.0 and a.shape[0] <= 12:
        pa, pb = np.clip(np.diag(a).real, 0, None), np.clip(np.diag(b).real, 0, None)
        return obs_divergence_classical(pa / pa.sum(), pb / pb.sum())
    return obs_divergence_quantum(a, b, cfg)
