"""Exact simulation of small two-party protocols for the index function and
the privacy attacks and bounds around them.

Register order of a protocol state is ``X, A, Y, M, ANS``: Alice's input and
(trivial) work register, then Bob's index, message and answer registers.
``X`` and ``Y`` can each be held classically (dimension one, value stored on
the side) or quantumly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .divergence import (
    binary_entropy,
    encoding_information,
    entropy_of_spectrum,
    relative_entropy,
    shannon_entropy,
    trace_distance,
)
from .qstate import (
    Povm,
    SubsystemLayout,
    aligning_unitary,
    hermitian_part,
    ket_to_matrix,
    partial_trace_ket,
    random_density,
    random_unitary,
)
from .substate import LiftingParams, quantum_substate

PROTOCOLS = ("index", "send_nothing", "send_all")
REGISTERS = ("X", "A", "Y", "M", "ANS")


def _check_n(n: int, cap: int = 16):
    if n < 1 or n & (n - 1) or n > cap:
        raise ValueError(f"n must be a power of two at most {cap}, got {n}")


def _bits(values: np.ndarray, n: int) -> np.ndarray:
    """Bit table ``b[v, j] = x_(j+1)`` with ``x_1`` the most significant bit."""
    shifts = np.arange(n - 1, -1, -1)
    return (values[:, None] >> shifts) & 1


def parse_bits(x) -> tuple[int, ...]:
    if isinstance(x, str):
        if not x or set(x) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {x!r}")
        return tuple(int(c) for c in x)
    return tuple(int(b) for b in x)


def bits_to_int(bits: Sequence[int]) -> int:
    return int("".join(map(str, bits)), 2) if bits else 0


@dataclass
class ProtocolState:
    amplitudes: np.ndarray  # shape (dX, 1, dY, n, 2)
    n: int
    x_value: int | None = None  # set when X is held classically
    y_value: int | None = None  # 0-based index, set when Y is held classically
    rounds: int = 0

    @property
    def layout(self) -> SubsystemLayout:
        return SubsystemLayout(self.amplitudes.shape)

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def answer_probability(self) -> float:
        """``Pr[ANS = 1]``."""
        return float(np.sum(np.abs(self.amplitudes[..., 1]) ** 2))

    def message_clean(self) -> float:
        """Weight of the message register on ``|0>``."""
        return float(np.sum(np.abs(self.amplitudes[:, :, :, 0, :]) ** 2))


def initial_state(n: int, x=None, y=None, x_amps=None, y_amps=None) -> ProtocolState:
    """Fresh state with ``X`` (``Y``) classical when ``x`` (``y``) is given and
    in the superposition ``x_amps`` (``y_amps``) otherwise."""
    _check_n(n)
    if (x is None) == (x_amps is None) or (y is None) == (y_amps is None):
        raise ValueError("give exactly one of x / x_amps and one of y / y_amps")
    if x is not None:
        bits = parse_bits(x)
        if len(bits) != n:
            raise ValueError(f"x has {len(bits)} bits, expected {n}")
        xa, xv = np.ones(1, complex), bits_to_int(bits)
    else:
        xa, xv = np.asarray(x_amps, complex), None
        if xa.shape != (2 ** n,):
            raise ValueError(f"x_amps must have length {2 ** n}")
    if y is not None:
        if not 0 <= y < n:
            raise IndexError(f"index {y + 1} out of range 1..{n}")
        ya, yv = np.ones(1, complex), int(y)
    else:
        ya, yv = np.asarray(y_amps, complex), None
        if ya.shape != (n,):
            raise ValueError(f"y_amps must have length {n}")
    amps = np.zeros((xa.size, 1, ya.size, n, 2), complex)
    amps[:, 0, :, 0, 0] = np.outer(xa, ya)
    return ProtocolState(amps, n, xv, yv)


def _shift_message(st: ProtocolState, sign: int):
    ys = np.array([st.y_value]) if st.y_value is not None else np.arange(st.n)
    for k, y in enumerate(ys):
        st.amplitudes[:, :, k] = np.roll(st.amplitudes[:, :, k], sign * int(y), axis=2)


def run_index_protocol(st: ProtocolState) -> ProtocolState:
    """The clean one-round protocol: ``M += Y``, Alice ``ANS ^= X_M``, ``M -= Y``."""
    st = ProtocolState(st.amplitudes.copy(), st.n, st.x_value, st.y_value, st.rounds)
    _shift_message(st, +1)
    st.rounds += 1
    xs = np.array([st.x_value]) if st.x_value is not None else np.arange(2 ** st.n)
    table = _bits(xs, st.n).astype(bool)
    for m in range(st.n):
        rows = table[:, m]
        st.amplitudes[rows, :, :, m, :] = st.amplitudes[rows, :, :, m, ::-1]
    st.rounds += 1
    _shift_message(st, -1)
    return st


def simulate_index_protocol(n: int, x, i: int) -> tuple[ProtocolState, int]:
    """Honest run on classical inputs; ``i`` is 1-based. Returns the final
    state and the answer bit."""
    _check_n(n)
    if not 1 <= i <= n:
        raise IndexError(f"index {i} out of range 1..{n}")
    st = run_index_protocol(initial_state(n, x=x, y=i - 1))
    p1 = st.answer_probability()
    if min(p1, 1 - p1) > 1e-12 or st.message_clean() < 1 - 1e-12:
        raise AssertionError("index protocol did not end in a clean basis state")
    return st, int(round(p1))


def success_probability(n: int, superposed: bool = True) -> float:
    """Probability that the answer equals ``x_y`` for uniform inputs, either on
    the uniform superposition or averaged over classical runs."""
    _check_n(n, 8)
    if superposed:
        st = run_index_protocol(initial_state(n, x_amps=np.full(2 ** n, 2 ** (-n / 2)),
                                              y_amps=np.full(n, n ** -0.5)))
        table = _bits(np.arange(2 ** n), n)
        probs = np.abs(st.amplitudes[:, 0, :, 0, :]) ** 2  # (x, y, ans)
        hit = np.take_along_axis(probs, table[:, :, None], axis=2)[..., 0]
        return float(hit.sum())
    total = 0.0
    for xv in range(2 ** n):
        bits = _bits(np.array([xv]), n)[0]
        for y in range(n):
            st = run_index_protocol(initial_state(n, x=bits, y=y))
            total += 1 - st.answer_probability() if bits[y] == 0 else st.answer_probability()
    return total / (2 ** n * n)


# attacks ---------------------------------------------------------------------------

def walsh_hadamard(v: np.ndarray, n: int) -> np.ndarray:
    """``H^{⊗n}`` applied to the leading ``2^n`` axis of ``v``."""
    rest = v.shape[1:]
    t = v.reshape((2,) * n + rest)
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    for ax in range(n):
        t = np.moveaxis(np.tensordot(h, t, axes=([1], [ax])), 0, ax)
    return t.reshape(v.shape)


@dataclass
class HadamardAttack:
    n: int
    information: float
    outcome_given_index: np.ndarray  # (n, 2^n) distribution of Alice's outcome pattern
    position_one_probability: np.ndarray  # (n, n): Pr[outcome_j = 1 | J = i]

    @property
    def expected(self) -> float:
        return math.log2(self.n) / 2


def hadamard_attack(n: int) -> HadamardAttack:
    """Alice feeds ``|+>^n`` into ``X`` against an honest Bob with a uniform
    index ``J``, then Hadamards every ``X_j`` and measures.

    Returns ``I(J : outcome pattern)``, computed exactly from the simulated
    outcome distributions.
    """
    _check_n(n)
    dim = 2 ** n
    x_amps = np.full(dim, dim ** -0.5)
    cond = np.empty((n, dim))
    for i in range(n):
        st = run_index_protocol(initial_state(n, x_amps=x_amps, y=i))
        amps = st.amplitudes.reshape(dim, -1)
        live = np.flatnonzero(np.any(amps != 0, axis=0))  # Bob's registers touched by the run
        after = walsh_hadamard(amps[:, live], n)
        cond[i] = np.sum(np.abs(after) ** 2, axis=1)
    table = _bits(np.arange(dim), n)
    pos = cond @ table
    joint = cond / n
    info = shannon_entropy(joint.sum(axis=0)) + math.log2(n) - shannon_entropy(joint.reshape(-1))
    return HadamardAttack(n, info, cond, pos)


def _bob_states(protocol: str, n: int) -> np.ndarray:
    """Bob's final pure states (rows) for each classical ``x``, with ``Y`` fed
    the uniform superposition."""
    y_amps = np.full(n, n ** -0.5)
    rows = []
    for xv in range(2 ** n):
        bits = _bits(np.array([xv]), n)[0]
        if protocol == "index":
            st = run_index_protocol(initial_state(n, x=bits, y_amps=y_amps))
            rows.append(st.vector)
        elif protocol == "send_nothing":
            rows.append(initial_state(n, x=bits, y_amps=y_amps).vector)
        elif protocol == "send_all":
            copy = np.zeros(2 ** n)
            copy[xv] = 1.0
            rows.append(np.kron(initial_state(n, x=bits, y_amps=y_amps).vector, copy))
        else:
            raise ValueError(f"unknown protocol {protocol!r}; choose from {PROTOCOLS}")
    return np.array(rows)


def superpositional_privacy_loss(protocol: str, n: int, route: str = "gram") -> float:
    """``I(X : B Y)`` when ``X`` is uniformly mixed and ``Y`` uniformly superposed.

    Bob's state given ``x`` is pure, so the loss is the entropy of his average
    state. ``route="gram"`` reads it off the Gram matrix of the conditional
    states, ``route="density"`` builds the classical-quantum joint state and
    calls the generic mutual information (small ``n`` only).
    """
    _check_n(n, 8)
    states = _bob_states(protocol, n)
    prior = np.full(states.shape[0], 1 / states.shape[0])
    if route == "gram":
        gram = (states.conj() @ states.T) * prior[0]
        return max(entropy_of_spectrum(np.linalg.eigvalsh(hermitian_part(gram))), 0.0)
    if route == "density":
        return encoding_information(prior, list(states))
    raise ValueError(f"unknown route {route!r}")


def index_privacy_loss_formula(n: int) -> float:
    """Closed form of the index protocol's loss, ``1 + log(n)/2``."""
    return 1 + math.log2(n) / 2


# random access codes ----------------------------------------------------------------

@dataclass
class EncodingEnsemble:
    states: dict  # bit tuple -> density matrix
    prior: dict
    m: int

    def __post_init__(self):
        if abs(sum(self.prior.values()) - 1) > 1e-12:
            raise ValueError("prior must sum to 1")
        if set(self.prior) != set(self.states):
            raise ValueError("prior and states must share keys")
        for s in self.states.values():
            if s.shape != (2 ** self.m, 2 ** self.m):
                raise ValueError(f"states must have dim {2 ** self.m}")

    @property
    def keys(self) -> list:
        return sorted(self.states)

    def information(self) -> float:
        return encoding_information([self.prior[x] for x in self.keys], [self.states[x] for x in self.keys])


ANTV_ANGLES = {(0, 0): math.pi / 8, (0, 1): -math.pi / 8, (1, 0): 3 * math.pi / 8, (1, 1): 5 * math.pi / 8}


def _real_qubit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


@dataclass
class AntvCode:
    ensemble: EncodingEnsemble
    bases: tuple  # (computational, Hadamard), columns are the outcome-0 and outcome-1 vectors
    success: tuple  # worst-case success for bit 1 and bit 2


def antv_code() -> AntvCode:
    """Two bits in one qubit: real states at the angles in ``ANTV_ANGLES``;
    the computational basis reads ``x1`` and the Hadamard basis reads ``x2``."""
    states = {x: np.outer(_real_qubit(t), _real_qubit(t)).astype(complex) for x, t in ANTV_ANGLES.items()}
    ens = EncodingEnsemble(states, {x: 0.25 for x in states}, 1)
    comp = np.eye(2)
    had = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    succ = []
    for bit, basis in enumerate((comp, had)):
        worst = min(float(np.real(basis[:, x[bit]].conj() @ s @ basis[:, x[bit]])) for x, s in states.items())
        succ.append(worst)
    return AntvCode(ens, (comp, had), tuple(succ))


def antv_angle_oracle(step_deg: float = 1.0) -> float:
    """Brute-force check of the two-bit code on a degree grid.

    The first basis is the computational one and the second a real basis at
    angle ``phi``. Each input gets the real encoding angle maximising its
    average success over the two bits; the value is the best ``phi`` of the
    worst input's average.
    """
    theta = np.deg2rad(np.arange(0, 360, step_deg))
    phi = np.deg2rad(np.arange(0, 180, step_deg))
    s1 = np.cos(theta) ** 2  # Pr[outcome 0 of the computational basis]
    s2 = np.cos(theta[None, :] - phi[:, None]) ** 2  # outcome 0 vector (cos phi, sin phi)
    per_x = []
    for x1, x2 in product((0, 1), repeat=2):
        a = s1 if x1 == 0 else 1 - s1
        b = s2 if x2 == 0 else 1 - s2
        per_x.append(np.max((a[None, :] + b) / 2, axis=1))
    return float(np.max(np.min(per_x, axis=0)))


def classical_code_best() -> float:
    """Max over deterministic 2-bit to 1-bit codes and per-bit decoders of the
    worse bit's average success."""
    inputs = list(product((0, 1), repeat=2))
    best = 0.0
    for code in product((0, 1), repeat=4):
        worst = 1.0
        for bit in (0, 1):
            dec_best = max(
                np.mean([dec[code[j]] == x[bit] for j, x in enumerate(inputs)])
                for dec in product((0, 1), repeat=2)
            )
            worst = min(worst, dec_best)
        best = max(best, worst)
    return float(best)


@dataclass
class RandomAccessReport:
    lambdas: np.ndarray
    epsilons: np.ndarray
    square_sum: float
    entropy_sum: float
    information: float
    m: int

    @property
    def chain(self) -> tuple:
        return (self.square_sum, self.entropy_sum, self.information, float(self.m))

    @property
    def passed(self) -> bool:
        c = self.chain
        return all(c[j] <= c[j + 1] + 1e-9 for j in range(3))

    def to_json(self) -> dict:
        return {"lambda": self.lambdas.tolist(), "epsilon": self.epsilons.tolist(), "square_sum": self.square_sum,
                "entropy_sum": self.entropy_sum, "information": self.information, "m": self.m, "pass": self.passed}


def random_access_bound_check(e: EncodingEnsemble, decoders: Sequence[Povm]) -> RandomAccessReport:
    """``sum λ_i ε_i^2 <= sum λ_i (1 - H(1/2 + ε_i)) <= I(X:M) <= m``.

    ``decoders[i]`` has outcomes ``(0, 1, ?)`` (a two-outcome POVM never
    abstains); ``λ_i`` is the probability of not abstaining and ``1/2 + ε_i``
    the success probability given no abstention.
    """
    keys = e.keys
    nbits = len(keys[0])
    if len(decoders) != nbits:
        raise ValueError(f"need {nbits} decoders, got {len(decoders)}")
    if any(sum(e.prior[x] for x in keys if len(x) != nbits) for _ in [0]):
        raise ValueError("inconsistent bit lengths")
    lam, eps = np.zeros(nbits), np.zeros(nbits)
    for i, dec in enumerate(decoders):
        els = [np.asarray(f.matrix) for f in dec.elements]
        if len(els) not in (2, 3) or els[0].shape != (2 ** e.m, 2 ** e.m):
            raise ValueError("decoders need 2 or 3 outcomes on the encoding space")
        answered = right = 0.0
        for x in keys:
            s, w = e.states[x], e.prior[x]
            p0, p1 = (float(np.real(np.vdot(f, s))) for f in els[:2])
            answered += w * (p0 + p1)
            right += w * (p0 if x[i] == 0 else p1)
        lam[i] = answered
        eps[i] = right / answered - 0.5 if answered > 1e-15 else 0.0
    sq = float(np.sum(lam * eps ** 2))
    ent = float(np.sum(lam * (1 - np.array([binary_entropy(0.5 + t) for t in eps]))))
    return RandomAccessReport(lam, eps, sq, ent, e.information(), e.m)


def antv_decoders() -> list:
    code = antv_code()
    return [Povm.from_basis(b) for b in code.bases]


def random_encoding(rng: np.random.Generator, nbits: int = 2, m: int = 2) -> EncodingEnsemble:
    keys = list(product((0, 1), repeat=nbits))
    states = {x: random_density(2 ** m, rng) for x in keys}
    return EncodingEnsemble(states, {x: 1 / len(keys) for x in keys}, m)


def random_decoder(rng: np.random.Generator, dim: int, abstain: bool = True) -> Povm:
    """Three-outcome POVM from a random unitary on ``dim * 3`` restricted to ``dim``
    (two outcomes without ``abstain``)."""
    k = 3 if abstain else 2
    u = random_unitary(dim * k, rng)[:, :dim]  # isometry C^dim -> C^(dim k)
    blocks = u.reshape(k, dim, dim)
    return Povm([hermitian_part(b.conj().T @ b) for b in blocks])


# masquerade ---------------------------------------------------------------------------

@dataclass
class MasqueradeRow:
    i: int
    k_relentropy: float
    alpha: float
    pr_not_abstain: float
    correctness: float
    epsilon: float
    distance: float
    alignment_error: float
    certified: bool

    @property
    def correctness_bound(self) -> float:
        return 0.5 + self.epsilon - self.distance / 2

    @property
    def passed(self) -> bool:
        return (abs(self.pr_not_abstain - self.alpha) <= 1e-9
                and self.correctness >= self.correctness_bound - 1e-6
                and self.alignment_error <= 1e-8)

    def to_json(self) -> dict:
        return {"i": self.i, "k": self.k_relentropy, "alpha": self.alpha, "pr_not_abstain": self.pr_not_abstain,
                "correctness": self.correctness, "correctness_bound": self.correctness_bound,
                "epsilon": self.epsilon, "distance": self.distance, "alignment_error": self.alignment_error,
                "certified": self.certified, "pass": self.passed}


def _correctness(state: np.ndarray, n: int, i: int) -> float:
    """``Pr[ANS = x_i]`` when Alice measures ``X`` and Bob measures ``ANS``."""
    t = np.abs(state.reshape(2 ** n, -1, 2)) ** 2
    table = _bits(np.arange(2 ** n), n)[:, i]
    return float(np.sum(t[np.arange(2 ** n), :, table]))


def masquerade_check(n: int = 2, r: float = 4.0, params: LiftingParams | None = None) -> list:
    """Bob with a superposed index imitates the run on index ``i``.

    ``psi_i`` is the final state with ``X`` superposed and ``Y = i``; ``phi``
    the one with ``Y`` superposed too. Alice's side ``XA`` of ``psi_i`` is a
    substate of hers in ``phi``: the substate pipeline on
    ``(rho_i, rho, r)`` yields ``zeta`` purifying ``rho``, Bob rotates ``phi``
    into ``zeta`` with a unitary on his side plus one flag qubit, and reads
    the flag. Flag 1 happens with probability ``alpha``; the state left then
    is close to ``psi_i`` and answers ``x_i`` correctly with probability at
    least ``1/2 + ε_i - |psi_i - psi_i'|_1 / 2``.
    """
    _check_n(n, 4)
    dim_x = 2 ** n
    x_amps = np.full(dim_x, dim_x ** -0.5)
    full = run_index_protocol(initial_state(n, x_amps=x_amps, y_amps=np.full(n, n ** -0.5))).vector
    rho = hermitian_part(partial_trace_ket(full, (dim_x, full.size // dim_x), [0]))
    rows = []
    for i in range(n):
        y_amps = np.zeros(n)
        y_amps[i] = 1.0
        psi_i = run_index_protocol(initial_state(n, x_amps=x_amps, y_amps=y_amps)).vector
        dk = psi_i.size // dim_x
        rho_i = hermitian_part(partial_trace_ket(psi_i, (dim_x, dk), [0]))
        eps = _correctness(psi_i, n, i) - 0.5
        res = quantum_substate(rho_i, rho, r, params, psi=psi_i)
        # Bob's unitary on K ⊗ flag taking phi ⊗ |0> to zeta
        src = np.kron(full, np.array([1.0, 0.0]))
        xs, xz = ket_to_matrix(src, dim_x), ket_to_matrix(res.zeta, dim_x)
        w = aligning_unitary(xs, xz)
        zeta = (xs @ w).reshape(-1)
        align_err = float(np.max(np.abs(zeta - res.zeta)))
        branches = zeta.reshape(-1, 2)
        pr_flag = float(np.sum(np.abs(branches[:, 1]) ** 2))
        kept = branches[:, 1] / math.sqrt(pr_flag)
        corr = _correctness(kept, n, i)
        dist = trace_distance(np.outer(psi_i, psi_i.conj()), np.outer(kept, kept.conj()))
        rows.append(MasqueradeRow(i + 1, relative_entropy(rho_i, rho), res.alpha, pr_flag, corr, eps, dist,
                                  align_err, bool(res.report["lifting_certified"])))
    return rows
