import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from substatelab.divergence import (
    binary_entropy,
    encoding_information,
    fidelity,
    fuchs_caves_measurement,
    mutual_information,
    obs_divergence_classical,
    obs_divergence_quantum,
    optimal_distinguishing_measurement,
    relative_entropy,
    relative_entropy_classical,
    total_variation,
    trace_distance,
    von_neumann_entropy,
)
from substatelab.qstate import SubsystemLayout, apply_povm, random_density, random_distribution, random_pure

KET0 = np.array([1.0, 0.0])
KET1 = np.array([0.0, 1.0])
PLUS = np.array([1.0, 1.0]) / math.sqrt(2)


def brute_force_d(p, q):
    """Max over subsets of P(S) log2(P(S)/Q(S)), by plain enumeration."""
    n = len(p)
    best, arg = 0.0, ()
    for size in range(1, n + 1):
        for s in combinations(range(n), size):
            ps, qs = sum(p[i] for i in s), sum(q[i] for i in s)
            if ps == 0:
                continue
            if qs == 0:
                return math.inf, s
            val = ps * math.log2(ps / qs)
            if val > best:
                best, arg = val, s
    return best, arg


distributions = st.integers(2, 7).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 2 ** 31)))


def test_trace_distance_examples():
    rho = random_density(3, np.random.default_rng(0))
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert trace_distance(KET0, KET1) == pytest.approx(2.0)
    assert trace_distance(KET0, PLUS) == pytest.approx(math.sqrt(2))


def test_distinguishing_measurement():
    m = optimal_distinguishing_measurement(KET0, KET1)
    assert total_variation(apply_povm(m, KET0), apply_povm(m, KET1)) == pytest.approx(2.0)
    rng = np.random.default_rng(1)
    for _ in range(10):
        a, b = random_density(3, rng), random_density(3, rng)
        m = optimal_distinguishing_measurement(a, b)
        assert total_variation(apply_povm(m, a), apply_povm(m, b)) == pytest.approx(trace_distance(a, b), abs=1e-9)


def test_fidelity_examples():
    rho = random_density(2, np.random.default_rng(2))
    assert fidelity(rho, rho) == pytest.approx(1.0)
    assert fidelity(KET0, KET1) == pytest.approx(0.0, abs=1e-12)
    assert fidelity(KET0, PLUS) == pytest.approx(1 / math.sqrt(2))


def test_fuchs_caves_examples():
    p, q = np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.1, 0.3])
    m = fuchs_caves_measurement(np.diag(p), np.diag(q))
    coeff = np.sum(np.sqrt(apply_povm(m, np.diag(p)) * apply_povm(m, np.diag(q))))
    assert coeff == pytest.approx(np.sum(np.sqrt(p * q)))
    rng = np.random.default_rng(3)
    for _ in range(10):
        a, b = random_density(2, rng), random_density(2, rng)
        m = fuchs_caves_measurement(a, b)
        coeff = np.sum(np.sqrt(apply_povm(m, a) * apply_povm(m, b)))
        assert coeff == pytest.approx(fidelity(a, b), abs=1e-6)
        for _ in range(50):
            u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
            pa = np.real(np.einsum("ij,jk,ki->i", u.conj().T, a, u))
            pb = np.real(np.einsum("ij,jk,ki->i", u.conj().T, b, u))
            assert coeff <= np.sum(np.sqrt(np.clip(pa * pb, 0, None))) + 1e-9


def test_entropy_examples():
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)
    assert von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(0.811278, abs=1e-6)
    assert binary_entropy(0.25) == pytest.approx(0.811278, abs=1e-6)


def test_relative_entropy_examples():
    rho = random_density(3, np.random.default_rng(4))
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-9)
    assert relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) == pytest.approx(1.0)
    assert relative_entropy(KET0, KET1) == math.inf


def test_mutual_information_examples():
    rng = np.random.default_rng(5)
    prod = np.kron(random_density(2, rng), random_density(2, rng))
    layout = SubsystemLayout((2, 2))
    assert mutual_information(prod, layout) == pytest.approx(0.0, abs=1e-9)
    bell = np.array([1.0, 0, 0, 1.0]) / math.sqrt(2)
    assert mutual_information(np.outer(bell, bell), layout) == pytest.approx(2.0)
    assert mutual_information(np.diag([0.5, 0, 0, 0.5]), layout) == pytest.approx(1.0)


def test_encoding_information_matches_joint_state():
    rng = np.random.default_rng(6)
    states = [random_density(2, rng) for _ in range(3)]
    prior = np.array([0.2, 0.3, 0.5])
    joint = sum(w * np.kron(np.diag(np.eye(3)[i]), s) for i, (w, s) in enumerate(zip(prior, states)))
    assert encoding_information(prior, states) == pytest.approx(
        mutual_information(joint, SubsystemLayout((3, 2))), abs=1e-9)


def test_classical_d_examples():
    p = np.array([0.3, 0.7])
    assert obs_divergence_classical(p, p).value == pytest.approx(0.0, abs=1e-12)
    res = obs_divergence_classical([1.0, 0.0], [0.5, 0.5])
    assert res.value == pytest.approx(1.0)
    assert tuple(res.witness) == (0,)
    assert obs_divergence_classical([0.5, 0.5], [1.0, 0.0]).value == math.inf


@given(distributions)
@settings(max_examples=60, deadline=None)
def test_classical_d_matches_brute_force(case):
    n, seed = case
    rng = np.random.default_rng(seed)
    p, q = random_distribution(n, rng), random_distribution(n, rng)
    res = obs_divergence_classical(p, q)
    want, _ = brute_force_d(p, q)
    assert res.value == pytest.approx(want, abs=1e-9)
    s = list(res.witness)
    if s:
        assert p[s].sum() * math.log2(p[s].sum() / q[s].sum()) == pytest.approx(res.value, abs=1e-9)


def test_classical_d_log_domain_input():
    rng = np.random.default_rng(7)
    p, q = random_distribution(5, rng), random_distribution(5, rng)
    assert obs_divergence_classical(p, log2_q=np.log2(q)).value == pytest.approx(
        obs_divergence_classical(p, q).value, abs=1e-12)


@given(st.integers(2, 8), st.integers(0, 2 ** 31))
@settings(max_examples=40, deadline=None)
def test_quantum_d_on_diagonal_pairs(n, seed):
    rng = np.random.default_rng(seed)
    p, q = random_distribution(n, rng), random_distribution(n, rng)
    assert obs_divergence_quantum(np.diag(p), np.diag(q)).value == pytest.approx(brute_force_d(p, q)[0], abs=1e-9)


@given(st.integers(2, 4), st.integers(0, 2 ** 31))
@settings(max_examples=40, deadline=None)
def test_quantum_d_relations(dim, seed):
    rng = np.random.default_rng(seed)
    a, b = random_density(dim, rng), random_density(dim, rng)
    res = obs_divergence_quantum(a, b)
    assert 0.0 <= res.value <= relative_entropy(a, b) + 1 + 1e-9
    # the witness projector attains the value
    f = res.witness
    pa, pb = float(np.real(np.trace(f @ a))), float(np.real(np.trace(f @ b)))
    assert pa * math.log2(pa / pb) == pytest.approx(res.value, abs=1e-9)


def test_quantum_d_examples():
    rho = random_density(3, np.random.default_rng(8))
    assert obs_divergence_quantum(rho, rho).value == pytest.approx(0.0, abs=1e-9)
    assert obs_divergence_quantum(KET0, KET1).value == math.inf


def test_quantum_d_rank_deficient_pair():
    # rho lies inside the support of a rank-two sigma on a qutrit
    rng = np.random.default_rng(9)
    u = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    sigma = u @ np.diag([0.5, 0.5, 0.0]) @ u.conj().T
    rho = u @ np.diag([1.0, 0.0, 0.0]) @ u.conj().T
    assert obs_divergence_quantum(rho, sigma).value == pytest.approx(1.0, abs=1e-9)


@given(st.integers(2, 6), st.integers(0, 2 ** 31))
@settings(max_examples=60, deadline=None)
def test_pinsker(n, seed):
    rng = np.random.default_rng(seed)
    p, q = random_distribution(n, rng), random_distribution(n, rng)
    assert total_variation(p, q) <= math.sqrt(2 * math.log(2) * relative_entropy_classical(p, q)) + 1e-12


def test_pure_first_argument_d():
    rng = np.random.default_rng(10)
    psi, sigma = random_pure(3, rng), random_density(3, rng)
    res = obs_divergence_quantum(np.outer(psi, psi.conj()), sigma)
    assert math.isfinite(res.value) and res.value >= 0
