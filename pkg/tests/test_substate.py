import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from substatelab.divergence import obs_divergence_classical, obs_divergence_quantum, relative_entropy
from substatelab.qstate import (
    canonical_purification,
    partial_trace_ket,
    random_density,
    random_distribution,
    random_povm_element,
    random_pure,
)
from substatelab.substate import (
    LiftingParams,
    SubstateError,
    best_response,
    classical_substate,
    divergence_lifting,
    lifted_kprime,
    lifting_bound,
    lifting_step,
    pure_substate,
    quantum_substate,
    saddle_extension,
    substate_alpha,
    substate_check,
)

PLUS = np.array([1.0, 1.0]) / math.sqrt(2)
SKEW = np.diag([0.75, 0.25])


def test_alpha_and_bound_formulas():
    assert substate_alpha(2, 1) == pytest.approx(1 / 8)
    assert lifting_bound(0.0) == pytest.approx(8.0)
    beta = 4.0
    assert lifted_kprime(0.0, beta) == pytest.approx(2.0)  # -2 log2(1 - 1/2)


def test_classical_examples():
    p = np.array([0.2, 0.3, 0.5])
    w = classical_substate(p, p, 4, 0.0)
    assert np.allclose(w.rho_prime, p) and w.achieved_distance == pytest.approx(0.0)
    w = classical_substate([1.0, 0.0], [0.5, 0.5], 2, 1.0)
    assert np.allclose(w.rho_prime, [1.0, 0.0])
    assert w.alpha == pytest.approx(1 / 8)
    assert np.all(w.alpha * w.rho_prime <= np.array([0.5, 0.5]))
    with pytest.raises(SubstateError):
        classical_substate([0.5, 0.5], [1.0, 0.0], 2, 1.0)


@given(st.integers(2, 8), st.sampled_from([1.5, 2.0, 4.0, 10.0]), st.integers(0, 2 ** 31))
@settings(max_examples=60, deadline=None)
def test_classical_witness_properties(n, r, seed):
    rng = np.random.default_rng(seed)
    p, q = random_distribution(n, rng), random_distribution(n, rng)
    k = obs_divergence_classical(p, q).value
    w = classical_substate(p, q, r, k)
    assert w.achieved_distance <= 2 / r + 1e-12
    assert np.all(w.alpha * w.rho_prime <= q + 1e-12)
    assert np.allclose(w.alpha * w.rho_prime + (1 - w.alpha) * w.rho_doubleprime, q, atol=1e-9)


def test_classical_relative_entropy_mode():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p, q = random_distribution(5, rng), random_distribution(5, rng)
        s = relative_entropy(np.diag(p), np.diag(q))
        w = classical_substate(p, q, 4, s, mode="relative_entropy")
        assert w.achieved_distance <= 0.5 + 1e-12
        assert np.all(w.alpha * w.rho_prime <= q + 1e-12)


def test_substate_check_examples():
    rho = random_density(3, np.random.default_rng(1))
    assert substate_check(rho, rho, 0.7).passed
    ket0 = np.diag([1.0, 0.0])
    assert substate_check(ket0, np.eye(2) / 2, 0.5).passed
    res = substate_check(ket0, np.eye(2) / 2, 0.6)
    assert not res.passed and res.min_eigenvalue == pytest.approx(-0.1)


def test_pure_examples():
    out = pure_substate(PLUS, np.outer(PLUS, PLUS), 4, 0.0)
    assert abs(np.vdot(out.phi, PLUS)) == pytest.approx(1.0)
    k = obs_divergence_quantum(np.outer(PLUS, PLUS), SKEW).value
    out = pure_substate(PLUS, SKEW, 4, k)
    assert substate_check(np.outer(out.phi, out.phi.conj()), SKEW, out.alpha).passed
    assert abs(np.vdot(out.phi, PLUS)) ** 2 > 1 - 1 / 4


@given(st.integers(2, 5), st.sampled_from([2.0, 4.0, 10.0]), st.integers(0, 2 ** 31))
@settings(max_examples=60, deadline=None)
def test_pure_postconditions(dim, r, seed):
    rng = np.random.default_rng(seed)
    psi, sigma = random_pure(dim, rng), random_density(dim, rng)
    k = obs_divergence_quantum(np.outer(psi, psi.conj()), sigma).value
    out = pure_substate(psi, sigma, r, k)
    assert np.linalg.norm(out.phi) == pytest.approx(1.0)
    me = np.linalg.eigvalsh(sigma - out.alpha * np.outer(out.phi, out.phi.conj()))[0]
    assert me >= -1e-9
    assert abs(np.vdot(out.phi, psi)) ** 2 > 1 - 1 / r - 1e-9


def test_lifting_step_special_cases():
    rng = np.random.default_rng(2)
    rho = random_density(2, rng)
    psi = canonical_purification(rho).amplitudes
    f = random_povm_element(4, rng)
    step = lifting_step(psi, rho, f, 4.0, d=0.0)
    assert step.k_prime == pytest.approx(2.0)
    assert step.holds
    step = lifting_step(psi, random_density(2, rng), np.eye(4), 4.0)
    assert step.p == pytest.approx(1.0)
    assert step.q >= 2.0 ** -step.k_prime - 1e-9


def test_lifting_step_sweep():
    rng = np.random.default_rng(3)
    for _ in range(200):
        rho, sigma = random_density(2, rng), random_density(2, rng)
        psi = canonical_purification(rho).amplitudes
        step = lifting_step(psi, sigma, random_povm_element(4, rng), 4.0)
        assert step.holds
        assert np.allclose(partial_trace_ket(step.phi, (2, 2), [0]), sigma, atol=1e-9)


def test_best_response_certificate_is_a_lower_bound():
    rng = np.random.default_rng(4)
    psi = random_pure(4, rng)
    omega = random_density(4, rng)
    br = best_response(omega, psi, 0.5)
    assert np.real(np.vdot(psi, br.f @ psi)) >= 0.5 - 1e-6
    assert br.certified <= br.value + 1e-9
    ev = np.linalg.eigvalsh(br.f)
    assert ev.min() >= -1e-9 and ev.max() <= 1 + 1e-9


def test_saddle_extension_cases():
    rng = np.random.default_rng(5)
    psi = random_pure(4, rng)
    own = partial_trace_ket(psi, (2, 2), [0])
    res = saddle_extension(psi, own, 0.5, 4.0)
    assert res.certified and res.certified_value >= 0.5 - 1e-6
    sigma = random_density(2, rng)
    res = saddle_extension(psi, sigma, 0.5, 4.0)
    assert res.certified_value >= res.target - 1e-3
    res = saddle_extension(psi, sigma, 1.0, 4.0)
    assert res.certified_value >= res.target - 1e-3


def test_divergence_lifting_cases():
    rng = np.random.default_rng(6)
    psi = random_pure(4, rng)
    own = partial_trace_ket(psi, (2, 2), [0])
    res = divergence_lifting(psi, own)
    assert res.measured_divergence <= res.bound
    sigma = random_density(2, rng)
    res = divergence_lifting(psi, sigma)
    assert res.extension_error <= 1e-6
    assert res.measured_divergence <= res.bound + 0.1
    assert abs(res.weights.sum() - 1) < 1e-12
    one = divergence_lifting(psi, sigma, LiftingParams(gamma=1.0, l=1))
    sad = saddle_extension(psi, sigma, 1.0, one.params.beta, one.params, one.d_rho_sigma)
    assert np.allclose(one.omega, sad.omega, atol=1e-12)


def test_quantum_substate_equal_states():
    rho = random_density(2, np.random.default_rng(7))
    out = quantum_substate(rho, rho, 4)
    assert abs(np.vdot(out.phi, out.psi)) == pytest.approx(1.0, abs=1e-6)
    assert out.report["reduction_error"] <= 1e-6


def test_quantum_substate_qubit_pair():
    out = quantum_substate(np.outer(PLUS, PLUS), SKEW, 4)
    rep = out.report
    assert rep["reduction_error"] <= 1e-6
    assert rep["trace_distance_psi_phi"] <= 1 + 1e-9
    assert rep["substate_min_eig"] >= -1e-9
    assert out.alpha >= out.alpha_theory
    assert np.linalg.norm(out.zeta) == pytest.approx(1.0)


def test_quantum_substate_larger_k():
    rng = np.random.default_rng(8)
    rho, sigma = random_density(2, rng), random_density(2, rng)
    # purification on a 3-dim K exercises the support compression
    x = canonical_purification(rho).amplitudes.reshape(2, 2)
    iso = np.linalg.qr(rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)))[0]
    psi = (x @ iso.T).reshape(-1)
    out = quantum_substate(rho, sigma, 4, psi=psi)
    assert out.report["dim_k"] == 3
    assert out.report["reduction_error"] <= 1e-6
    assert out.zeta.shape == (2 * 3 * 2,)


def test_quantum_substate_disjoint_supports():
    with pytest.raises(SubstateError):
        quantum_substate(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), 4)
    with pytest.raises(ValueError):
        quantum_substate(SKEW, SKEW, 1.0)
