import math
from itertools import product

import numpy as np
import pytest

from substatelab import privacy as pv
from substatelab.divergence import entropy_of_spectrum


def bob_average_state(n):
    """Average over x of Bob's final state on Y ⊗ ANS, n^-1/2 sum_y |y>|x_y>."""
    rho = np.zeros((2 * n, 2 * n))
    for x in product((0, 1), repeat=n):
        v = np.zeros(2 * n)
        for y, b in enumerate(x):
            v[2 * y + b] = n ** -0.5
        rho += np.outer(v, v) / 2 ** n
    return rho


def test_index_protocol_examples():
    assert pv.simulate_index_protocol(4, "1010", 1)[1] == 1
    assert pv.simulate_index_protocol(4, "1010", 2)[1] == 0
    st, _ = pv.simulate_index_protocol(4, "1010", 3)
    assert st.message_clean() == pytest.approx(1.0)


def test_index_protocol_exhaustive_n8():
    for x in product((0, 1), repeat=8):
        for i in range(1, 9):
            assert pv.simulate_index_protocol(8, x, i)[1] == x[i - 1]


def test_index_protocol_rejects_bad_input():
    with pytest.raises(IndexError):
        pv.simulate_index_protocol(4, "1010", 5)
    with pytest.raises(ValueError):
        pv.simulate_index_protocol(3, "101", 1)
    with pytest.raises(ValueError):
        pv.parse_bits("10a1")


def test_success_probability_is_one():
    assert pv.success_probability(4) == pytest.approx(1.0)


def test_walsh_hadamard_matches_kron():
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    full = np.kron(np.kron(h, h), h)
    v = np.random.default_rng(0).normal(size=(8, 3))
    assert np.allclose(pv.walsh_hadamard(v, 3), full @ v)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_hadamard_attack_information(n):
    res = pv.hadamard_attack(n)
    assert res.information == pytest.approx(math.log2(n) / 2, abs=1e-9)
    # only the queried position can show a one, with probability 1/2
    assert np.allclose(res.position_one_probability, np.eye(n) / 2, atol=1e-12)


def test_privacy_loss_trivial_protocols():
    assert pv.superpositional_privacy_loss("send_nothing", 4) == pytest.approx(0.0, abs=1e-9)
    assert pv.superpositional_privacy_loss("send_all", 4) == pytest.approx(4.0, abs=1e-9)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_index_privacy_loss_oracle(n):
    want = entropy_of_spectrum(np.linalg.eigvalsh(bob_average_state(n)))
    got = pv.superpositional_privacy_loss("index", n)
    assert got == pytest.approx(want, abs=1e-9)
    assert 0 < got <= n
    assert pv.index_privacy_loss_formula(n) == pytest.approx(want, abs=1e-9)


def test_privacy_loss_routes_agree():
    for protocol in pv.PROTOCOLS:
        assert pv.superpositional_privacy_loss(protocol, 2, "density") == pytest.approx(
            pv.superpositional_privacy_loss(protocol, 2, "gram"), abs=1e-9)


def test_antv_code():
    code = pv.antv_code()
    target = math.cos(math.pi / 8) ** 2
    assert code.success[0] == pytest.approx(target, abs=1e-12)
    assert code.success[1] == pytest.approx(target, abs=1e-12)
    assert pv.antv_angle_oracle() == pytest.approx(target, abs=1e-3)
    assert pv.classical_code_best() == 0.75 < target


def test_random_access_chain_on_antv():
    rep = pv.random_access_bound_check(pv.antv_code().ensemble, pv.antv_decoders())
    assert rep.passed
    assert np.allclose(rep.lambdas, 1.0)
    assert rep.m == 1


def test_random_access_trivial_encoding():
    state = np.eye(2) / 2
    keys = list(product((0, 1), repeat=2))
    ens = pv.EncodingEnsemble({x: state for x in keys}, {x: 0.25 for x in keys}, 1)
    rep = pv.random_access_bound_check(ens, pv.antv_decoders())
    assert rep.information == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(rep.epsilons, 0.0, atol=1e-9)


def test_random_access_chain_sweep():
    rng = np.random.default_rng(1)
    for trial in range(100):
        ens = pv.random_encoding(rng)
        decs = [pv.random_decoder(rng, 4, abstain=bool(trial % 2)) for _ in range(2)]
        assert pv.random_access_bound_check(ens, decs).passed
