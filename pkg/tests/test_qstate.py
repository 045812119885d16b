import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from substatelab.qstate import (
    DensityMatrix,
    DimensionError,
    InvalidStateError,
    LayoutError,
    Povm,
    PureState,
    SubsystemLayout,
    aligning_unitary,
    apply_povm,
    canonical_purification,
    ket_to_matrix,
    partial_trace,
    partial_trace_ket,
    partial_trace_matrix,
    random_density,
    random_pure,
    state_from_json,
    tensor,
    uhlmann_closest_purification,
    validate_density,
)

KET0 = np.array([1.0, 0.0])
KET1 = np.array([0.0, 1.0])
PLUS = np.array([1.0, 1.0]) / math.sqrt(2)
BELL = np.array([1.0, 0, 0, 1.0]) / math.sqrt(2)


def test_validate_density_examples():
    assert validate_density(np.eye(2) / 2).passed
    rep = validate_density(np.diag([1, 1e-3]))
    assert not rep.passed
    assert dict(rep.violations)["trace"] == pytest.approx(1e-3)
    rep = validate_density(np.array([[0.5, 0.6], [0.6, 0.5]]))
    assert dict(rep.violations)["negative_eigenvalue"] == pytest.approx(-0.1)


def test_invalid_constructions():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.6], [0.6, 0.5]]))
    with pytest.raises(LayoutError):
        SubsystemLayout((2, 0))
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]))


def test_tensor_examples():
    v = tensor(PureState(KET0), PureState(KET1))
    assert np.allclose(v.amplitudes, [0, 1, 0, 0])
    m = tensor(DensityMatrix(np.eye(2) / 2), DensityMatrix(np.eye(2) / 2))
    assert np.allclose(m.matrix, np.eye(4) / 4)
    pp = tensor(PureState(PLUS), PureState(PLUS))
    assert np.allclose(pp.amplitudes, 0.5)
    assert pp.layout.factors == (2, 2)


def test_partial_trace_examples():
    rng = np.random.default_rng(1)
    a, b = random_density(2, rng), random_density(3, rng)
    assert np.allclose(partial_trace_matrix(np.kron(a, b), (2, 3), [0]), a)
    assert np.allclose(partial_trace_matrix(np.kron(a, b), (2, 3), [1]), b)
    assert np.allclose(partial_trace_ket(BELL, (2, 2), [0]), np.eye(2) / 2)
    out = partial_trace(DensityMatrix(b, SubsystemLayout((3, 1))), keep=[0])
    assert np.allclose(out.matrix, b)


def test_partial_trace_ket_matches_matrix_route():
    rng = np.random.default_rng(2)
    for dims in [(2, 3), (3, 2), (2, 2, 2)]:
        v = random_pure(int(np.prod(dims)), rng)
        for keep in ([0], [len(dims) - 1], [0, len(dims) - 1]):
            assert np.allclose(partial_trace_ket(v, dims, keep),
                               partial_trace_matrix(np.outer(v, v.conj()), dims, keep))


def test_canonical_purification_examples():
    out = canonical_purification(np.diag([1.0, 0.0]))
    assert np.allclose(out.amplitudes, [1, 0, 0, 0])
    out = canonical_purification(np.eye(2) / 2)
    assert np.allclose(partial_trace_ket(out.amplitudes, (2, 2), [0]), np.eye(2) / 2)
    assert np.allclose(np.abs(ket_to_matrix(out.amplitudes, 2)), np.eye(2) / math.sqrt(2))
    out = canonical_purification(np.diag([0.75, 0.25]))
    assert np.allclose(out.amplitudes, [math.sqrt(0.75), 0, 0, 0.5])


@given(st.integers(2, 5), st.integers(0, 2 ** 31))
@settings(max_examples=30, deadline=None)
def test_purification_reduces_back(dim, seed):
    rho = random_density(dim, np.random.default_rng(seed))
    v = canonical_purification(rho).amplitudes
    assert np.allclose(partial_trace_ket(v, (dim, dim), [0]), rho, atol=1e-10)


def test_povm_examples():
    comp = Povm.from_basis(np.eye(2))
    assert np.allclose(apply_povm(comp, np.diag([1.0, 0.0])), [1, 0])
    assert np.allclose(apply_povm(comp, np.eye(2) / 2), [0.5, 0.5])
    had = Povm.from_basis(np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    assert np.allclose(apply_povm(had, np.diag([1.0, 0.0])), [0.5, 0.5])
    with pytest.raises(InvalidStateError):
        Povm((np.eye(2), np.eye(2)))
    with pytest.raises(DimensionError):
        apply_povm(comp, np.eye(3) / 3)


def test_uhlmann_examples():
    theta = PureState(BELL, SubsystemLayout((2, 2)))
    same = uhlmann_closest_purification(np.eye(2) / 2, theta)
    assert abs(np.vdot(same.amplitudes, BELL)) == pytest.approx(1.0)
    zero = uhlmann_closest_purification(np.diag([1.0, 0.0]), theta)
    assert abs(np.vdot(zero.amplitudes, BELL)) == pytest.approx(1 / math.sqrt(2))
    assert np.allclose(ket_to_matrix(zero.amplitudes, 2)[1], 0)
    orth = uhlmann_closest_purification(np.diag([0.0, 1.0]), PureState(np.kron(KET0, KET0)))
    assert abs(np.vdot(orth.amplitudes, np.kron(KET0, KET0))) == pytest.approx(0.0)


def test_uhlmann_overlap_is_fidelity():
    from substatelab.divergence import fidelity

    rng = np.random.default_rng(3)
    for _ in range(20):
        sigma = random_density(3, rng)
        theta = random_pure(9, rng)
        phi = uhlmann_closest_purification(sigma, theta).amplitudes
        assert np.allclose(partial_trace_ket(phi, (3, 3), [0]), sigma, atol=1e-10)
        red = partial_trace_ket(theta, (3, 3), [0])
        assert abs(np.vdot(phi, theta)) == pytest.approx(fidelity(sigma, red), abs=1e-9)


def test_aligning_unitary_maps_purifications():
    rng = np.random.default_rng(4)
    rho = random_density(3, rng)
    x = ket_to_matrix(canonical_purification(rho).amplitudes, 3)
    u = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    y = x @ u
    assert np.allclose(x @ aligning_unitary(x, y), y)


def test_json_round_trip():
    rng = np.random.default_rng(5)
    rho = DensityMatrix(random_density(3, rng))
    back = state_from_json(json.loads(json.dumps(rho.to_json())))
    assert np.allclose(back.matrix, rho.matrix)
    psi = PureState(random_pure(4, rng), SubsystemLayout((2, 2)))
    back = state_from_json(json.loads(json.dumps(psi.to_json())))
    assert np.allclose(back.amplitudes, psi.amplitudes)
