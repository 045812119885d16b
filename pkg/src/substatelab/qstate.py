"""Density matrices, pure states and the linear algebra shared by every module.

Conventions used across the package:

* kets are 1-d complex arrays, operators are dense 2-d complex arrays;
* tensor products follow ``np.kron`` ordering, so a vector on
  ``H ⊗ K`` reshapes row-major into a ``dim(H) x dim(K)`` matrix;
* eigen-decompositions are returned with eigenvalues in descending order and
  each eigenvector's largest-magnitude component made real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

TOL_HERM = 1e-10
TOL_EIG = 1e-10
TOL_TRACE = 1e-10
TOL_NORM = 1e-12
TOL_POVM_SUM = 1e-9
CLAMP_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


class LayoutError(ValueError):
    """Raised for an inconsistent subsystem layout or subsystem index."""


class InvalidStateError(ValueError):
    """Raised when an array does not satisfy the invariants of its type."""


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered tensor factorisation ``d1 x d2 x ...`` of a Hilbert space."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(d) for d in self.factors)
        if not factors or any(d < 1 for d in factors):
            raise LayoutError(f"factor dimensions must be positive, got {self.factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factors))

    def __len__(self):
        return len(self.factors)

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        return SubsystemLayout(self.factors + other.factors)

    def to_json(self) -> dict:
        return {"factors": list(self.factors)}

    @classmethod
    def from_json(cls, data: dict) -> "SubsystemLayout":
        return cls(tuple(data["factors"]))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[tuple[str, float], ...] = ()

    def __bool__(self):
        return self.passed


def validate_density(a, tol: float = TOL_HERM) -> ValidationReport:
    """Check the density-matrix invariants of a square matrix.

    Each violated invariant is listed with the measured magnitude:
    ``hermiticity`` (max entrywise ``|A - A^†|``), ``negative_eigenvalue``
    (the minimum eigenvalue itself) and ``trace`` (``|Tr A - 1|``).
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    violations = []
    herm = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if herm > tol:
        violations.append(("hermiticity", herm))
    min_eig = float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])
    if min_eig < -tol:
        violations.append(("negative_eigenvalue", min_eig))
    tr_err = abs(complex(np.trace(a)) - 1.0)
    if tr_err > tol:
        violations.append(("trace", tr_err))
    return ValidationReport(not violations, tuple(violations))


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    layout: SubsystemLayout | None = None

    def __post_init__(self):
        m = _freeze(self.matrix)
        object.__setattr__(self, "matrix", m)
        report = validate_density(m)
        if not report:
            raise InvalidStateError(f"not a density matrix: {report.violations}")
        if self.layout is not None and self.layout.dim != m.shape[0]:
            raise LayoutError(f"layout {self.layout.factors} does not match dim {m.shape[0]}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> dict:
        out = matrix_to_json(self.matrix)
        if self.layout is not None:
            out["layout"] = self.layout.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "DensityMatrix":
        layout = SubsystemLayout.from_json(data["layout"]) if "layout" in data else None
        return cls(matrix_from_json(data), layout)


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    layout: SubsystemLayout | None = None

    def __post_init__(self):
        v = _freeze(np.ravel(self.amplitudes))
        object.__setattr__(self, "amplitudes", v)
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > TOL_NORM:
            raise InvalidStateError(f"state norm {norm!r} differs from 1")
        if self.layout is not None and self.layout.dim != v.shape[0]:
            raise LayoutError(f"layout {self.layout.factors} does not match dim {v.shape[0]}")

    @classmethod
    def normalized(cls, v, layout=None) -> "PureState":
        v = np.asarray(v, dtype=complex).ravel()
        return cls(v / np.linalg.norm(v), layout)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.layout)

    def to_json(self) -> dict:
        out = vector_to_json(self.amplitudes)
        if self.layout is not None:
            out["layout"] = self.layout.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PureState":
        layout = SubsystemLayout.from_json(data["layout"]) if "layout" in data else None
        return cls(vector_from_json(data), layout)


@dataclass(frozen=True)
class PovmElement:
    matrix: np.ndarray

    def __post_init__(self):
        m = _freeze(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > TOL_HERM:
            raise InvalidStateError("POVM element is not Hermitian")
        w = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if w[0] < -TOL_EIG or w[-1] > 1 + TOL_EIG:
            raise InvalidStateError(f"POVM element eigenvalues {w[0]:.3g}..{w[-1]:.3g} outside [0, 1]")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Povm:
    elements: tuple[PovmElement, ...] = field(default_factory=tuple)

    def __post_init__(self):
        elems = tuple(e if isinstance(e, PovmElement) else PovmElement(e) for e in self.elements)
        if not elems:
            raise ValueError("a POVM needs at least one element")
        dims = {e.dim for e in elems}
        if len(dims) != 1:
            raise DimensionError(f"POVM elements have mixed dimensions {sorted(dims)}")
        total = sum(e.matrix for e in elems)
        err = float(np.max(np.abs(total - np.eye(elems[0].dim))))
        if err > TOL_POVM_SUM:
            raise InvalidStateError(f"POVM elements sum to identity only within {err:.3g}")
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "Povm":
        """Complete orthogonal measurement in the columns of a unitary."""
        basis = np.asarray(basis, dtype=complex)
        return cls(tuple(np.outer(basis[:, j], basis[:, j].conj()) for j in range(basis.shape[1])))

    @classmethod
    def two_outcome(cls, f) -> "Povm":
        f = as_operator(f)
        return cls((f, np.eye(f.shape[0]) - f))


StateLike = Union[DensityMatrix, PureState, np.ndarray, Sequence]


def as_operator(x) -> np.ndarray:
    """Return the operator behind a state, POVM element or array-like."""
    if isinstance(x, (DensityMatrix, PovmElement)):
        return np.asarray(x.matrix)
    if isinstance(x, PureState):
        v = x.amplitudes
        return np.outer(v, v.conj())
    a = np.asarray(x, dtype=complex)
    if a.ndim == 1:
        return np.outer(a, a.conj())
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def as_ket(x) -> np.ndarray:
    if isinstance(x, PureState):
        return np.asarray(x.amplitudes)
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    return v


def _layout_of(x) -> SubsystemLayout | None:
    return getattr(x, "layout", None)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Ties in magnitude go to the first such entry.
    """
    vecs = np.array(vecs, dtype=complex)
    idx = np.argmax(np.abs(vecs) - 1e-12 * np.arange(vecs.shape[0])[:, None], axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    return vecs / phases


def eigh_desc(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition, eigenvalues descending, phases fixed."""
    w, v = np.linalg.eigh(hermitian_part(np.asarray(a, dtype=complex)))
    order = np.argsort(-w, kind="stable")
    return w[order], fix_phases(v[:, order])


def clamp_eigenvalues(w: np.ndarray, tol: float = CLAMP_TOL) -> np.ndarray:
    """Zero out eigenvalues in ``[-tol, 0)``; anything more negative is an error."""
    if w.size and w.min() < -tol:
        raise InvalidStateError(f"eigenvalue {w.min():.3g} is below the clamping tolerance")
    return np.clip(w, 0.0, None)


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hermitian_part(a))
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def support_projector(a: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Projector onto eigenvectors with eigenvalue above ``rel_tol * max``."""
    w, v = np.linalg.eigh(hermitian_part(a))
    cut = rel_tol * max(float(w[-1]), 0.0)
    keep = w > cut
    vk = v[:, keep]
    return vk @ vk.conj().T


def tensor(a, b):
    """Kronecker product of two pure states or two density matrices."""
    la = _layout_of(a) or SubsystemLayout((_dim(a),))
    lb = _layout_of(b) or SubsystemLayout((_dim(b),))
    layout = la.concat(lb)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), layout)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), layout)
    raise TypeError("tensor() needs two PureState or two DensityMatrix operands")


def _dim(x) -> int:
    return x.dim


def _check_layout(layout: SubsystemLayout, dim: int, keep: Iterable[int]) -> list[int]:
    if layout.dim != dim:
        raise LayoutError(f"layout {layout.factors} has dim {layout.dim}, state has {dim}")
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < len(layout):
            raise LayoutError(f"subsystem index {k} out of range for {len(layout)} factors")
    return keep


def partial_trace_matrix(a: np.ndarray, factors: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace of a dense operator, keeping the listed factors in order."""
    factors = tuple(int(d) for d in factors)
    keep = sorted(set(keep))
    m = len(factors)
    t = np.asarray(a).reshape(factors + factors)
    rows = list(range(m))
    cols = [i if i not in keep else m + i for i in range(m)]
    out = [i for i in keep] + [m + i for i in keep]
    res = np.einsum(t, rows + cols, out)
    d = int(np.prod([factors[i] for i in keep])) if keep else 1
    return res.reshape(d, d)


def partial_trace_ket(v: np.ndarray, factors: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    factors = tuple(int(d) for d in factors)
    keep = sorted(set(keep))
    rest = [i for i in range(len(factors)) if i not in keep]
    t = np.asarray(v).reshape(factors).transpose(keep + rest)
    d = int(np.prod([factors[i] for i in keep])) if keep else 1
    t = t.reshape(d, -1)
    return t @ t.conj().T


def partial_trace(state, layout: SubsystemLayout | None = None, keep: Iterable[int] = (0,)) -> DensityMatrix:
    """Reduced state on the factors ``keep`` (sorted, duplicates ignored).

    ``layout`` defaults to the state's own layout.
    """
    layout = layout or _layout_of(state)
    if layout is None:
        raise LayoutError("partial_trace needs a layout")
    if isinstance(state, PureState):
        keep = _check_layout(layout, state.dim, keep)
        red = partial_trace_ket(state.amplitudes, layout.factors, keep)
    else:
        a = as_operator(state)
        keep = _check_layout(layout, a.shape[0], keep)
        red = partial_trace_matrix(a, layout.factors, keep)
    kept = SubsystemLayout(tuple(layout.factors[i] for i in keep)) if keep else SubsystemLayout((1,))
    return DensityMatrix(hermitian_part(red), kept)


def canonical_purification(rho) -> PureState:
    """Purification ``sum_i sqrt(l_i) |v_i>|i>`` of ``rho`` on ``H ⊗ H``.

    Eigenvalues are taken in descending order with the phase convention of
    :func:`eigh_desc`, so the output is deterministic.
    """
    a = as_operator(rho)
    report = validate_density(a)
    if not report:
        raise InvalidStateError(f"not a density matrix: {report.violations}")
    n = a.shape[0]
    w, v = eigh_desc(a)
    w = clamp_eigenvalues(w)
    x = v * np.sqrt(w)  # columns sqrt(l_i) v_i, i.e. the dim(H) x dim(H) coefficient matrix
    amps = x.reshape(-1)
    amps = amps / np.linalg.norm(amps)
    h = _layout_of(rho) or SubsystemLayout((n,))
    return PureState(amps, SubsystemLayout((n, n)) if len(h) == 1 else h.concat(SubsystemLayout((n,))))


def apply_povm(m: Povm, rho) -> np.ndarray:
    """Outcome distribution ``p_i = Tr(F_i rho)``."""
    a = as_operator(rho)
    if a.shape[0] != m.dim:
        raise DimensionError(f"POVM acts on dim {m.dim}, state has dim {a.shape[0]}")
    p = np.array([np.real(np.vdot(f.matrix.conj().T, a)) for f in m.elements])
    if p.min() < -CLAMP_TOL:
        raise InvalidStateError(f"negative outcome probability {p.min():.3g}")
    p = np.clip(p, 0.0, None)
    if abs(p.sum() - 1.0) > TOL_POVM_SUM:
        raise InvalidStateError(f"outcome probabilities sum to {p.sum()!r}")
    return p


def ket_to_matrix(v: np.ndarray, dim_h: int) -> np.ndarray:
    """Coefficient matrix ``X`` with ``|v> = sum X_ij |i>|j>``."""
    return np.asarray(v).reshape(dim_h, -1)


def uhlmann_closest_purification(sigma, theta) -> PureState:
    """Purification of ``sigma`` on ``H ⊗ K`` with maximal overlap with ``theta``.

    Writing ``theta`` as the coefficient matrix ``X`` and a candidate
    purification as ``sqrt(sigma) V`` with ``V V^† = 1``, the overlap is
    ``Tr(V^† sqrt(sigma) X)``. The singular value decomposition
    ``sqrt(sigma) X = U S W^†`` gives the maximiser ``V = U W^†`` and the
    overlap ``Tr S``, the fidelity of ``sigma`` with the reduced state of
    ``theta``.
    """
    s = as_operator(sigma)
    v = as_ket(theta)
    dh = s.shape[0]
    if v.shape[0] % dh:
        raise DimensionError(f"theta of dim {v.shape[0]} is not on H ⊗ K with dim(H) = {dh}")
    dk = v.shape[0] // dh
    if dk < dh:
        raise DimensionError(f"dim(K) = {dk} is smaller than dim(H) = {dh}")
    x = ket_to_matrix(v, dh)
    a = psd_sqrt(s) @ x
    u, _, wh = np.linalg.svd(a, full_matrices=False)
    y = psd_sqrt(s) @ (u @ wh)
    amps = y.reshape(-1)
    amps = amps / np.linalg.norm(amps)
    layout = _layout_of(theta) or SubsystemLayout((dh, dk))
    return PureState(amps, layout)


def aligning_unitary(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Unitary ``W`` maximising ``Re Tr(W^† X^† Y)``.

    When ``X X^† = Y Y^†`` the two coefficient matrices describe purifications
    of the same state and ``X W = Y`` holds exactly.
    """
    u, _, vh = np.linalg.svd(x.conj().T @ y)
    return u @ vh


# random instances -----------------------------------------------------------

def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix (full rank unless ``rank`` given)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    a = g @ g.conj().T
    return hermitian_part(a / np.trace(a).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_distribution(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def random_povm_element(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random operator with spectrum uniform in [0, 1]."""
    u = random_unitary(dim, rng)
    return hermitian_part((u * rng.uniform(size=dim)) @ u.conj().T)


# JSON -----------------------------------------------------------------------

def matrix_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {
        "dim": int(a.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a],
    }


def matrix_from_json(data: dict) -> np.ndarray:
    e = np.asarray(data["entries"], dtype=float)
    a = e[..., 0] + 1j * e[..., 1]
    if a.shape != (data["dim"], data["dim"]):
        raise DimensionError(f"entries have shape {a.shape}, dim field says {data['dim']}")
    return a


def vector_to_json(v: np.ndarray) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"dim": int(v.shape[0]), "amps": [[float(z.real), float(z.imag)] for z in v]}


def vector_from_json(data: dict) -> np.ndarray:
    e = np.asarray(data["amps"], dtype=float)
    v = e[:, 0] + 1j * e[:, 1]
    if v.shape != (data["dim"],):
        raise DimensionError(f"amps have length {v.shape[0]}, dim field says {data['dim']}")
    return v


def state_from_json(data: dict):
    """Load a ``PureState`` (``amps`` key) or ``DensityMatrix`` (``entries`` key)."""
    if "amps" in data:
        return PureState.from_json(data)
    return DensityMatrix.from_json(data)
