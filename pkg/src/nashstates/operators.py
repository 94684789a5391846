"""Dense operator algebra on n-qubit Hilbert spaces.

Conventions
-----------
Qubit 0 is the most significant tensor factor: the basis index of
``|b_0 b_1 ... b_{N-1}>`` is the integer with binary digits ``b_0 b_1 ...``.
All randomness flows through explicit integer seeds; there is no global RNG
state.  All container types copy their arrays and mark them read-only, so
every value is immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvariantViolationError,
    NotHermitianError,
)

HERMITICITY_ATOL = 1e-12
MAX_DENSE_QUBITS = 12  # desk-scale limit for exact diagonalization


class HermitianTag(enum.Enum):
    HERMITIAN = "hermitian"
    ANTI_HERMITIAN = "anti_hermitian"
    GENERAL = "general"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _detect_tag(entries: np.ndarray) -> HermitianTag:
    if np.max(np.abs(entries - entries.conj().T)) < HERMITICITY_ATOL:
        return HermitianTag.HERMITIAN
    if np.max(np.abs(entries + entries.conj().T)) < HERMITICITY_ATOL:
        return HermitianTag.ANTI_HERMITIAN
    return HermitianTag.GENERAL


@dataclass(frozen=True)
class DenseOperator:
    """A d x d complex matrix with a Hermiticity tag."""

    entries: np.ndarray
    tag: HermitianTag = HermitianTag.GENERAL

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvariantViolationError(f"operator must be square, got shape {entries.shape}")
        object.__setattr__(self, "entries", _frozen(entries))
        if self.tag is HermitianTag.HERMITIAN:
            dev = np.max(np.abs(entries - entries.conj().T))
            if dev >= HERMITICITY_ATOL:
                raise NotHermitianError(f"tagged hermitian but |A - A^dag| = {dev:.3e}")
        elif self.tag is HermitianTag.ANTI_HERMITIAN:
            dev = np.max(np.abs(entries + entries.conj().T))
            if dev >= HERMITICITY_ATOL:
                raise NotHermitianError(f"tagged anti-hermitian but |A + A^dag| = {dev:.3e}")

    @classmethod
    def from_matrix(cls, entries, tag: HermitianTag | str = "auto") -> "DenseOperator":
        entries = np.asarray(entries, dtype=complex)
        if tag == "auto":
            tag = _detect_tag(entries)
        elif isinstance(tag, str):
            tag = HermitianTag(tag)
        return cls(entries, tag)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_hermitian(self) -> bool:
        return self.tag is HermitianTag.HERMITIAN

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.entries.conj().T, self.tag)

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    # -- light algebra; tags are propagated where determined by the inputs --
    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        _check_dims(self, other)
        tag = self.tag if self.tag is other.tag else HermitianTag.GENERAL
        return DenseOperator(self.entries + other.entries, tag)

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        _check_dims(self, other)
        tag = self.tag if self.tag is other.tag else HermitianTag.GENERAL
        return DenseOperator(self.entries - other.entries, tag)

    def __mul__(self, scalar) -> "DenseOperator":
        scalar = complex(scalar)
        if scalar.imag == 0.0:
            tag = self.tag
        elif scalar.real == 0.0 and self.tag is HermitianTag.HERMITIAN:
            tag = HermitianTag.ANTI_HERMITIAN
        elif scalar.real == 0.0 and self.tag is HermitianTag.ANTI_HERMITIAN:
            tag = HermitianTag.HERMITIAN
        else:
            tag = HermitianTag.GENERAL
        return DenseOperator(scalar * self.entries, tag)

    __rmul__ = __mul__

    def __neg__(self) -> "DenseOperator":
        return DenseOperator(-self.entries, self.tag)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        _check_dims(self, other)
        return DenseOperator.from_matrix(self.entries @ other.entries, "auto")


def _check_dims(a, b) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")


@dataclass(frozen=True)
class StateVector:
    """A unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) >= 1e-12:
            raise InvariantViolationError(f"state norm {nrm!r} is not 1 within 1e-12")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).ravel()
        nrm = np.linalg.norm(amps)
        if nrm == 0.0:
            raise InvariantViolationError("cannot normalize the zero vector")
        return cls(amps / nrm)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """A trace-one positive-semidefinite Hermitian matrix."""

    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvariantViolationError("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T)) >= 1e-12:
            raise InvariantViolationError("density matrix is not Hermitian to 1e-12")
        tr = np.trace(rho).real
        if abs(tr - 1.0) >= 1e-12:
            raise InvariantViolationError(f"trace {tr!r} is not 1 within 1e-12")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise InvariantViolationError("density matrix has an eigenvalue below -1e-10")
        object.__setattr__(self, "entries", _frozen(rho))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class PauliTerm:
    """A real coefficient times a product of single-qubit Pauli letters.

    The empty letter map denotes the identity string.
    """

    coefficient: float
    letters: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        letters = dict(self.letters)
        for site, letter in letters.items():
            if site < 0:
                raise InvariantViolationError(f"negative qubit index {site}")
            if letter not in ("X", "Y", "Z"):
                raise InvariantViolationError(f"unknown Pauli letter {letter!r}")
        object.__setattr__(self, "letters", letters)

    def to_operator(self, n_qubits: int) -> DenseOperator:
        if any(site >= n_qubits for site in self.letters):
            raise InvariantViolationError("qubit index out of range for requested width")
        op = identity(2**n_qubits) * self.coefficient
        for site, letter in sorted(self.letters.items()):
            op = op @ embed(PAULI[letter], [site], n_qubits)
        return DenseOperator(op.entries, HermitianTag.HERMITIAN)


@dataclass(frozen=True)
class InteractionGraph:
    """Two-site edge operators plus optional on-site operators on n sites."""

    n_sites: int
    edges: Mapping[tuple[int, int], DenseOperator]
    onsite: Mapping[int, DenseOperator] = field(default_factory=dict)

    def __post_init__(self):
        edges = {}
        for pair, op in dict(self.edges).items():
            i, j = pair
            if i == j:
                raise InvariantViolationError(f"edge {pair} has identical endpoints")
            if not (0 <= i < self.n_sites and 0 <= j < self.n_sites):
                raise InvariantViolationError(f"edge {pair} out of range")
            if op.dim != 4:
                raise DimensionMismatchError("edge operators must be 4x4")
            if not op.is_hermitian:
                raise NotHermitianError(f"edge operator on {pair} is not Hermitian")
            key = (i, j) if i < j else (j, i)
            if key != pair:
                # operator was given on the reversed pair; swap its factors
                op = DenseOperator(_swap_two_qubit(op.entries), op.tag)
            if key in edges:
                raise InvariantViolationError(f"duplicate edge {key}")
            edges[key] = op
        onsite = {}
        for site, op in dict(self.onsite).items():
            if not (0 <= site < self.n_sites):
                raise InvariantViolationError(f"on-site index {site} out of range")
            if op.dim != 2:
                raise DimensionMismatchError("on-site operators must be 2x2")
            onsite[site] = op
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "onsite", onsite)


def _swap_two_qubit(m: np.ndarray) -> np.ndarray:
    t = m.reshape(2, 2, 2, 2)
    return t.transpose(1, 0, 3, 2).reshape(4, 4)


# ---------------------------------------------------------------------------
# constants

PAULI_I = DenseOperator(np.eye(2), HermitianTag.HERMITIAN)
PAULI_X = DenseOperator(np.array([[0, 1], [1, 0]], dtype=complex), HermitianTag.HERMITIAN)
PAULI_Y = DenseOperator(np.array([[0, -1j], [1j, 0]]), HermitianTag.HERMITIAN)
PAULI_Z = DenseOperator(np.diag([1.0, -1.0]).astype(complex), HermitianTag.HERMITIAN)
PAULI = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def identity(d: int) -> DenseOperator:
    return DenseOperator(np.eye(d), HermitianTag.HERMITIAN)


def ket(bits: str) -> StateVector:
    """Computational basis state from a bit string, e.g. ``ket("01")``."""
    n = len(bits)
    amps = np.zeros(2**n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(amps)


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(np.eye(d) / d)


# ---------------------------------------------------------------------------
# operations

def embed(local_op: DenseOperator, support: Sequence[int], n_qubits: int) -> DenseOperator:
    """Extend an operator on ``support`` by identity on the remaining qubits.

    ``support`` is an ordered site list; ``local_op`` must act on exactly
    ``2**len(support)`` dimensions.  The Hermiticity tag is preserved.
    """
    support = list(support)
    k = len(support)
    if len(set(support)) != k:
        raise InvariantViolationError(f"support sites must be distinct, got {support}")
    if any(s < 0 or s >= n_qubits for s in support):
        raise InvariantViolationError(f"support {support} out of range for {n_qubits} qubits")
    if local_op.dim != 2**k:
        raise DimensionMismatchError(
            f"operator dim {local_op.dim} does not match support of {k} qubit(s)")
    if k == n_qubits and support == list(range(n_qubits)):
        return local_op
    full = np.kron(local_op.entries, np.eye(2 ** (n_qubits - k)))
    order = support + [q for q in range(n_qubits) if q not in support]
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n_qubits))
    t = t.transpose(tuple(perm) + tuple(n_qubits + p for p in perm))
    return DenseOperator(np.ascontiguousarray(t.reshape(2**n_qubits, 2**n_qubits)), local_op.tag)


def commutator(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    """[a, b] = ab - ba, with the tag implied by the operands' tags."""
    _check_dims(a, b)
    m = a.entries @ b.entries - b.entries @ a.entries
    herm, anti = HermitianTag.HERMITIAN, HermitianTag.ANTI_HERMITIAN
    if a.tag is herm and b.tag is herm or a.tag is anti and b.tag is anti:
        tag = anti
    elif {a.tag, b.tag} == {herm, anti}:
        tag = herm
    else:
        tag = HermitianTag.GENERAL
    return DenseOperator(m, tag)


def anticommutator(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    _check_dims(a, b)
    return DenseOperator.from_matrix(a.entries @ b.entries + b.entries @ a.entries, "auto")


def expectation(state: StateVector | DensityMatrix, op: DenseOperator, real: bool = False):
    """<psi|op|psi> or Tr(rho op); with ``real=True`` asserts and drops Im."""
    if state.dim != op.dim:
        raise DimensionMismatchError(f"state dim {state.dim} vs operator dim {op.dim}")
    if isinstance(state, StateVector):
        val = complex(np.vdot(state.amplitudes, op.entries @ state.amplitudes))
    else:
        val = complex(np.sum(state.entries.T * op.entries))
    if real:
        if op.is_hermitian and abs(val.imag) >= 1e-12 * max(1.0, abs(val)):
            raise InvariantViolationError(f"expected real expectation, got {val!r}")
        return val.real
    return val


def star_hamiltonians(graph: InteractionGraph, onsite_weight: float = 1.0) -> list[DenseOperator]:
    """Per-site operators collecting half of each incident edge term.

    With ``onsite_weight=1`` the terms sum to the full Hamiltonian; with
    ``onsite_weight=0.5`` they reproduce the strictly-2-local construction
    extended by half the on-site part (the sum then halves the 1-local part).
    """
    n = graph.n_sites
    d = 2**n
    embedded = {pair: embed(op, list(pair), n).entries for pair, op in graph.edges.items()}
    out = []
    for i in range(n):
        h = np.zeros((d, d), dtype=complex)
        for (a, b), m in embedded.items():
            if i in (a, b):
                h += 0.5 * m
        if i in graph.onsite:
            h += onsite_weight * embed(graph.onsite[i], [i], n).entries
        out.append(DenseOperator(h, HermitianTag.HERMITIAN))
    return out


def diagonalize(op: DenseOperator) -> tuple[np.ndarray, list[StateVector]]:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian operator."""
    if not op.is_hermitian:
        raise NotHermitianError("diagonalize requires a Hermitian operator")
    if op.dim > 2**MAX_DENSE_QUBITS:
        raise InvariantViolationError(
            f"dense diagonalization limited to dim 2**{MAX_DENSE_QUBITS}, got {op.dim}")
    vals, vecs = np.linalg.eigh(op.entries)
    return vals, [StateVector.normalized(vecs[:, i]) for i in range(op.dim)]


def random_hermitian(d: int, seed: int, real_symmetric: bool = False) -> DenseOperator:
    """Gaussian-entry Hermitian matrix.

    Complex case: every entry has unit variance (off-diagonal complex,
    diagonal real).  Real-symmetric case: off-diagonal variance 1, diagonal
    variance 2.  Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    if real_symmetric:
        g = rng.standard_normal((d, d))
        m = (g + g.T) / np.sqrt(2.0)
    else:
        g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
        m = (g + g.conj().T) / np.sqrt(2.0)
    return DenseOperator(m, HermitianTag.HERMITIAN)


def random_state(d: int, seed: int) -> StateVector:
    """Haar-uniform pure state (normalized complex Gaussian vector)."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return StateVector.normalized(z)


def local_factor(op: DenseOperator, sites: Sequence[int], n_qubits: int) -> DenseOperator | None:
    """Extract A such that op = A on ``sites`` tensor identity elsewhere.

    Returns None when the operator does not factor this way (to within
    1e-10 of the operator's scale).
    """
    sites = list(sites)
    rest = [q for q in range(n_qubits) if q not in sites]
    d_rest = 2 ** len(rest)
    t = op.entries.reshape((2,) * (2 * n_qubits))
    axes = sites + rest
    t = t.transpose(tuple(axes) + tuple(n_qubits + a for a in axes))
    d_loc = 2 ** len(sites)
    t = t.reshape(d_loc, d_rest, d_loc, d_rest)
    cand = np.trace(t, axis1=1, axis2=3) / d_rest
    local = DenseOperator.from_matrix(cand, "auto")
    recon = embed(local, sites, n_qubits)
    scale = max(1.0, float(np.max(np.abs(op.entries))))
    if np.max(np.abs(recon.entries - op.entries)) > 1e-10 * scale:
        return None
    return local
