"""Nash-state conditions: residuals, local classification, global SU(2) checks.

A state is a Nash state of observables {h_i} and commuting groups {G_i} when
every expectation <[h_i, A]> vanishes for A in the Lie algebra of G_i.  This
module evaluates those residuals, the second-order bilinear forms that
classify local minima/maxima, the closed-form global optimality check over a
single-qubit SU(2), frustration-freeness, and the generic dimension counts
for the solution sets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvariantViolationError,
    NotNashStateError,
)
from .operators import (
    DenseOperator,
    DensityMatrix,
    HermitianTag,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    StateVector,
    embed,
    expectation,
    local_factor,
)

NASH_TOL = 1e-9        # default residual tolerance for exact membership
CLASSIFY_TOL = 1e-7    # default eigenvalue-sign tolerance

SU2_GENERATOR_LETTERS = ("X", "Y", "Z")


@dataclass(frozen=True)
class NashInstance:
    """Observables, disjoint qubit blocks, and per-block generator bases.

    Generators are anti-Hermitian, operator-norm one, embedded on the full
    Hilbert space, and supported only on their own block (so generators of
    distinct blocks commute structurally).
    """

    n_qubits: int
    observables: tuple[DenseOperator, ...]
    blocks: tuple[tuple[int, ...], ...]
    generators: tuple[tuple[DenseOperator, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))
        object.__setattr__(self, "generators", tuple(tuple(g) for g in self.generators))
        d = 2**self.n_qubits
        if not (len(self.observables) == len(self.blocks) == len(self.generators)):
            raise InvariantViolationError("observables, blocks, generators must align")
        seen: set[int] = set()
        for block in self.blocks:
            if any(q < 0 or q >= self.n_qubits for q in block):
                raise InvariantViolationError(f"block {block} out of range")
            if seen & set(block):
                raise InvariantViolationError("blocks must be pairwise disjoint")
            seen |= set(block)
        for h in self.observables:
            if h.dim != d:
                raise DimensionMismatchError("observable dimension mismatch")
            if not h.is_hermitian:
                raise InvariantViolationError("observables must be Hermitian")
        for block, gens in zip(self.blocks, self.generators):
            for g in gens:
                if g.dim != d:
                    raise DimensionMismatchError("generator dimension mismatch")
                if g.tag is not HermitianTag.ANTI_HERMITIAN:
                    raise InvariantViolationError("generators must be anti-Hermitian")
                nrm = g.operator_norm()
                if abs(nrm - 1.0) > 1e-10:
                    raise InvariantViolationError(f"generator norm {nrm!r} is not 1")
                if local_factor(g, block, self.n_qubits) is None:
                    raise InvariantViolationError(
                        f"generator not supported on its block {block}")

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def negated(self) -> "NashInstance":
        return NashInstance(self.n_qubits, tuple(-h for h in self.observables),
                            self.blocks, self.generators)


def su2_generators(qubit: int, n_qubits: int) -> tuple[DenseOperator, ...]:
    """The anti-Hermitian basis (iX, iY, iZ) embedded on one qubit."""
    return tuple(embed(1j * p, [qubit], n_qubits)
                 for p in (PAULI_X, PAULI_Y, PAULI_Z))


def single_qubit_instance(observables: Sequence[DenseOperator],
                          n_qubits: int | None = None) -> NashInstance:
    """Instance with one single-qubit SU(2) block per observable."""
    observables = tuple(observables)
    if n_qubits is None:
        n_qubits = int(round(np.log2(observables[0].dim)))
    if len(observables) != n_qubits:
        raise InvariantViolationError("need one observable per qubit")
    blocks = tuple((i,) for i in range(n_qubits))
    gens = tuple(su2_generators(i, n_qubits) for i in range(n_qubits))
    return NashInstance(n_qubits, observables, blocks, gens)


@dataclass(frozen=True)
class NashResidual:
    """Per-block worst commutator expectations |<[h_i, A_ia]>| and their max."""

    per_block: tuple[float, ...]
    max: float

    def __post_init__(self):
        if self.per_block and abs(self.max - max(self.per_block)) > 0:
            raise InvariantViolationError("max field inconsistent with per_block")
        if any(r < 0 for r in self.per_block):
            raise InvariantViolationError("residuals must be non-negative")


class LocalKind(enum.Enum):
    LOCAL_MIN = "local_min"
    LOCAL_MAX = "local_max"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class LocalClass:
    kind: LocalKind
    eigenvalue_lists: tuple[np.ndarray, ...]


def _comm_expectation(state, h: np.ndarray, a: np.ndarray) -> complex:
    """<[h, a]> via matrix-vector products (pure state) or trace products."""
    if isinstance(state, StateVector):
        psi = state.amplitudes
        return complex(np.vdot(psi, h @ (a @ psi)) - np.vdot(psi, a @ (h @ psi)))
    rho = state.entries
    return complex(np.sum((rho @ h).T * a) - np.sum((rho @ a).T * h))


def _check_state(state, inst: NashInstance) -> None:
    if state.dim != 2**inst.n_qubits:
        raise DimensionMismatchError(
            f"state dim {state.dim} vs instance dim {2**inst.n_qubits}")


def nash_residual(state: StateVector | DensityMatrix, inst: NashInstance) -> NashResidual:
    """Residuals of the stationarity conditions, blockwise and overall."""
    _check_state(state, inst)
    per_block = []
    for h, gens in zip(inst.observables, inst.generators):
        worst = 0.0
        for g in gens:
            worst = max(worst, abs(_comm_expectation(state, h.entries, g.entries)))
        per_block.append(worst)
    return NashResidual(tuple(per_block), max(per_block) if per_block else 0.0)


def is_epsilon_nash(state, inst: NashInstance, epsilon: float) -> bool:
    """Approximate-Nash test: every residual at most ``epsilon``.

    Equivalent to requiring |<[h_i, v . A_i]>| <= epsilon * ||v||_1 for every
    real combination v of the (norm-one) generator basis, since the
    expectation is linear in the generator and equality is attained on basis
    directions.
    """
    if epsilon <= 0:
        raise InvariantViolationError("epsilon must be positive")
    return nash_residual(state, inst).max <= epsilon


def bilinear_form_matrix(state, inst: NashInstance, block_index: int) -> np.ndarray:
    """Second-derivative bilinear form of block ``block_index``.

    Entry (a, b) is the expectation of
    ``1/2 {h_i, {A_a, A_b}} - A_a h_i A_b - A_b h_i A_a``; with anti-Hermitian
    generators this is the literal second derivative of t -> <e^{-tA} h e^{tA}>
    at t = 0 along the basis directions.
    """
    _check_state(state, inst)
    if not (0 <= block_index < inst.n_blocks):
        raise IndexError(f"block index {block_index} out of range")
    h = inst.observables[block_index].entries
    gens = [g.entries for g in inst.generators[block_index]]
    m = len(gens)
    out = np.empty((m, m), dtype=float)
    if isinstance(state, StateVector):
        psi = state.amplitudes
        hpsi = h @ psi
        gpsi = [g @ psi for g in gens]
        hgpsi = [h @ gp for gp in gpsi]
        for a in range(m):
            for b in range(a, m):
                # 1/2 <{h, {A_a, A_b}}> = Re(<h A_a A_b> + <h A_b A_a>)
                anti = np.vdot(hpsi, gens[a] @ gpsi[b]) + np.vdot(hpsi, gens[b] @ gpsi[a])
                # -<A_a h A_b> - <A_b h A_a> = +2 Re <(A_a psi)| h |(A_b psi)>
                cross = 2.0 * np.vdot(gpsi[a], hgpsi[b])
                out[a, b] = out[b, a] = anti.real + cross.real
    else:
        rho = state.entries
        # Tr(rho M N) = sum((rho M) * N^T); precompute the rho/h products so
        # each (a, b) entry costs O(d^2) instead of fresh O(d^3) matmuls
        w = rho @ h + h @ rho
        wg = [w @ g for g in gens]
        khg = [(rho @ g) @ h for g in gens]
        for a in range(m):
            for b in range(a, m):
                sym = np.sum(wg[a] * gens[b].T) + np.sum(wg[b] * gens[a].T)
                cross = np.sum(khg[a] * gens[b].T) + np.sum(khg[b] * gens[a].T)
                val = complex(0.5 * sym - cross)
                out[a, b] = out[b, a] = val.real
    return out


def classify_local(state, inst: NashInstance, tol: float = CLASSIFY_TOL) -> LocalClass:
    """Classify an exact Nash state by the signs of its bilinear forms.

    Eigenvalues within ``(-tol, tol)`` count as zero; the all-zero case is
    reported as degenerate.  Raises when the state is not a Nash state at the
    same tolerance.
    """
    res = nash_residual(state, inst)
    if res.max >= tol:
        raise NotNashStateError(
            f"not a Nash state: residual {res.max:.3e} exceeds tol {tol:.1e}")
    spectra = tuple(np.linalg.eigvalsh(bilinear_form_matrix(state, inst, i))
                    for i in range(inst.n_blocks))
    all_eigs = np.concatenate(spectra) if spectra else np.zeros(0)
    has_pos = bool(np.any(all_eigs > tol))
    has_neg = bool(np.any(all_eigs < -tol))
    if not has_pos and not has_neg:
        kind = LocalKind.DEGENERATE
    elif has_pos and not has_neg:
        kind = LocalKind.LOCAL_MIN
    elif has_neg and not has_pos:
        kind = LocalKind.LOCAL_MAX
    else:
        kind = LocalKind.SADDLE
    return LocalClass(kind, spectra)


def su2_conjugation_form(state, h: DenseOperator, qubit: int) -> np.ndarray:
    """The real symmetric 4x4 form Q with <U(a)^dag h U(a)> = a^T Q a.

    Single-qubit conjugations are parameterized by unit quaternions through
    U(a) = a0 + i(a1 X + a2 Y + a3 Z) on ``qubit``; Q is assembled from the 16
    expectations <P_mu^dag h P_nu> with P = (1, iX, iY, iZ).
    """
    n = int(round(np.log2(h.dim)))
    if not (0 <= qubit < n):
        raise InvariantViolationError(f"qubit {qubit} out of range for {n} qubits")
    paulis = [None, PAULI_X, PAULI_Y, PAULI_Z]
    ops = [np.eye(h.dim, dtype=complex) if p is None
           else embed(1j * p, [qubit], n).entries for p in paulis]
    if isinstance(state, StateVector):
        psi = state.amplitudes
        hv = [h.entries @ (op @ psi) for op in ops]
        pv = [op @ psi for op in ops]
        m = np.array([[np.vdot(pv[a], hv[b]) for b in range(4)] for a in range(4)])
    else:
        rho = state.entries
        m = np.empty((4, 4), dtype=complex)
        for a in range(4):
            for b in range(4):
                op = ops[a].conj().T @ h.entries @ ops[b]
                m[a, b] = np.sum(rho.T * op)
    q = m.real
    return 0.5 * (q + q.T)


def global_su2_check(state, h: DenseOperator, qubit: int, mode: str,
                     tol: float = NASH_TOL) -> tuple[float, bool]:
    """Exact optimum of <U^dag h U> over SU(2) on one qubit.

    The conjugated expectation is a quadratic form over unit quaternions, so
    the optimum is an eigenvalue of the 4x4 form.  Returns the optimal value
    and whether the current expectation already attains it within ``tol``.
    """
    if mode not in ("min", "max"):
        raise InvariantViolationError(f"mode must be 'min' or 'max', got {mode!r}")
    if not h.is_hermitian:
        raise InvariantViolationError("observable must be Hermitian")
    q = su2_conjugation_form(state, h, qubit)
    vals = np.linalg.eigvalsh(q)
    optimal = float(vals[0] if mode == "min" else vals[-1])
    current = expectation(state, h, real=True)
    return optimal, bool(abs(optimal - current) < tol)


def frustration_free_check(terms: Sequence[DenseOperator], state: StateVector,
                           tol: float = 1e-9) -> bool:
    """True when the state is a simultaneous minimum-eigenvalue eigenstate."""
    psi = state.amplitudes
    for term in terms:
        if not term.is_hermitian:
            raise InvariantViolationError("terms must be Hermitian")
        if term.dim != state.dim:
            raise DimensionMismatchError("term dimension mismatch")
        eps_min = float(np.linalg.eigvalsh(term.entries)[0])
        if np.linalg.norm(term.entries @ psi - eps_min * psi) >= tol:
            return False
    return True


@dataclass(frozen=True)
class DimensionCounts:
    dim_D: int
    dim_V: int
    dim_V_prime: int


def dimension_counts(d: int | None = None,
                     group_dims: Sequence[int] | None = None,
                     local_case: tuple[int, int] | None = None) -> DimensionCounts:
    """Generic dimension counts of the Nash sets.

    ``dim_D`` counts mixed Nash density matrices, ``dim_V`` the cone of Nash
    state vectors, ``dim_V_prime`` its projectivization.  ``local_case=(N, q)``
    derives ``d = 2**N`` and one su(2^q) factor of dimension ``2**(2q) - 1``
    per block, which reproduces 2(2^N - 1) - 3N for q = 1.
    """
    if local_case is not None:
        n, q = local_case
        if n % q != 0:
            raise InvariantViolationError("local case requires q to divide N")
        derived_d = 2**n
        derived_dims = [2 ** (2 * q) - 1] * (n // q)
        if d is not None and d != derived_d:
            raise InvariantViolationError(f"d={d} inconsistent with local case N={n}")
        if group_dims is not None and list(group_dims) != derived_dims:
            raise InvariantViolationError("group_dims inconsistent with local case")
        d, group_dims = derived_d, derived_dims
    if d is None or group_dims is None:
        raise InvariantViolationError("need either (d, group_dims) or local_case")
    if any(g <= 0 for g in group_dims):
        raise InvariantViolationError("group dimensions must be positive")
    total = int(sum(group_dims))
    dim_v = 2 * d - total
    return DimensionCounts(dim_D=d * d - 1 - total, dim_V=dim_v, dim_V_prime=dim_v - 2)
