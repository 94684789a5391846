"""The Quantum Prisoner's Dilemma and the generic multi-observable game.

Players hold one qubit each (player 1 = qubit 0, player 2 = qubit 1, with
|0> = cooperate and |1> = defect), act with commuting single-qubit unitaries
on a shared initial state, and receive the expectation of their diagonal
payoff observable.  Pure-strategy equilibria of the game are exactly the
states whose payoffs are stationary and globally maximal under each player's
SU(2), which reduces on real state vectors ("rebits") to two quadratic
equations and two quadratic inequalities on the 3-sphere.

Orbits of fixed entanglement under SU(2) x SU(2) are quartic surfaces in the
stereographically projected coordinates; their intersections with the
equilibrium set are computed by the quadric multistart machinery in rebit
coordinates, where every orbit family becomes quadratic or linear.

Note on the two entanglement scales: the entanglement parameter is
``chi_sq = (X0 X3 - X1 X2)^2 <= 1/4``, while the generic-orbit equation
``(1 - r^2) z - 2xy +- chi (1 + r^2)^2 = 0`` fixes ``X0 X3 - X1 X2 = -+ 2 chi``
(so its coefficient runs to 1/4, not 1/2, at maximal entanglement).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conditions import (
    NASH_TOL,
    NashInstance,
    NashResidual,
    global_su2_check,
    nash_residual,
    single_qubit_instance,
)
from .errors import (
    DimensionMismatchError,
    InvariantViolationError,
    NotNashStateError,
)
from .operators import (
    DenseOperator,
    HermitianTag,
    PAULI_Z,
    StateVector,
    embed,
    expectation,
    local_factor,
)
from .variety import (
    GAUGE_SIGN,
    QuadricSystem,
    inverse_stereographic,
    random_start_search,
    stereographic,
)

ORBIT_FAMILIES = ("separable", "max_entangled_a", "max_entangled_b",
                  "generic_plus", "generic_minus")


# ---------------------------------------------------------------------------
# payoffs and the game

def qpd_payoff_operators() -> tuple[DenseOperator, DenseOperator]:
    """The two diagonal payoff observables, checked against their Pauli form."""
    h1 = np.diag([3.0, 0.0, 5.0, 1.0]).astype(complex)
    h2 = np.diag([3.0, 5.0, 0.0, 1.0]).astype(complex)
    ii = np.eye(4, dtype=complex)
    iz = np.kron(np.eye(2), PAULI_Z.entries)
    zi = np.kron(PAULI_Z.entries, np.eye(2))
    zz = np.kron(PAULI_Z.entries, PAULI_Z.entries)
    pauli_h1 = 2.25 * ii + 1.75 * iz - 0.75 * zi - 0.25 * zz
    pauli_h2 = 2.25 * ii - 0.75 * iz + 1.75 * zi - 0.25 * zz
    if np.max(np.abs(h1 - pauli_h1)) >= 1e-14 or np.max(np.abs(h2 - pauli_h2)) >= 1e-14:
        raise InvariantViolationError("payoff Pauli expansion mismatch")
    return (DenseOperator(h1, HermitianTag.HERMITIAN),
            DenseOperator(h2, HermitianTag.HERMITIAN))


@dataclass(frozen=True)
class GameInstance:
    """A multi-observable game: a Nash instance plus a shared initial state."""

    instance: NashInstance
    initial_state: StateVector

    def __post_init__(self):
        if self.initial_state.dim != 2**self.instance.n_qubits:
            raise DimensionMismatchError("initial state dimension mismatch")

    @property
    def n_players(self) -> int:
        return self.instance.n_blocks


def qpd_instance() -> NashInstance:
    return single_qubit_instance(qpd_payoff_operators(), 2)


def qpd_game(initial_state: StateVector) -> GameInstance:
    return GameInstance(qpd_instance(), initial_state)


def _as_full_unitary(strategy, block: tuple[int, ...], n_qubits: int) -> DenseOperator:
    op = strategy if isinstance(strategy, DenseOperator) else DenseOperator.from_matrix(strategy)
    d_block = 2 ** len(block)
    if op.dim == d_block:
        op = embed(op, list(block), n_qubits)
    elif op.dim == 2**n_qubits:
        if local_factor(op, block, n_qubits) is None:
            raise InvariantViolationError(f"strategy acts outside its block {block}")
    else:
        raise DimensionMismatchError(
            f"strategy dim {op.dim} fits neither block {block} nor the full space")
    dev = np.max(np.abs(op.entries.conj().T @ op.entries - np.eye(op.dim)))
    if dev >= 1e-10:
        raise InvariantViolationError(f"strategy is not unitary (deviation {dev:.3e})")
    return op


def payoffs(state: StateVector, game: GameInstance, strategies: Sequence) -> np.ndarray:
    """Payoff vector u_i = <psi| (prod U_j)^dag h_i (prod U_j) |psi>.

    Strategies may be given per-block or already embedded; they must be
    unitary and supported on their own block, which makes the product order
    immaterial (asserted).
    """
    inst = game.instance
    if state.dim != 2**inst.n_qubits:
        raise DimensionMismatchError("state dimension mismatch")
    if len(strategies) != inst.n_blocks:
        raise InvariantViolationError("need one strategy per player")
    ops = [_as_full_unitary(s, b, inst.n_qubits)
           for s, b in zip(strategies, inst.blocks)]
    psi = state.amplitudes
    fwd = psi.copy()
    for op in ops:
        fwd = op.entries @ fwd
    rev = psi.copy()
    for op in reversed(ops):
        rev = op.entries @ rev
    if np.max(np.abs(fwd - rev)) >= 1e-12:
        raise InvariantViolationError("strategies failed to commute")
    moved = StateVector.normalized(fwd)
    return np.array([expectation(moved, h, real=True) for h in inst.observables])


# ---------------------------------------------------------------------------
# rebits

@dataclass(frozen=True)
class RebitState:
    """A real 4-vector of amplitudes in the (|00>, |01>, |10>, |11>) basis."""

    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.shape != (4,):
            raise InvariantViolationError("rebit needs exactly 4 real amplitudes")
        if self.normalized and abs(np.linalg.norm(vals) - 1.0) >= 1e-12:
            raise InvariantViolationError("rebit norm is not 1 within 1e-12")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def state_vector(self) -> StateVector:
        return StateVector.normalized(self.values.astype(complex))

    def projected(self, antipodal: bool = False) -> "ProjectedPoint":
        xyz = stereographic(self.values, antipodal=antipodal)
        return ProjectedPoint(float(xyz[0]), float(xyz[1]), float(xyz[2]),
                              chart="south" if antipodal else "north")


@dataclass(frozen=True)
class ProjectedPoint:
    """Stereographic image of a unit rebit."""

    x: float
    y: float
    z: float
    chart: str = "north"

    def coords(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def rebit(self) -> RebitState:
        return RebitState(inverse_stereographic(self.coords(),
                                                antipodal=self.chart == "south"))


@dataclass(frozen=True)
class RebitCanonicalization:
    rebit: RebitState | None
    phases: tuple[float, float, float]
    irreducible_phase: float

    @property
    def ok(self) -> bool:
        return self.rebit is not None


def rebit_canonicalize(psi: StateVector, tol: float = 1e-10) -> RebitCanonicalization:
    """Remove the diagonal torus phases e^{i(a0 + a1 Z_1 + a2 Z_2)} if possible.

    The first rotation makes the |00>, |01>, |10> amplitudes real and
    non-negative; the |11> amplitude then carries the only gauge-invariant
    phase combination.  If that phase is 0 mod pi, or one of the middle
    amplitudes vanishes (an extra Z rotation is then free to absorb it), the
    state is gauge-equivalent to a rebit.  Otherwise the canonicalization
    fails and reports the irreducible imaginary part as a certificate.
    """
    if psi.dim != 4:
        raise DimensionMismatchError("rebit canonicalization needs a two-qubit state")
    amps = psi.amplitudes
    mags = np.abs(amps)
    phis = np.where(mags > tol, np.angle(amps), 0.0)
    a0 = -(phis[1] + phis[2]) / 2
    a1 = (phis[2] - phis[0]) / 2
    a2 = (phis[1] - phis[0]) / 2

    def torus(vec, b0, b1, b2):
        signs0 = np.array([1, 1, -1, -1])
        signs1 = np.array([1, -1, 1, -1])
        return vec * np.exp(1j * (b0 + b1 * signs0 + b2 * signs1))

    rotated = torus(amps, a0, a1, a2)
    scale = max(1.0, float(np.max(mags)))
    if np.max(np.abs(rotated[:3].imag)) >= 10 * tol * scale:
        raise InvariantViolationError("torus rotation failed to realign phases")
    resid = abs(float(rotated[3].imag))
    if resid >= tol * scale:
        last_phase = float(np.angle(rotated[3]))
        if mags[1] < tol:
            b0, b1, b2 = -last_phase / 2, 0.0, last_phase / 2
        elif mags[2] < tol:
            b0, b1, b2 = -last_phase / 2, last_phase / 2, 0.0
        else:
            return RebitCanonicalization(None, (a0, a1, a2), resid)
        rotated = torus(rotated, b0, b1, b2)
        a0, a1, a2 = a0 + b0, a1 + b1, a2 + b2
    vals = rotated.real.copy()
    vals[np.abs(vals) < 1e-15] = 0.0
    return RebitCanonicalization(RebitState(vals / np.linalg.norm(vals)),
                                 (float(a0), float(a1), float(a2)),
                                 0.0)


# ---------------------------------------------------------------------------
# the equilibrium set in rebit coordinates

def _rebit_values(x) -> np.ndarray:
    if isinstance(x, RebitState):
        return x.values
    arr = np.asarray(x, dtype=float).ravel()
    if arr.shape != (4,):
        raise InvariantViolationError("expected a rebit 4-vector")
    return arr


def qpd_variety_residual(x) -> tuple[float, float]:
    """The two stationarity polynomials (2 X0 X2 + X1 X3, 2 X0 X1 + X2 X3)."""
    v = _rebit_values(x)
    return (float(2 * v[0] * v[2] + v[1] * v[3]),
            float(2 * v[0] * v[1] + v[2] * v[3]))


def qpd_nash_max_check(x, tol: float = NASH_TOL) -> bool:
    """Global-maximality inequalities, valid only on the stationary set.

    Off-variety calls are rejected: the inequality reduction cancels cross
    terms using the stationarity conditions.
    """
    v = _rebit_values(x)
    r1, r2 = qpd_variety_residual(v)
    if max(abs(r1), abs(r2)) >= max(tol, 1e-6):
        raise NotNashStateError(
            f"nash-max check called off-variety (residuals {r1:.3e}, {r2:.3e})")
    ineq1 = 2 * (v[0] ** 2 - v[2] ** 2) + (v[1] ** 2 - v[3] ** 2)
    ineq2 = 2 * (v[0] ** 2 - v[1] ** 2) + (v[2] ** 2 - v[3] ** 2)
    return bool(ineq1 <= tol and ineq2 <= tol)


def entanglement_parameter(x) -> float:
    """chi^2 = (X0 X3 - X1 X2)^2: 0 iff separable, 1/4 iff maximally entangled."""
    v = _rebit_values(x)
    chi_sq = float((v[0] * v[3] - v[1] * v[2]) ** 2)
    if chi_sq > 0.25 + 1e-12:
        raise InvariantViolationError("entanglement parameter above 1/4; not a unit rebit?")
    return chi_sq


def _variety_forms() -> np.ndarray:
    q1 = np.zeros((4, 4))
    q1[0, 2] = q1[2, 0] = 1.0
    q1[1, 3] = q1[3, 1] = 0.5
    q2 = np.zeros((4, 4))
    q2[0, 1] = q2[1, 0] = 1.0
    q2[2, 3] = q2[3, 2] = 0.5
    return np.array([q1, q2])


def qpd_rebit_system() -> QuadricSystem:
    """The stationarity quadrics on the rebit 3-sphere (sign gauge)."""
    return QuadricSystem(4, _variety_forms(), GAUGE_SIGN,
                         ("stationary:player1", "stationary:player2"))


_DET_FORM = np.array([[0, 0, 0, 0.5],
                      [0, 0, -0.5, 0],
                      [0, -0.5, 0, 0],
                      [0.5, 0, 0, 0]])


def orbit_residual(p, chi: float, family: str) -> float:
    """Defining-equation residual of a constant-entanglement orbit.

    Families: the separable cubic ``(1-r^2) z - 2xy``; the two maximal
    circles ``{x = -y, (z-1)^2 + x^2 + y^2 = 2}`` and
    ``{x = y, (z+1)^2 + x^2 + y^2 = 2}``; and the generic pair
    ``(1-r^2) z - 2xy +- chi (1+r^2)^2``.  Returns the max residual of the
    family's equations at the projected point.
    """
    if family not in ORBIT_FAMILIES:
        raise InvariantViolationError(f"unknown orbit family {family!r}")
    coords = p.coords() if isinstance(p, ProjectedPoint) else np.asarray(p, dtype=float)
    x, y, z = (float(c) for c in coords)
    r2 = x * x + y * y + z * z
    base = (1 - r2) * z - 2 * x * y
    if family == "separable":
        return abs(base)
    if family == "max_entangled_a":
        return max(abs(x + y), abs((z - 1) ** 2 + x * x + y * y - 2))
    if family == "max_entangled_b":
        return max(abs(x - y), abs((z + 1) ** 2 + x * x + y * y - 2))
    if chi * chi > 0.25 + 1e-12:
        raise InvariantViolationError("generic orbits require chi^2 <= 1/4")
    sign = 1.0 if family == "generic_plus" else -1.0
    return abs(base + sign * chi * (1 + r2) ** 2)


def orbit_families_for(chi: float, tol: float = 1e-9) -> tuple[str, ...]:
    """Orbit families probed for a given entanglement argument."""
    if abs(chi) < tol:
        return ("separable",)
    if abs(chi * chi - 0.25) < max(tol, 1e-9):
        return ("max_entangled_a", "max_entangled_b")
    return ("generic_plus", "generic_minus")


def orbit_joint_system(chi: float, family: str) -> QuadricSystem:
    """Stationarity quadrics plus the orbit constraints, on the rebit sphere.

    In rebit coordinates the separable/generic orbit is the homogenized
    quadric ``X0 X3 - X1 X2 - c |X|^2`` with ``c = -+ 2 chi``, and each
    maximal circle is a pair of linear constraints.
    """
    forms = list(_variety_forms())
    labels = ["stationary:player1", "stationary:player2"]
    linear = None
    if family == "separable":
        forms.append(_DET_FORM)
        labels.append("orbit:separable")
    elif family in ("generic_plus", "generic_minus"):
        if chi * chi > 0.25 + 1e-12:
            raise InvariantViolationError("generic orbits require chi^2 <= 1/4")
        c = -2.0 * chi if family == "generic_plus" else 2.0 * chi
        forms.append(_DET_FORM - c * np.eye(4))
        labels.append(f"orbit:{family}")
    elif family == "max_entangled_a":
        linear = np.array([[0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0]])
    elif family == "max_entangled_b":
        linear = np.array([[0.0, 1.0, -1.0, 0.0], [1.0, 0.0, 0.0, -1.0]])
    else:
        raise InvariantViolationError(f"unknown orbit family {family!r}")
    return QuadricSystem(4, np.array(forms), GAUGE_SIGN, tuple(labels), linear=linear)


@dataclass(frozen=True)
class IntersectionPoint:
    rebit: RebitState
    projected: ProjectedPoint
    family: str
    nash_max: bool
    residual: float
    payoffs: tuple[float, float]


def orbit_variety_intersections(chi: float, tol: float = NASH_TOL, seed: int = 0,
                                n_starts: int = 400,
                                dedup_antipodal: bool = False) -> list[IntersectionPoint]:
    """Intersections of a constant-entanglement orbit with the stationary set.

    Solved by the quadric multistart machinery per orbit family; each point is
    flagged with the global-maximality inequalities and its payoff vector.
    By default both members of each antipodal pair are reported (the double
    cover); ``dedup_antipodal=True`` keeps one representative.
    """
    h1, h2 = qpd_payoff_operators()
    out = []
    for family in orbit_families_for(chi, tol):
        sys = orbit_joint_system(chi, family)
        reps = random_start_search(sys, n_starts, seed, tol=min(tol, 1e-10))
        vectors = []
        for pt in reps:
            vectors.append(pt.coords)
            if not dedup_antipodal:
                vectors.append(-pt.coords)
        for v in vectors:
            rebit = RebitState(v / np.linalg.norm(v))
            antipodal = 1.0 + v[0] < 1e-9
            projected = rebit.projected(antipodal=antipodal)
            state = rebit.state_vector()
            out.append(IntersectionPoint(
                rebit=rebit,
                projected=projected,
                family=family,
                nash_max=qpd_nash_max_check(rebit, tol=max(tol, 1e-9)),
                residual=sys.residual_of(v),
                payoffs=(expectation(state, h1, real=True),
                         expectation(state, h2, real=True)),
            ))
    out.sort(key=lambda p: (p.family,) + tuple(np.round(p.rebit.values, 12)))
    return out


# ---------------------------------------------------------------------------
# equilibrium certificate

@dataclass(frozen=True)
class BlockOptimality:
    block: tuple[int, ...]
    current: float
    optimal: float
    is_global: bool


@dataclass(frozen=True)
class EquilibriumCertificate:
    is_equilibrium: bool
    residual: NashResidual
    blocks: tuple[BlockOptimality, ...]


def nash_equilibrium_certificate(game: GameInstance,
                                 tol: float = NASH_TOL) -> EquilibriumCertificate:
    """Certify the 'do nothing' profile as a pure-strategy equilibrium.

    True iff the initial state is a Nash state and every player's payoff is
    already globally maximal over their SU(2).  Requires single-qubit blocks
    (the closed-form global check); larger blocks are not certified here.
    """
    inst = game.instance
    if any(len(b) != 1 for b in inst.blocks):
        raise InvariantViolationError(
            "global certification implemented for single-qubit blocks only")
    state = game.initial_state
    residual = nash_residual(state, inst)
    blocks = []
    if residual.max < tol:
        for h, block in zip(inst.observables, inst.blocks):
            optimal, is_global = global_su2_check(state, h, block[0], "max", tol=tol)
            blocks.append(BlockOptimality(block, expectation(state, h, real=True),
                                          optimal, is_global))
        ok = all(b.is_global for b in blocks)
    else:
        ok = False
    return EquilibriumCertificate(ok, residual, tuple(blocks))
