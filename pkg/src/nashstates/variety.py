"""Real quadric systems for Nash conditions: solving, dimension, tracing.

A state vector ``psi = x + i y`` turns each stationarity condition into a
real homogeneous quadratic form on the ``2d`` real coordinates ``v = (x, y)``.
This module builds those systems, finds points on them by random-multistart
Gauss-Newton (a sampling method; completeness of the enumeration is not
claimed), estimates local dimensions from the constraint Jacobian, traces
one-dimensional components by predictor-corrector stepping, and provides the
stereographic chart used for exports.

Gauge: scaling is removed by the unit-sphere constraint; the residual global
phase acts as ``(x, y) -> (cos t x - sin t y, sin t x + cos t y)`` and is
quotiented out in deduplication, dimension counting, and closure detection.
Systems over real (rebit) coordinates carry only a sign gauge.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .conditions import NashInstance
from .errors import (
    InvariantViolationError,
    JacobianRankError,
    NewtonConvergenceError,
    ProjectionPoleError,
    TangentDimensionError,
)
from .operators import PAULI_X, PAULI_Y, PAULI_Z, embed

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 100
DEDUP_ANGLE = 1e-6
RANK_TOL = 1e-6

GAUGE_COMPLEX_PHASE = "complex_phase"
GAUGE_SIGN = "sign"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuadricSystem:
    """A list of real symmetric forms (plus optional linear rows) and a gauge.

    ``pauli_comms`` is set for time-reversal-symmetric builds and holds, per
    single-qubit block, the matrices ([h, X], i[h, Y], [h, Z]) that define the
    forms; the first and last are real antisymmetric, the middle one real
    symmetric.
    """

    ambient_dim: int
    forms: np.ndarray                      # (C, n, n)
    gauge: str = GAUGE_COMPLEX_PHASE
    labels: tuple[str, ...] = ()
    linear: np.ndarray | None = None       # (L, n) optional linear constraints
    pauli_comms: tuple | None = None

    def __post_init__(self):
        forms = np.asarray(self.forms, dtype=float)
        if forms.ndim != 3 or forms.shape[1:] != (self.ambient_dim, self.ambient_dim):
            raise InvariantViolationError("forms must be (C, n, n) with n = ambient_dim")
        sym_dev = np.max(np.abs(forms - forms.transpose(0, 2, 1))) if len(forms) else 0.0
        if sym_dev >= 1e-12:
            raise InvariantViolationError(f"forms not symmetric: deviation {sym_dev:.3e}")
        object.__setattr__(self, "forms", _frozen(forms))
        if self.linear is not None:
            lin = np.asarray(self.linear, dtype=float)
            if lin.ndim != 2 or lin.shape[1] != self.ambient_dim:
                raise InvariantViolationError("linear rows must be (L, n)")
            object.__setattr__(self, "linear", _frozen(lin))
        if self.gauge not in (GAUGE_COMPLEX_PHASE, GAUGE_SIGN):
            raise InvariantViolationError(f"unknown gauge {self.gauge!r}")
        if not self.labels:
            object.__setattr__(self, "labels",
                               tuple(f"form{i}" for i in range(len(forms))))

    @property
    def n_forms(self) -> int:
        return len(self.forms)

    @property
    def gauge_dim(self) -> int:
        return 1 if self.gauge == GAUGE_COMPLEX_PHASE else 0

    def residual_of(self, v: np.ndarray) -> float:
        """Max absolute constraint value at ``v`` (norm row excluded)."""
        v = np.asarray(v, dtype=float)
        vals = kernels.quadric_values(self.forms, v)
        worst = float(np.max(np.abs(vals))) if len(vals) else 0.0
        if self.linear is not None and len(self.linear):
            worst = max(worst, float(np.max(np.abs(self.linear @ v))))
        return worst

    def gauge_tangents(self, v: np.ndarray) -> np.ndarray:
        """Unit tangent vectors of the gauge orbit through unit-norm ``v``."""
        if self.gauge == GAUGE_SIGN:
            return np.zeros((0, self.ambient_dim))
        d = self.ambient_dim // 2
        g = np.concatenate([-v[d:], v[:d]])
        return g[None, :] / np.linalg.norm(g)

    def gauge_overlap(self, a: np.ndarray, b: np.ndarray) -> float:
        """|<a|b>| modulo the gauge action, for unit vectors."""
        if self.gauge == GAUGE_SIGN:
            return abs(float(a @ b))
        d = self.ambient_dim // 2
        pa = a[:d] + 1j * a[d:]
        pb = b[:d] + 1j * b[d:]
        return abs(complex(np.vdot(pa, pb)))

    def gauge_transform(self, reference: np.ndarray, v: np.ndarray):
        """Gauge element (sign or phase) aligning ``v`` to ``reference``."""
        if self.gauge == GAUGE_SIGN:
            return 1.0 if float(reference @ v) >= 0.0 else -1.0
        d = self.ambient_dim // 2
        pr = reference[:d] + 1j * reference[d:]
        pv = v[:d] + 1j * v[d:]
        ov = complex(np.vdot(pv, pr))
        return ov / abs(ov) if ov != 0 else complex(1.0)

    def gauge_apply(self, element, v: np.ndarray) -> np.ndarray:
        """Apply a gauge element; phase rotations act linearly on (x, y)."""
        if self.gauge == GAUGE_SIGN:
            return element * v
        d = self.ambient_dim // 2
        pv = (v[:d] + 1j * v[d:]) * element
        return np.concatenate([pv.real, pv.imag])

    def gauge_align(self, reference: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Gauge transform of ``v`` closest to ``reference``."""
        return self.gauge_apply(self.gauge_transform(reference, v), v)

    def canonical_gauge(self, v: np.ndarray) -> np.ndarray:
        """Deterministic gauge representative (used for stable output order)."""
        if self.gauge == GAUGE_SIGN:
            idx = int(np.argmax(np.abs(v)))
            return v if v[idx] > 0 else -v
        d = self.ambient_dim // 2
        psi = v[:d] + 1j * v[d:]
        idx = int(np.argmax(np.abs(psi)))
        ph = psi[idx]
        if abs(ph) > 0:
            psi = psi * (ph.conjugate() / abs(ph))
        return np.concatenate([psi.real, psi.imag])


@dataclass(frozen=True)
class VarietyPoint:
    """A unit-norm solution candidate with its recorded constraint residual."""

    coords: np.ndarray
    residual: float
    chart_tag: str = "sphere"

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        nrm = float(np.linalg.norm(coords))
        if abs(nrm - 1.0) >= 1e-12:
            raise InvariantViolationError(f"point norm {nrm!r} is not 1 within 1e-12")
        object.__setattr__(self, "coords", _frozen(coords))


@dataclass(frozen=True)
class TangentFrame:
    base: VarietyPoint
    basis: np.ndarray          # (est_dim, n), orthonormal, gauge removed
    est_dim: int

    def __post_init__(self):
        object.__setattr__(self, "basis", _frozen(np.atleast_2d(self.basis)))


@dataclass(frozen=True)
class TraceResult:
    points: tuple[VarietyPoint, ...]
    closed: bool
    failure: str | None = None


# ---------------------------------------------------------------------------
# system construction

def _hermitian_to_form(k: np.ndarray) -> np.ndarray:
    """Real form of psi -> <psi|K|psi> for Hermitian K, on (x, y) coordinates."""
    kr, ki = k.real, k.imag
    top = np.concatenate([kr, -ki], axis=1)
    bot = np.concatenate([ki, kr], axis=1)
    q = np.concatenate([top, bot], axis=0)
    return 0.5 * (q + q.T)


def build_system(inst: NashInstance, real_symmetric: bool = False) -> QuadricSystem:
    """Quadric system whose zero set is the instance's Nash variety.

    General case: one form per (block, generator) pair, with values equal to
    the commutator expectations.  Time-reversal-symmetric case
    (``real_symmetric=True``, single-qubit blocks, real symmetric
    observables): the per-qubit forms
    ``x^T C_Y x + y^T C_Y y``, ``x^T C_X y``, ``x^T C_Z y`` with
    C_X = [h, X], C_Y = i [h, Y], C_Z = [h, Z].
    """
    d = 2**inst.n_qubits
    n = 2 * d
    if not real_symmetric:
        forms, labels = [], []
        for i, (h, gens) in enumerate(zip(inst.observables, inst.generators)):
            for a, g in enumerate(gens):
                k = h.entries @ g.entries - g.entries @ h.entries
                forms.append(_hermitian_to_form(k))
                labels.append(f"block{i}:gen{a}")
        return QuadricSystem(n, np.array(forms), GAUGE_COMPLEX_PHASE, tuple(labels))

    comms = []
    for i, (h, block) in enumerate(zip(inst.observables, inst.blocks)):
        if np.max(np.abs(h.entries.imag)) >= 1e-12:
            raise InvariantViolationError(
                "real_symmetric build requires real symmetric observables")
        if len(block) != 1:
            raise InvariantViolationError(
                "real_symmetric build requires single-qubit blocks")
        q = block[0]
        hm = h.entries.real
        cx = hm @ embed(PAULI_X, [q], inst.n_qubits).entries.real
        cx = cx - cx.T  # [h, X] for symmetric h and X: hX - (hX)^T
        y = embed(PAULI_Y, [q], inst.n_qubits).entries
        cy = (1j * (hm @ y - y @ hm)).real
        cz = hm @ embed(PAULI_Z, [q], inst.n_qubits).entries.real
        cz = cz - cz.T
        if np.max(np.abs(cx + cx.T)) >= 1e-12 or np.max(np.abs(cz + cz.T)) >= 1e-12:
            raise InvariantViolationError("commutators with X/Z must be antisymmetric")
        if np.max(np.abs(cy - cy.T)) >= 1e-12:
            raise InvariantViolationError("i[h, Y] must be symmetric")
        comms.append((cx, cy, cz))

    zero = np.zeros((d, d))
    forms, labels = [], []
    for i, (cx, cy, cz) in enumerate(comms):
        q = np.block([[cy, zero], [zero, cy]])
        forms.append(0.5 * (q + q.T))
        labels.append(f"block{i}:Y")
    for letter, idx in (("X", 0), ("Z", 2)):
        for i, c in enumerate(comms):
            m = c[idx]
            q = np.block([[zero, 0.5 * m], [0.5 * m.T, zero]])
            forms.append(q)
            labels.append(f"block{i}:{letter}")
    return QuadricSystem(n, np.array(forms), GAUGE_COMPLEX_PHASE, tuple(labels),
                         pauli_comms=tuple(comms))


# ---------------------------------------------------------------------------
# solving

def _finish_point(sys: QuadricSystem, v: np.ndarray) -> VarietyPoint:
    v = v / np.linalg.norm(v)
    return VarietyPoint(v, sys.residual_of(v))


def newton_solve(sys: QuadricSystem, start: np.ndarray, tol: float = NEWTON_TOL,
                 max_iter: int = NEWTON_MAX_ITER) -> VarietyPoint:
    """Gauss-Newton solve of the system augmented with the unit-norm row.

    Returns the renormalized point on success; raises
    ``NewtonConvergenceError`` or ``JacobianRankError`` otherwise (no point is
    ever fabricated).  A start already on the variety is returned unchanged
    after the zeroth residual check.
    """
    start = np.asarray(start, dtype=float)
    if start.shape != (sys.ambient_dim,):
        raise InvariantViolationError(f"start must have shape ({sys.ambient_dim},)")
    if np.linalg.norm(start) == 0.0:
        raise InvariantViolationError("start must be nonzero")
    v, rinf, status, iters = kernels.gauss_newton(
        sys.forms, sys.linear, start, tol, max_iter)
    if status == kernels.GN_CONVERGED:
        return _finish_point(sys, v)
    if status == kernels.GN_RANK_COLLAPSE:
        raise JacobianRankError(
            f"singular least-squares step after {iters} iteration(s)")
    raise NewtonConvergenceError(
        f"no convergence after {iters} iteration(s); residual {rinf:.3e}",
        iterations=iters, residual=rinf)


def _default_workers() -> int:
    env = os.environ.get("NASHSTATES_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return 1


def random_start_search(sys: QuadricSystem, n_starts: int, seed: int,
                        tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER,
                        start_subspace: str = "full",
                        n_workers: int | None = None) -> list[VarietyPoint]:
    """Newton solves from uniform sphere starts, deduplicated under gauge.

    ``start_subspace="real"`` seeds only the real half of the coordinates
    (time-reversal slice); the min-norm Gauss-Newton step then stays on that
    slice, which is how the double-cover curve set of a real-symmetric system
    is sampled.  Results are gauge-canonicalized and sorted, so the output is
    deterministic for a fixed seed regardless of thread scheduling.
    """
    if n_starts < 1:
        raise InvariantViolationError("n_starts must be >= 1")
    if start_subspace not in ("full", "real"):
        raise InvariantViolationError(f"unknown start_subspace {start_subspace!r}")
    rng = np.random.default_rng(seed)
    starts = rng.standard_normal((n_starts, sys.ambient_dim))
    if start_subspace == "real":
        starts[:, sys.ambient_dim // 2:] = 0.0
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)

    def attempt(v0):
        try:
            return newton_solve(sys, v0, tol, max_iter)
        except (NewtonConvergenceError, JacobianRankError):
            return None

    workers = n_workers if n_workers is not None else _default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(attempt, starts))
    else:
        found = [attempt(v0) for v0 in starts]

    kept: list[VarietyPoint] = []
    for pt in found:
        if pt is None:
            continue
        if any(np.arccos(min(1.0, sys.gauge_overlap(pt.coords, other.coords)))
               < DEDUP_ANGLE for other in kept):
            continue
        kept.append(VarietyPoint(sys.canonical_gauge(pt.coords), pt.residual))
    kept.sort(key=lambda p: tuple(np.round(p.coords, 12)))
    return kept


# ---------------------------------------------------------------------------
# dimension estimation and tracing

def _sphere_jacobian(sys: QuadricSystem, v: np.ndarray) -> np.ndarray:
    rows = [kernels.quadric_gradients(sys.forms, v)]
    if sys.linear is not None and len(sys.linear):
        rows.append(sys.linear)
    rows.append(v[None, :])
    return np.concatenate(rows, axis=0)


def estimate_local_dimension(sys: QuadricSystem, point: VarietyPoint,
                             rank_tol: float = RANK_TOL) -> TangentFrame:
    """Tangent dimension at a point, with the gauge direction removed.

    The null space of the constraint Jacobian restricted to the unit sphere is
    estimated from singular values below ``rank_tol`` times the largest; the
    gauge orbit accounts for one of those directions on complex-phase systems.
    """
    if point.residual >= 1e-8:
        raise InvariantViolationError(
            f"point residual {point.residual:.3e} too large for dimension estimation")
    v = point.coords
    m = _sphere_jacobian(sys, v)
    _, sv, vt = np.linalg.svd(m)
    top = sv[0] if len(sv) else 0.0
    rank = int(np.sum(sv > rank_tol * top)) if top > 0 else 0
    null = vt[rank:]
    est_dim = null.shape[0] - sys.gauge_dim
    gauges = sys.gauge_tangents(v)
    basis = null
    if len(gauges):
        basis = null - (null @ gauges.T) @ gauges
        if basis.size:
            u2, s2, vt2 = np.linalg.svd(basis, full_matrices=False)
            basis = vt2[s2 > 0.5]
    if est_dim <= 0:
        basis = np.zeros((0, sys.ambient_dim))
        est_dim = max(est_dim, 0)
    else:
        basis = basis[:est_dim]
    return TangentFrame(point, basis, est_dim)


def _continue_direction(frame: TangentFrame, previous: np.ndarray) -> np.ndarray:
    if frame.basis.shape[0] == 0:
        return previous
    scores = frame.basis @ previous
    idx = int(np.argmax(np.abs(scores)))
    direction = frame.basis[idx]
    return direction if scores[idx] >= 0 else -direction


def trace_component(sys: QuadricSystem, point: VarietyPoint, step: float,
                    max_steps: int, tol: float = NEWTON_TOL,
                    rank_tol: float = RANK_TOL) -> TraceResult:
    """Predictor-corrector trace of a one-dimensional component.

    Steps of length ``step`` along the continued tangent direction, each
    followed by a Newton corrector; successive points are gauge-aligned so the
    trace is a continuous curve.  The trace closes when it returns within
    ``step/2`` of the start with direction cosine above 0.9 against the
    initial direction (both modulo gauge), which avoids declaring closure at
    transversal self-intersections.  Corrector failure returns the partial
    trace with a diagnostic.
    """
    if step <= 0:
        raise InvariantViolationError("step must be positive")
    frame = estimate_local_dimension(sys, point, rank_tol)
    if frame.est_dim != 1:
        raise TangentDimensionError(
            f"tracing requires est_dim == 1 at the start, got {frame.est_dim}")
    direction = frame.basis[0]
    start = point.coords
    start_dir = direction
    points = [point]
    current = start
    closed = False
    failure = None
    for k in range(1, max_steps + 1):
        predictor = current + step * direction
        predictor /= np.linalg.norm(predictor)
        try:
            corrected = newton_solve(sys, predictor, tol)
        except (NewtonConvergenceError, JacobianRankError) as exc:
            failure = f"corrector failed at step {k}: {exc}"
            break
        aligned = sys.gauge_align(current, corrected.coords)
        aligned /= np.linalg.norm(aligned)
        pt = VarietyPoint(aligned, corrected.residual)
        points.append(pt)
        frame = estimate_local_dimension(sys, pt, rank_tol)
        direction = _continue_direction(frame, direction)
        current = aligned
        if k >= 3:
            element = sys.gauge_transform(start, current)
            back = sys.gauge_apply(element, current)
            dist = float(np.linalg.norm(back - start))
            # transport the direction with the same gauge element
            cosine = float(sys.gauge_apply(element, direction) @ start_dir)
            if dist < step / 2 and cosine > 0.9:
                closed = True
                break
    return TraceResult(tuple(points), closed, failure)


# ---------------------------------------------------------------------------
# time-reversal slice membership and charts

def tilde_v_membership(x: np.ndarray, lam: float, sys: QuadricSystem,
                       tol: float = 1e-9) -> bool:
    """Membership of ``(x, lam * x)`` in the time-reversal component.

    True iff the two Y-forms vanish on ``x`` alone; in that case the full
    system residual of the normalized ``(x, lam x)`` is asserted to vanish as
    well (the cross-term constraints are redundant on this slice, for any
    ``lam``).
    """
    if sys.pauli_comms is None or sys.ambient_dim != 8:
        raise InvariantViolationError(
            "tilde_v_membership requires a real-symmetric two-qubit system")
    x = np.asarray(x, dtype=float)
    if x.shape != (4,):
        raise InvariantViolationError("x must be a real 4-vector")
    worst = max(abs(float(x @ cy @ x)) for _, cy, _ in sys.pauli_comms)
    scale = max(1.0, float(x @ x))
    if worst >= tol * scale:
        return False
    v = np.concatenate([x, lam * x])
    v = v / np.linalg.norm(v)
    full = sys.residual_of(v)
    if full >= max(tol, 10 * worst / scale):
        raise InvariantViolationError(
            f"slice member has full residual {full:.3e}; expected redundancy")
    return True


def stereographic(p: np.ndarray, antipodal: bool = False) -> np.ndarray:
    """Chart S^3 -> R^3, x_i = X_i / (1 + X_0); pole at X_0 = -1.

    ``antipodal=True`` selects the opposite chart x_i = X_i / (1 - X_0),
    usable at points where the default chart degenerates.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise InvariantViolationError("expected a 4-vector")
    if abs(np.linalg.norm(p) - 1.0) >= 1e-9:
        raise InvariantViolationError("stereographic projection expects a unit vector")
    denom = 1.0 - p[0] if antipodal else 1.0 + p[0]
    if denom < 1e-12:
        raise ProjectionPoleError(
            "projection pole reached; request the antipodal chart")
    return p[1:] / denom


def inverse_stereographic(xyz: np.ndarray, antipodal: bool = False) -> np.ndarray:
    """Inverse chart: X_i = 2 x_i / (1 + r^2), X_0 = (1 - r^2) / (1 + r^2)."""
    xyz = np.asarray(xyz, dtype=float)
    if xyz.shape != (3,):
        raise InvariantViolationError("expected a 3-vector")
    r2 = float(xyz @ xyz)
    x0 = (1.0 - r2) / (1.0 + r2)
    if antipodal:
        x0 = -x0
    return np.concatenate([[x0], 2.0 * xyz / (1.0 + r2)])
