"""Exact thermodynamics of the periodic transverse-field Ising chain.

Free-fermion route (J = 1 units): the chain maps to two quadratic fermion
Hamiltonians, one per fermion-parity sector, each diagonal in Bogoliubov
modes with single-particle energy ``2 eps_k`` where

    eps_k = sqrt(1 + g^2 - 2 g cos k).

The allowed momenta differ between sectors and between even/odd N; traces
over the physical Hilbert space combine a plain thermal trace with a
parity-twisted one via the signs ``eta_sigma`` (+1 in both sectors for g < 1,
equal to the sector sign for g > 1; the g = 1 convention follows the g > 1
rule, which the exact-diagonalization cross-checks validate).  All products
over modes are accumulated in the log domain, with ``expm1`` handling the
near-cancellation of the twisted products at low temperature.

Everything here is cross-checkable against the dense oracle
``ExactThermalOracle`` built from the full spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conditions import NashInstance, single_qubit_instance
from .errors import DimensionMismatchError, InvariantViolationError
from .operators import (
    DenseOperator,
    DensityMatrix,
    HermitianTag,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    StateVector,
    commutator,
    embed,
)

MAX_FF_SITES = 24
MAX_DENSE_SITES = 12


@dataclass(frozen=True)
class TFIMSpec:
    """Chain size, transverse field, and inverse temperature (J = 1)."""

    n_sites: int
    g: float
    beta: float

    def __post_init__(self):
        if self.n_sites < 2:
            raise InvariantViolationError("need at least 2 sites")
        if self.n_sites > MAX_FF_SITES:
            raise InvariantViolationError(
                f"free-fermion routines limited to {MAX_FF_SITES} sites")
        if self.g < 0:
            raise InvariantViolationError("transverse field must be non-negative")
        if self.beta < 0:
            raise InvariantViolationError("inverse temperature must be >= 0")


@dataclass(frozen=True)
class MomentumSectors:
    """Allowed momenta per fermion-parity sector, with the trace signs."""

    k_plus: np.ndarray
    k_minus: np.ndarray
    eta_plus: int
    eta_minus: int

    def __post_init__(self):
        for name in ("k_plus", "k_minus"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class ModeData:
    """Per-mode energy, Bogoliubov angle, and sector-conditional occupations."""

    k: float
    epsilon: float
    theta: float
    occ: float
    vac: float
    sector: int


def momentum_sectors(spec: TFIMSpec) -> MomentumSectors:
    """Sector momentum grids: half-integer grid for even parity (plus the
    unpaired pi mode when N is odd), integer grid with the unpaired 0 and pi
    modes otherwise."""
    n = spec.n_sites
    if n % 2 == 0:
        kp = np.array([(2 * j + 1) * np.pi / n for j in range(n // 2)])
        kp = np.sort(np.concatenate([-kp, kp]))
        km = np.array([2 * j * np.pi / n for j in range(1, n // 2)])
        km = np.concatenate([[0.0], np.sort(np.concatenate([-km, km])), [np.pi]])
        km = np.sort(km)
    else:
        kp = np.array([(2 * j + 1) * np.pi / n for j in range((n - 1) // 2)])
        kp = np.sort(np.concatenate([-kp, kp, [np.pi]]))
        km = np.array([2 * j * np.pi / n for j in range(1, (n - 1) // 2 + 1)])
        km = np.sort(np.concatenate([[0.0], -km, km]))
    eta_plus = 1
    eta_minus = 1 if spec.g < 1 else -1
    return MomentumSectors(kp, km, eta_plus, eta_minus)


def mode_energy(k, g: float):
    return np.sqrt(1.0 + g * g - 2.0 * g * np.cos(k))


def bogoliubov_angle(k, g: float):
    """Angle with sin(theta) = sin(k)/eps, cos(theta) = (g - cos k)/eps.

    At the unpaired k = 0 mode this gives theta = 0 for g > 1 and theta = pi
    for g < 1; the g = 1 degenerate case takes the paramagnetic value 0.
    """
    return np.arctan2(np.sin(k), g - np.cos(k))


@dataclass(frozen=True)
class _SectorData:
    momenta: np.ndarray
    energies: np.ndarray
    eta: int
    log_cosh: float          # log prod 2cosh(beta eps)
    log_tanh: np.ndarray     # log tanh(beta eps) per mode (-inf at zero args)
    log_z: float             # log of the projected sector partition sum
    sign: int


def _sector_data(spec: TFIMSpec) -> tuple[_SectorData, _SectorData]:
    sectors = momentum_sectors(spec)
    out = []
    for momenta, eta, sign in ((sectors.k_plus, sectors.eta_plus, +1),
                               (sectors.k_minus, sectors.eta_minus, -1)):
        eps = mode_energy(momenta, spec.g)
        arg = spec.beta * eps
        # log(2 cosh x) = |x| + log1p(e^{-2|x|})
        log_cosh = float(np.sum(np.abs(arg) + np.log1p(np.exp(-2 * np.abs(arg)))))
        with np.errstate(divide="ignore"):
            log_tanh = np.log(np.tanh(arg))
        s = float(np.sum(log_tanh))
        # log Z_sigma = log( (A + eta B)/2 ) = log_cosh + log((1 + eta e^s)/2)
        if eta > 0:
            log_ratio = np.log1p(np.exp(s)) - np.log(2.0)
        else:
            diff = -np.expm1(s)  # 1 - e^s, accurate near s = 0-
            if diff <= 0.0:
                log_ratio = -np.inf
            else:
                log_ratio = np.log(diff) - np.log(2.0)
        out.append(_SectorData(momenta, eps, eta, log_cosh, log_tanh,
                               log_cosh + log_ratio, sign))
    return tuple(out)


def log_partition_function(spec: TFIMSpec) -> float:
    a, b = _sector_data(spec)
    hi = max(a.log_z, b.log_z)
    return float(hi + np.log(np.exp(a.log_z - hi) + np.exp(b.log_z - hi)))


def partition_function(spec: TFIMSpec) -> float:
    """Z(beta) from the two-sector product formula; overflow-guarded via the
    log-domain accumulation (see ``log_partition_function`` for large beta N)."""
    return float(np.exp(log_partition_function(spec)))


def _sector_occupations(spec: TFIMSpec, sec: _SectorData) -> tuple[np.ndarray, np.ndarray]:
    """Sector-conditional <gamma^dag gamma> and <gamma gamma^dag> per mode."""
    beta = spec.beta
    eps = sec.energies
    n_modes = len(eps)
    occ = np.empty(n_modes)
    vac = np.empty(n_modes)
    finite = np.isfinite(sec.log_tanh)
    s_all = float(np.sum(sec.log_tanh[finite]))
    n_inf = int(np.sum(~finite))
    if sec.eta > 0:
        denom = 1.0 + (np.exp(s_all) if n_inf == 0 else 0.0)
    else:
        denom = -np.expm1(s_all) if n_inf == 0 else 1.0
    if denom <= 0.0:
        # twisted and direct products cancel to double precision: the sector
        # is frozen into its lowest one-fermion configuration
        occ[:] = 0.0
        occ[int(np.argmin(eps))] = 1.0
        vac[:] = 1.0 - occ
        return occ, vac
    for j in range(n_modes):
        if finite[j]:
            rest_inf = n_inf
            s_rest = s_all - sec.log_tanh[j]
        else:
            rest_inf = n_inf - 1
            s_rest = s_all
        if rest_inf > 0:
            num_occ = num_vac = 1.0
        elif sec.eta > 0:
            num_occ = -np.expm1(s_rest)
            num_vac = 1.0 + np.exp(s_rest)
        else:
            num_occ = 1.0 + np.exp(s_rest)
            num_vac = -np.expm1(s_rest)
        # e^{-x}/(2cosh x) = 1/(1 + e^{2x}) avoids overflow at large beta
        arg = 2.0 * beta * eps[j]
        with np.errstate(over="ignore"):
            occ[j] = num_occ / (denom * (1.0 + np.exp(arg)))
            vac[j] = num_vac / (denom * (1.0 + np.exp(-arg)))
    return occ, vac


def mode_occupations(spec: TFIMSpec) -> list[ModeData]:
    """Mode table over both sectors; ``occ + vac = 1`` holds per mode because
    the occupations are conditioned on the mode's own parity sector."""
    out = []
    for sec in _sector_data(spec):
        occ, vac = _sector_occupations(spec, sec)
        th = bogoliubov_angle(sec.momenta, spec.g)
        for j, k in enumerate(sec.momenta):
            out.append(ModeData(float(k), float(sec.energies[j]), float(th[j]),
                                float(occ[j]), float(vac[j]), sec.sign))
    return out


@dataclass(frozen=True)
class Correlators:
    x_avg: float
    zz_avg: float


def correlators(spec: TFIMSpec) -> Correlators:
    """Thermal averages <X_i> and <Z_i Z_{i+1}> from the mode sums.

    Sector contributions are weighted by the sector partition weights; the
    per-mode weights are cos^2 and sin^2 of half the Bogoliubov angle.
    """
    secs = _sector_data(spec)
    log_z = log_partition_function(spec)
    n = spec.n_sites
    x_avg = -1.0
    zz_avg = 0.0
    for sec in secs:
        w = float(np.exp(sec.log_z - log_z)) if np.isfinite(sec.log_z) else 0.0
        if w == 0.0:
            continue
        occ, vac = _sector_occupations(spec, sec)
        th = bogoliubov_angle(sec.momenta, spec.g)
        c2 = np.cos(th / 2) ** 2
        s2 = np.sin(th / 2) ** 2
        x_avg += w * (2.0 / n) * float(np.sum(c2 * vac + s2 * occ))
        hop = 2.0 * np.cos(sec.momenta) * (c2 * vac + s2 * occ)
        pair = np.sin(th) * np.sin(sec.momenta) * (occ - vac)
        zz_avg += w * (-(1.0 / n)) * float(np.sum(hop + pair))
    return Correlators(float(x_avg), float(zz_avg))


def thermal_hessian(spec: TFIMSpec) -> np.ndarray:
    """Diagonal 3x3 second-derivative form of the thermal state, in the
    generator order (iX, iY, iZ): diag(4<zz>, 4<zz> + 4g<x>, 4g<x>)."""
    c = correlators(spec)
    return np.diag([4.0 * c.zz_avg,
                    4.0 * c.zz_avg + 4.0 * spec.g * c.x_avg,
                    4.0 * spec.g * c.x_avg])


def ground_energy(spec: TFIMSpec) -> float:
    """Free-fermion ground energy: minus the even-sector mode-energy sum."""
    sectors = momentum_sectors(spec)
    return float(-np.sum(mode_energy(sectors.k_plus, spec.g)))


# ---------------------------------------------------------------------------
# dense operators and the exact-diagonalization oracle

def _require_dense(n: int) -> None:
    if n > MAX_DENSE_SITES:
        raise InvariantViolationError(
            f"dense TFIM operators limited to {MAX_DENSE_SITES} sites, got {n}")


def hamiltonian(spec: TFIMSpec) -> DenseOperator:
    """Dense periodic-chain Hamiltonian -sum Z_i Z_{i+1} - g sum X_i."""
    n = spec.n_sites
    _require_dense(n)
    d = 2**n
    h = np.zeros((d, d), dtype=complex)
    zz = np.kron(PAULI_Z.entries, PAULI_Z.entries)
    zz_op = DenseOperator(zz, HermitianTag.HERMITIAN)
    for i in range(n):
        h -= embed(zz_op, [i, (i + 1) % n], n).entries
        h -= spec.g * embed(PAULI_X, [i], n).entries
    return DenseOperator(h, HermitianTag.HERMITIAN)


def star_terms(spec: TFIMSpec, onsite_weight: float = 1.0) -> list[DenseOperator]:
    """Per-site terms -1/2 Z_i (Z_{i-1} + Z_{i+1}) - w g X_i.

    ``onsite_weight=1`` sums to the full Hamiltonian; ``onsite_weight=0.5``
    is the variant whose per-site terms are proportional to the site-local
    part of the Hamiltonian (used for product-state optimality checks).
    """
    n = spec.n_sites
    _require_dense(n)
    d = 2**n
    zz = DenseOperator(np.kron(PAULI_Z.entries, PAULI_Z.entries), HermitianTag.HERMITIAN)
    out = []
    for i in range(n):
        h = np.zeros((d, d), dtype=complex)
        h -= 0.5 * embed(zz, [(i - 1) % n, i], n).entries
        h -= 0.5 * embed(zz, [i, (i + 1) % n], n).entries
        h -= onsite_weight * spec.g * embed(PAULI_X, [i], n).entries
        out.append(DenseOperator(h, HermitianTag.HERMITIAN))
    return out


def star_instance(spec: TFIMSpec, onsite_weight: float = 1.0) -> NashInstance:
    """Single-qubit-block instance from the star decomposition."""
    return single_qubit_instance(star_terms(spec, onsite_weight), spec.n_sites)


def commutator_table(spec: TFIMSpec, site: int) -> tuple[DenseOperator, ...]:
    """Commutators of the site term with X, Y, Z on its own site.

    The results are asserted against the closed forms
    -i Y_i (Z_{i-1} + Z_{i+1}),  -2ig Z_i + i X_i (Z_{i-1} + Z_{i+1}),
    and 2ig Y_i.
    """
    n = spec.n_sites
    _require_dense(n)
    if not (0 <= site < n):
        raise InvariantViolationError(f"site {site} out of range")
    h = star_terms(spec)[site]
    got = tuple(commutator(h, embed(p, [site], n)) for p in (PAULI_X, PAULI_Y, PAULI_Z))
    zsum = (embed(PAULI_Z, [(site - 1) % n], n) + embed(PAULI_Z, [(site + 1) % n], n)).entries
    yi = embed(PAULI_Y, [site], n).entries
    xi = embed(PAULI_X, [site], n).entries
    zi = embed(PAULI_Z, [site], n).entries
    want = (-1j * yi @ zsum,
            -2j * spec.g * zi + 1j * xi @ zsum,
            2j * spec.g * yi)
    for g_op, w in zip(got, want):
        if np.max(np.abs(g_op.entries - w)) >= 1e-12:
            raise InvariantViolationError("commutator closed form mismatch")
    return got


class ExactThermalOracle:
    """Full-spectrum thermal reference for dense cross-checks.

    Thermal averages are ``sum_n w_n <n|O|n>`` with Boltzmann weights from the
    complete eigensystem; degenerate levels enter through the full set of
    orthonormal eigenvectors, which is equivalent to projector-weighted sums.
    """

    def __init__(self, n_sites: int, g: float):
        _require_dense(n_sites)
        self.n_sites = n_sites
        self.g = g
        h = hamiltonian(TFIMSpec(n_sites, g, 0.0))
        self.energies, vecs = np.linalg.eigh(h.entries)
        self.vectors = vecs

    def weights(self, beta: float) -> np.ndarray:
        w = np.exp(-beta * (self.energies - self.energies[0]))
        return w / np.sum(w)

    def log_partition_function(self, beta: float) -> float:
        shifted = np.sum(np.exp(-beta * (self.energies - self.energies[0])))
        return float(np.log(shifted) - beta * self.energies[0])

    def partition_function(self, beta: float) -> float:
        return float(np.exp(self.log_partition_function(beta)))

    def eigenbasis_diagonal(self, op: DenseOperator) -> np.ndarray:
        """<n|op|n> for every eigenvector; cache this for beta sweeps."""
        if op.dim != 2**self.n_sites:
            raise DimensionMismatchError("operator dimension mismatch")
        return np.einsum("in,ij,jn->n", self.vectors.conj(), op.entries,
                         self.vectors).real

    def thermal_average(self, op: DenseOperator, beta: float) -> float:
        return float(self.weights(beta) @ self.eigenbasis_diagonal(op))

    def gibbs_state(self, beta: float) -> DensityMatrix:
        w = self.weights(beta)
        rho = (self.vectors * w) @ self.vectors.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        return DensityMatrix(rho / np.trace(rho).real)

    def ground_state(self) -> StateVector:
        return StateVector.normalized(self.vectors[:, 0])
