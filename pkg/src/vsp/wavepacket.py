"""Momentum-space electron wave packets: Gaussian and vortex models.

The packet is defined by |psi(p)| * exp(i*phi(p)) with a Gaussian envelope of
width delta_p around the mean momentum.  The vortex model multiplies the
envelope by (p_perp/delta_p)**|l| and winds the phase as l*atan2(py, px).
An optional linear phase exp(-i*x0.p) models a transverse displacement and
is what the intrinsic-dipole removal adjusts.

Conventions: momenta in rad/m, sigma_perp = 1/delta_p, times expressed as
lengths (c*t in meters).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .constants import (AMPLITUDE_FLOOR, ELECTRON_MASS, FD_STEP_REL, LAMBDA_C,
                        WIGNER_IMAG_TOL, WIGNER_QCUT_REL)
from .errors import NumericalError
from .kinematics import ElectronKinematics
from .numerics import gauss_legendre, wrap_angle


class PacketKind(Enum):
    GAUSSIAN = "gaussian"
    VORTEX = "vortex"


def relativistic_energy(p: np.ndarray) -> np.ndarray:
    """Free dispersion sqrt(p^2 + m^2) in rad/m."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(np.sum(p * p, axis=-1) + ELECTRON_MASS ** 2)


def constant_energy(value: float = ELECTRON_MASS):
    """Energy law frozen at a constant (non-relativistic limit)."""
    def law(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.full(p.shape[:-1], value)
    return law


@dataclass(frozen=True, eq=False)
class PacketModel:
    """Immutable momentum-space packet; all operations are pure."""

    kind: PacketKind
    mean_momentum: np.ndarray
    delta_p: float
    oam_ell: int = 0
    phase_offset_x0: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "mean_momentum",
                           np.asarray(self.mean_momentum, dtype=float).reshape(3))
        object.__setattr__(self, "phase_offset_x0",
                           np.asarray(self.phase_offset_x0, dtype=float).reshape(3))
        if self.delta_p <= 0.0:
            raise ValueError(f"momentum width must be positive, got {self.delta_p}")
        if self.kind is PacketKind.GAUSSIAN and self.oam_ell != 0:
            raise ValueError("a Gaussian packet carries no orbital angular momentum")
        # log of the normalization constant: int d3p/(2pi)^3 |psi|^2 = 1
        log_norm = 0.5 * (math.log(8.0) + 1.5 * math.log(math.pi)
                          - 3.0 * math.log(self.delta_p)
                          - math.lgamma(abs(self.oam_ell) + 1))
        object.__setattr__(self, "_log_norm", log_norm)

    @property
    def sigma_perp(self) -> float:
        """Transverse coherence length 1/delta_p [m]."""
        return 1.0 / self.delta_p

    @property
    def fd_step(self) -> float:
        """Central-difference step used on this packet's momentum scale."""
        return FD_STEP_REL * self.delta_p

    def support_halfwidths(self) -> np.ndarray:
        """Half-widths of the momentum box resolving the packet's density."""
        ell = abs(self.oam_ell)
        perp = (math.sqrt(ell) + 6.0) * self.delta_p if ell else 8.0 * self.delta_p
        return np.array([perp, perp, 7.0 * self.delta_p])

    def log_amplitude(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        delta = p - self.mean_momentum
        log_a = self._log_norm - np.sum(delta * delta, axis=-1) / (2.0 * self.delta_p ** 2)
        ell = abs(self.oam_ell)
        if ell:
            p_perp = np.hypot(p[..., 0], p[..., 1])
            with np.errstate(divide="ignore"):
                log_a = log_a + ell * np.log(p_perp / self.delta_p)
        return log_a

    def amplitude(self, p: np.ndarray) -> np.ndarray:
        """|psi(p)|, vanishing on the vortex axis for l != 0."""
        return np.exp(self.log_amplitude(p))

    def density(self, p: np.ndarray) -> np.ndarray:
        """|psi(p)|^2, normalized to one under int d3p/(2pi)^3."""
        return np.exp(2.0 * self.log_amplitude(p))

    def phase(self, p: np.ndarray) -> np.ndarray:
        """Total phase: l*atan2(py, px) minus the linear offset x0.p."""
        p = np.asarray(p, dtype=float)
        phase = -(p @ self.phase_offset_x0)
        if self.oam_ell:
            phase = phase + self.oam_ell * np.arctan2(p[..., 1], p[..., 0])
        return phase

    def psi(self, p: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Complex amplitude, freely evolved by exp(-i*t*eps(p))."""
        phase = self.phase(p)
        if t != 0.0:
            phase = phase - t * relativistic_energy(p)
        return self.amplitude(p) * np.exp(1j * phase)


def make_gaussian_packet(mean_momentum, delta_p: float) -> PacketModel:
    """Normalized Gaussian packet; sigma_perp = 1/delta_p."""
    return PacketModel(kind=PacketKind.GAUSSIAN, mean_momentum=mean_momentum,
                       delta_p=delta_p)


def make_vortex_packet(mean_momentum, delta_p: float, ell: int) -> PacketModel:
    """Normalized vortex packet with winding number `ell` about +z."""
    if ell == 0:
        raise ValueError("ell = 0 has no vortex structure; use make_gaussian_packet")
    if int(ell) != ell:
        raise ValueError(f"ell must be an integer, got {ell}")
    mean = np.asarray(mean_momentum, dtype=float).reshape(3)
    if np.hypot(mean[0], mean[1]) > 1e-12 * max(abs(mean[2]), 1.0):
        raise ValueError("vortex mean momentum must point along +z")
    return PacketModel(kind=PacketKind.VORTEX, mean_momentum=mean,
                       delta_p=delta_p, oam_ell=int(ell))


def _require_vortex(packet: PacketModel, what: str):
    if packet.kind is not PacketKind.VORTEX or packet.oam_ell == 0:
        raise ValueError(f"{what} is defined for vortex packets only")


def spreading_time(packet: PacketModel) -> float:
    """Free-spreading timescale sigma_perp^2/(|l|*lambda_c), as a length [m]."""
    _require_vortex(packet, "spreading time")
    return packet.sigma_perp ** 2 / (abs(packet.oam_ell) * LAMBDA_C)


def rayleigh_length(packet: PacketModel, kin: ElectronKinematics) -> float:
    """Distance beta * spreading_time over which the width grows by sqrt(2)."""
    return kin.beta * spreading_time(packet)


def sigma_perp_at(packet: PacketModel, t: float) -> float:
    """Spread width sigma_perp * sqrt(1 + (t/t_d)^2) at time t [m]."""
    td = spreading_time(packet)
    return packet.sigma_perp * math.sqrt(1.0 + (t / td) ** 2)


@dataclass(frozen=True)
class PacketMoments:
    """Magnetic dipole [m], trace-free electric quadrupole [m^2], mean dipole [m]."""

    mu: np.ndarray
    q: np.ndarray
    d_mean: np.ndarray


def packet_moments(packet: PacketModel, t: float = 0.0) -> PacketMoments:
    """Closed-form multipole moments of a vortex packet at time t.

    mu = (l/2m) z_hat.  The intrinsic trace-free quadrupole of the vortex
    model is (|l|/3) * sigma_perp(t)^2 * diag(1/2, 1/2, -1); the |l|/3 scale
    is exact for the p_perp^|l| radial profile (validated against the
    brute-force quadrature oracle).
    """
    _require_vortex(packet, "packet_moments")
    mu = np.array([0.0, 0.0, 0.5 * packet.oam_ell * LAMBDA_C])
    scale = abs(packet.oam_ell) / 3.0 * sigma_perp_at(packet, t) ** 2
    q = scale * np.diag([0.5, 0.5, -1.0])
    return PacketMoments(mu=mu, q=q, d_mean=mean_dipole(packet))


def _intrinsic_gradient_mean(packet: PacketModel,
                             n_perp: int = 48, n_z: int = 20) -> np.ndarray:
    """Density-weighted mean of the intrinsic phase gradient (no x0 term)."""
    if packet.oam_ell == 0:
        return np.zeros(3)
    from .numerics import _tensor_grid  # shared grid construction
    pts, w = _tensor_grid(packet, n_perp, n_z)
    dens = packet.density(pts)
    h = packet.fd_step
    ell = packet.oam_ell
    mean = np.zeros(3)
    norm = np.sum(w * dens)
    for i in range(2):  # the winding phase has no z dependence
        step = np.zeros(3)
        step[i] = h
        up = ell * np.arctan2(pts[:, 1] + step[1], pts[:, 0] + step[0])
        dn = ell * np.arctan2(pts[:, 1] - step[1], pts[:, 0] - step[0])
        mean[i] = np.sum(w * dens * wrap_angle(up - dn) / (2.0 * h)) / norm
    return mean


def mean_dipole(packet: PacketModel) -> np.ndarray:
    """Mean electric dipole -<dphi/dp> [m].

    The linear offset part contributes x0 exactly; the intrinsic winding
    phase is averaged by quadrature with wrap-safe central differences.
    """
    return packet.phase_offset_x0 - _intrinsic_gradient_mean(packet)


def remove_mean_dipole(packet: PacketModel) -> PacketModel:
    """Re-center the packet so the mean dipole vanishes (idempotent)."""
    g = _intrinsic_gradient_mean(packet)
    return dataclasses.replace(packet, phase_offset_x0=g)


# ---------------------------------------------------------------------------
# Wigner function
# ---------------------------------------------------------------------------

def _wigner_axis_nodes(packet: PacketModel, x: np.ndarray) -> list[int]:
    """Per-axis Gauss-Legendre node counts resolving exp(i*q*x)."""
    qc = WIGNER_QCUT_REL * packet.delta_p
    counts = []
    for xi in np.asarray(x, dtype=float):
        need = (qc * abs(xi) + 12.0) / 0.7
        n = max(32, 8 * math.ceil(need / 8.0))
        if n > 192:
            raise NumericalError(
                f"wigner evaluation point too far from the packet center "
                f"(|x_i| = {abs(xi):.3e} m) for the quadrature budget")
        counts.append(n)
    return counts


def wigner_batch(packet: PacketModel, x, pts, t: float = 0.0) -> np.ndarray:
    """Wigner values n(x, p, t) for one x and a batch of momenta `pts`.

    Truncated autocorrelation integral over |q_i| <= 8*delta_p on a tensor
    Gauss-Legendre grid; the imaginary residue must stay below 1e-8 of the
    real scale or a NumericalError is raised.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    qc = WIGNER_QCUT_REL * packet.delta_p
    nx, ny, nz = _wigner_axis_nodes(packet, x)
    gx, wx = gauss_legendre(nx, -qc, qc)
    gy, wy = gauss_legendre(ny, -qc, qc)
    gz, wz = gauss_legendre(nz, -qc, qc)
    qx, qy, qz = np.meshgrid(gx, gy, gz, indexing="ij")
    q = np.stack([qx.ravel(), qy.ravel(), qz.ravel()], axis=-1)
    wq = (wx[:, None, None] * wy[None, :, None] * wz[None, None, :]).ravel()
    phase_x = np.exp(1j * (q @ x)) * wq

    acc = np.zeros(pts.shape[0], dtype=complex)
    chunk = max(1, 2_000_000 // pts.shape[0])
    for start in range(0, q.shape[0], chunk):
        qs = q[start:start + chunk]
        plus = pts[None, :, :] + 0.5 * qs[:, None, :]
        minus = pts[None, :, :] - 0.5 * qs[:, None, :]
        prod = np.conj(packet.psi(minus, t)) * packet.psi(plus, t)
        acc += phase_x[start:start + chunk] @ prod
    acc /= (2.0 * math.pi) ** 3

    scale = max(np.max(np.abs(acc.real)), 1e-300)
    bad = np.abs(acc.imag) > WIGNER_IMAG_TOL * np.maximum(np.abs(acc.real), 1e-6 * scale)
    if np.any(bad):
        k = int(np.argmax(np.abs(acc.imag)))
        raise NumericalError(
            f"wigner imaginary residue too large: {acc.imag[k]:.3e} vs real "
            f"{acc.real[k]:.3e}")
    return acc.real


def wigner(packet: PacketModel, x, p, t: float = 0.0) -> float:
    """Wigner function n(x, p, t) at a single phase-space point."""
    return float(wigner_batch(packet, x, [np.asarray(p, dtype=float)], t)[0])


def wigner_weights_t0(packet: PacketModel, pts: np.ndarray,
                      n_q: int = 48) -> np.ndarray:
    """n(0, p, 0) on a batch of momenta via the exact transverse/longitudinal
    factorization of the packet family.

    At t = 0 the packet separates as psi_T(px, py) * psi_z(pz), so the
    autocorrelation integral splits into a 2-D and a 1-D quadrature.  Agrees
    with `wigner_batch` (cross-checked in the tests); used on the large
    momentum grids of the incoherent line averaging where the full 3-D rule
    would be wasteful.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    qc = WIGNER_QCUT_REL * packet.delta_p
    dp2 = 2.0 * packet.delta_p ** 2
    ell = abs(packet.oam_ell)
    x0 = packet.phase_offset_x0
    mean = packet.mean_momentum

    def psi_t(px, py):
        log_a = -((px - mean[0]) ** 2 + (py - mean[1]) ** 2) / dp2
        phase = -(x0[0] * px + x0[1] * py)
        if ell:
            with np.errstate(divide="ignore"):
                log_a = log_a + ell * np.log(np.hypot(px, py) / packet.delta_p)
            phase = phase + packet.oam_ell * np.arctan2(py, px)
        return np.exp(log_a + 1j * phase)

    gq, wq = gauss_legendre(n_q, -qc, qc)
    # transverse factor: int d2q/(2pi)^2 psi_T*(pT - q/2) psi_T(pT + q/2)
    qxg, qyg = np.meshgrid(gq, gq, indexing="ij")
    qx, qy = qxg.ravel(), qyg.ravel()
    w2 = (wq[:, None] * wq[None, :]).ravel()
    px, py = pts[:, 0], pts[:, 1]
    plus = psi_t(px[None, :] + 0.5 * qx[:, None], py[None, :] + 0.5 * qy[:, None])
    minus = psi_t(px[None, :] - 0.5 * qx[:, None], py[None, :] - 0.5 * qy[:, None])
    n_t = (w2 @ (np.conj(minus) * plus)).real / (2.0 * math.pi) ** 2

    # longitudinal factor: Gaussian autocorrelation in qz,
    # |psi_z(pz-q/2)| * |psi_z(pz+q/2)| = exp(-dz^2/dp^2 - q^2/(4 dp^2))
    pz = pts[:, 2] - mean[2]
    gz = np.exp(-(2.0 * pz[None, :] ** 2 + 0.5 * gq[:, None] ** 2) / dp2
                ) * np.cos(gq[:, None] * x0[2])
    n_z = (wq @ gz) / (2.0 * math.pi)
    # overall normalization of |psi|^2 (the transverse/longitudinal split
    # above carries the envelope without the global constant)
    return math.exp(2.0 * packet._log_norm) * n_t * n_z


# ---------------------------------------------------------------------------
# Curvature matrix
# ---------------------------------------------------------------------------

def curvature_matrix(packet: PacketModel, p, epsilon_of_p=None) -> np.ndarray:
    """Second-derivative matrix 2*eps*(F * d2F - dF dF) of F = |psi|/sqrt(2*eps).

    Central finite differences with step fd_step; `epsilon_of_p` defaults to
    the relativistic dispersion.  Raises ValueError outside the numerically
    resolved support of the packet.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    eps = epsilon_of_p or relativistic_energy
    if packet.amplitude(p) < AMPLITUDE_FLOOR:
        raise ValueError("momentum point lies outside the resolved packet support")

    def big_psi(point):
        return packet.amplitude(point) / math.sqrt(2.0 * float(eps(point)))

    h = packet.fd_step
    f0 = big_psi(p)
    grad = np.empty(3)
    hess = np.empty((3, 3))
    shifts = np.eye(3) * h
    for i in range(3):
        fp, fm = big_psi(p + shifts[i]), big_psi(p - shifts[i])
        grad[i] = (fp - fm) / (2.0 * h)
        hess[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
    for i in range(3):
        for j in range(i + 1, 3):
            fpp = big_psi(p + shifts[i] + shifts[j])
            fpm = big_psi(p + shifts[i] - shifts[j])
            fmp = big_psi(p - shifts[i] + shifts[j])
            fmm = big_psi(p - shifts[i] - shifts[j])
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
    eps0 = float(eps(p))
    return 2.0 * eps0 * (f0 * hess - np.outer(grad, grad))
