"""Shared numerical kernels: adaptive quadrature, Gauss rules, finite
differences, bracketed peak search, and the brute-force oracles used to
validate the closed-form packet moments.

The oracles live here so the physics modules never import test scaffolding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NumericalError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be >= 10")


def _normalize_box(box):
    box = tuple(box)
    if len(box) == 2 and np.isscalar(box[0]):
        box = (box,)
    if not 1 <= len(box) <= 3:
        raise ValueError(f"box must have 1 to 3 dimensions, got {len(box)}")
    return tuple((float(a), float(b)) for a, b in box)


def _integrate_real(f, box, spec):
    dim = len(box)
    opts = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                limit=spec.max_subdivisions)
    if dim == 1:
        (a, b), = box
        value, err = integrate.quad(f, a, b, **opts)
    elif dim == 2:
        (ax, bx), (ay, by) = box
        value, err = integrate.dblquad(
            lambda y, x: f(x, y), ax, bx, ay, by,
            epsabs=spec.abs_tol, epsrel=spec.rel_tol)
    else:
        (ax, bx), (ay, by), (az, bz) = box
        value, err = integrate.tplquad(
            lambda z, y, x: f(x, y, z), ax, bx, ay, by, az, bz,
            epsabs=spec.abs_tol, epsrel=spec.rel_tol)
    return value, err


def integrate_adaptive(f, box, spec: QuadratureSpec | None = None):
    """Adaptively integrate `f` over an axis-aligned box in 1 to 3 dims.

    Returns (value, error_estimate).  Complex-valued integrands are split
    into real and imaginary parts.  Raises NumericalError when the error
    estimate fails the requested tolerance; the exception carries the best
    estimate.
    """
    spec = spec or QuadratureSpec()
    box = _normalize_box(box)

    probe = f(*(0.5 * (a + b) for a, b in box))
    if np.iscomplexobj(probe) or isinstance(probe, complex):
        re, re_err = _integrate_real(lambda *x: f(*x).real, box, spec)
        im, im_err = _integrate_real(lambda *x: f(*x).imag, box, spec)
        value = complex(re, im)
        err = math.hypot(re_err, im_err)
    else:
        value, err = _integrate_real(f, box, spec)

    if not np.isfinite(err) or err > spec.rel_tol * abs(value) + 100.0 * spec.abs_tol:
        raise NumericalError(
            f"quadrature did not converge: value={value!r}, error={err!r}, "
            f"box={box}")
    return value, err


@lru_cache(maxsize=256)
def _leggauss_cached(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_legendre(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _leggauss_cached(n)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


@lru_cache(maxsize=64)
def gauss_hermite(n: int):
    """Gauss-Hermite nodes and weights for the weight exp(-t**2)."""
    return np.polynomial.hermite.hermgauss(n)


def wrap_angle(x):
    """Wrap angle differences into (-pi, pi], elementwise."""
    return np.mod(np.asarray(x) + math.pi, 2.0 * math.pi) - math.pi


def central_gradient(f, x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference gradient of a scalar field at point x."""
    x = np.asarray(x, dtype=float)
    grad = np.empty(x.size)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad


def find_peak(f, interval, tol: float = 1e-4):
    """Golden-section search for a local maximum of `f` on a bracketed interval.

    Returns (argmax, max).  Raises NumericalError when the function is flat
    over the interval (no resolvable peak).
    """
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ValueError(f"invalid interval {interval}")
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    f_lo = min(f(a), f(b), fc, fd)
    f_hi = max(f(a), f(b), fc, fd)
    if not np.isfinite(f_hi) or f_hi - f_lo <= 1e-14 * max(1.0, abs(f_hi)):
        raise NumericalError(
            f"degenerate peak: function variation {f_hi - f_lo!r} over {interval}")
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x_star = 0.5 * (a + b)
    return x_star, f(x_star)


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def _tensor_grid(packet, n_perp: int, n_z: int):
    """Tensor Gauss-Legendre grid covering the packet's momentum support."""
    hw = packet.support_halfwidths()
    c = packet.mean_momentum
    gx, wx = gauss_legendre(n_perp, c[0] - hw[0], c[0] + hw[0])
    gy, wy = gauss_legendre(n_perp, c[1] - hw[1], c[1] + hw[1])
    gz, wz = gauss_legendre(n_z, c[2] - hw[2], c[2] + hw[2])
    px, py, pz = np.meshgrid(gx, gy, gz, indexing="ij")
    pts = np.stack([px.ravel(), py.ravel(), pz.ravel()], axis=-1)
    w = (wx[:, None, None] * wy[None, :, None] * wz[None, None, :]).ravel()
    return pts, w


def _phase_gradient_grid(packet, pts: np.ndarray) -> np.ndarray:
    """Wrap-safe central-difference gradient of the full packet phase."""
    h = packet.fd_step
    grad = np.empty_like(pts)
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        dphi = wrap_angle(packet.phase(pts + step) - packet.phase(pts - step))
        grad[:, i] = dphi / (2.0 * h)
    return grad


def oracle_moment_quadrature(packet, moment_kind: str,
                             n_perp: int = 48, n_z: int = 24):
    """Direct momentum-space quadrature of a packet moment.

    `moment_kind` is one of:

    - "normalization": int d3p/(2pi)^3 |psi|^2 (should be 1),
    - "dipole": -<dphi/dp> (3-vector, meters),
    - "quadrupole": trace-free second moment of position, from the exact
      identity <x_i x_j> = int [d_i R d_j R + R^2 d_i phi d_j phi]
      with R = |psi(p)| (3x3 tensor, m^2).

    Bypasses every closed form; used to validate the analytic moments.
    """
    pts, w = _tensor_grid(packet, n_perp, n_z)
    dens = packet.density(pts)
    measure = 1.0 / (2.0 * math.pi) ** 3

    if moment_kind == "normalization":
        return float(np.sum(w * dens) * measure)

    if moment_kind == "dipole":
        grad = _phase_gradient_grid(packet, pts)
        return -measure * np.sum(w[:, None] * dens[:, None] * grad, axis=0)

    if moment_kind == "quadrupole":
        h = packet.fd_step
        amp_grad = np.empty_like(pts)
        for i in range(3):
            step = np.zeros(3)
            step[i] = h
            amp_grad[:, i] = (packet.amplitude(pts + step)
                              - packet.amplitude(pts - step)) / (2.0 * h)
        phase_grad = _phase_gradient_grid(packet, pts)
        d = -measure * np.sum(w[:, None] * dens[:, None] * phase_grad, axis=0)
        second = np.empty((3, 3))
        for i in range(3):
            for j in range(i, 3):
                integrand = (amp_grad[:, i] * amp_grad[:, j]
                             + dens * phase_grad[:, i] * phase_grad[:, j])
                second[i, j] = second[j, i] = measure * np.sum(w * integrand)
        second -= np.outer(d, d)
        return second - np.eye(3) * (np.trace(second) / 3.0)

    raise ValueError(f"unknown moment kind {moment_kind!r}")


def oracle_dense_z_average(z_max: float, z_r: float, n_strips: int):
    """Discrete vs continuum mean of (z/z_R)^2 along a grating of length z_max.

    Returns (discrete_mean, continuum_mean) with the discrete sites at
    m*z_max/n_strips, m = 0..n_strips-1.
    """
    if z_max <= 0.0:
        raise ValueError(f"z_max must be positive, got {z_max}")
    if n_strips < 1:
        raise ValueError(f"n_strips must be >= 1, got {n_strips}")
    d = z_max / n_strips
    m = np.arange(n_strips)
    discrete = float(np.mean((m * d) ** 2) / z_r ** 2)
    continuum = z_max ** 2 / (3.0 * z_r ** 2)
    return discrete, continuum
