"""Electron kinematics, grating geometry and the basic radiation scales.

Everything here is elementary algebra on beta, gamma and the grating
dispersion; the rest of the package builds on these values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import ELECTRON_MASS_KEV, LAMBDA_C


@dataclass(frozen=True)
class ElectronKinematics:
    """Monoenergetic mean motion: speed beta, Lorentz factor gamma."""

    beta: float
    gamma: float
    beta_gamma: float


@dataclass(frozen=True)
class Grating:
    """Periodic grating of `strips_n` strips with period `period_d` [m].

    `impact_h` is the distance between the electron trajectory and the
    grating surface [m]; it controls the exponential coupling envelope.
    """

    period_d: float
    strips_n: int
    impact_h: float = 0.0

    def __post_init__(self):
        if self.period_d <= 0.0:
            raise ValueError(f"grating period must be positive, got {self.period_d}")
        if int(self.strips_n) != self.strips_n or self.strips_n < 1:
            raise ValueError(f"strip count must be an integer >= 1, got {self.strips_n}")
        if self.impact_h < 0.0:
            raise ValueError(f"impact parameter must be >= 0, got {self.impact_h}")

    @property
    def length(self) -> float:
        """Total grating length L = N*d [m]."""
        return self.strips_n * self.period_d


@dataclass(frozen=True)
class DetectorGeometry:
    """Observation direction (theta, phi) and distance.

    `r = None` marks a far-field detector.  A finite distance must exceed
    the grating length for the finite-distance model to apply; that check
    lives in the routines that know the grating.
    """

    theta: float
    phi: float
    r: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi}")
        if self.r is not None and self.r <= 0.0:
            raise ValueError(f"finite detector distance must be positive, got {self.r}")

    @property
    def is_far_field(self) -> bool:
        return self.r is None


def kinematics_from_beta(beta: float) -> ElectronKinematics:
    """Build consistent (beta, gamma, beta*gamma) from the speed."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    gamma = 1.0 / math.sqrt(1.0 - beta * beta)
    return ElectronKinematics(beta=beta, gamma=gamma, beta_gamma=beta * gamma)


def kinematics_from_kinetic_energy_kev(t_kev: float) -> ElectronKinematics:
    """Build kinematics from the kinetic energy in keV (microscope units)."""
    if t_kev <= 0.0:
        raise ValueError(f"kinetic energy must be positive, got {t_kev} keV")
    gamma = 1.0 + t_kev / ELECTRON_MASS_KEV
    beta = math.sqrt(1.0 - 1.0 / (gamma * gamma))
    return ElectronKinematics(beta=beta, gamma=gamma, beta_gamma=beta * gamma)


def mean_momentum(kin: ElectronKinematics) -> np.ndarray:
    """Mean packet momentum beta*gamma/lambda_c along +z [rad/m]."""
    return np.array([0.0, 0.0, kin.beta_gamma / LAMBDA_C])


def sp_wavelength(grating: Grating, kin: ElectronKinematics, theta: float,
                  n: int = 1) -> float:
    """Dispersion wavelength d*(1/beta - cos(theta))/n of order n [m]."""
    if n < 1:
        raise ValueError(f"diffraction order must be >= 1, got {n}")
    return grating.period_d * (1.0 / kin.beta - math.cos(theta)) / n


def photon_coherence_width(kin: ElectronKinematics, lam: float) -> float:
    """Transverse coherence width beta*gamma*lambda of the virtual photon [m]."""
    if lam <= 0.0:
        raise ValueError(f"wavelength must be positive, got {lam}")
    return kin.beta_gamma * lam


def prewave_radius(sigma_b: float, lam: float) -> float:
    """Wave-zone onset distance sigma_b**2 / lambda for a source of width sigma_b."""
    if sigma_b <= 0.0:
        raise ValueError(f"source width must be positive, got {sigma_b}")
    if lam <= 0.0:
        raise ValueError(f"wavelength must be positive, got {lam}")
    return sigma_b * sigma_b / lam
