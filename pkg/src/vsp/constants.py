"""Physical constants and numerical thresholds shared across the package.

Unit conventions
----------------
All public inputs and outputs are SI: lengths in meters, angles in radians.
Internally we work in natural units (hbar = c = 1) with lengths in meters,
so momenta and angular frequencies carry rad/m and times are expressed as
lengths (c*t in meters).
"""

# Reduced Compton wavelength of the electron [m].  Single source of truth;
# every module reads it from here.
LAMBDA_C = 3.8616e-13

# Electron rest mass expressed as 1/LAMBDA_C [rad/m] in natural units.
ELECTRON_MASS = 1.0 / LAMBDA_C

# Electron rest energy [keV], used for kinetic-energy input conversion.
ELECTRON_MASS_KEV = 511.0

# O(1) coefficients of the order-of-magnitude multipole ratios.  The scaling
# laws fix only the parametric dependence; these set the prefactors and are
# recorded in every run manifest.
C_MU = 1.0
C_Q1 = 1.0

# Default margin applied to the upper strip-count bound of the feasibility
# window (physically sensible values lie in [0.1, 0.2]).
FEASIBILITY_MARGIN_DEFAULT = 0.15

# Amplitude floor below which a momentum-space point counts as outside the
# numerically resolved support of the packet.
AMPLITUDE_FLOOR = 1e-300

# Comb factor switches to its series expansion when |sin(psi/2)| drops
# below this threshold (removable singularity at resonance).
COMB_SINGULARITY_EPS = 1e-6

# Relative step of central finite differences on momentum-space amplitudes
# and phases, in units of the packet momentum width.
FD_STEP_REL = 1e-4

# Wigner quadrature cutoff |q| <= WIGNER_QCUT_REL * delta_p; beyond it the
# Gaussian envelope suppresses the autocorrelation below exp(-16).
WIGNER_QCUT_REL = 8.0

# Largest tolerated imaginary residue of a Wigner value, relative to the
# real part (the defining integral is real for conjugate-symmetric grids).
WIGNER_IMAG_TOL = 1e-8
