"""Physical constants (CODATA 2018, via scipy) shared by every unit conversion."""

from scipy import constants as _c

E_CHARGE = _c.e
HBAR = _c.hbar
PLANCK = _c.h
K_B = _c.k
FLUX_QUANTUM = _c.h / (2 * _c.e)
# reduced flux quantum hbar/2e = Phi0/2pi
PHI0_RED = _c.hbar / (2 * _c.e)

TWO_PI = 2 * _c.pi
