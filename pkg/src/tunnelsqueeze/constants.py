"""Physical constants (CODATA 2018, exact SI values) used throughout the package."""

import math

#: elementary charge [C]
E_CHARGE = 1.602176634e-19
#: Planck constant [J s]
PLANCK = 6.62607015e-34
#: reduced Planck constant [J s]
HBAR = PLANCK / (2 * math.pi)
#: Boltzmann constant [J/K]
K_B = 1.380649e-23


def photon_energy(frequency):
    """hbar * omega in joules for a frequency given in hertz."""
    return PLANCK * frequency
