"""qtherm: quantum thermal machines, metrology, and quantum batteries.

Units: hbar = k_B = 1 throughout; energies and temperatures share one
energy unit, times are in its inverse.
"""

__version__ = "0.1.0"
