"""Unit-conversion constants (Hartree atomic units are used internally)."""

# 1 Hartree in electron volts.
HARTREE_EV = 27.211386245988

# 1 Bohr radius in nanometers.
BOHR_RADIUS_NM = 0.052917721
