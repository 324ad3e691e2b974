"""Physical constants shared by every module (km, s, rad)."""

import math

MU_EARTH = 398600.4418          # km^3/s^2
R_EARTH = 6371.0                # km, spherical Earth
SIDEREAL_DAY = 86164.1          # s
OMEGA_EARTH = 2.0 * math.pi / SIDEREAL_DAY  # rad/s
SPEED_OF_LIGHT = 299792.458     # km/s
