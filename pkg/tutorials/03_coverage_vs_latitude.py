"""Capture availability against target latitude for several plane counts.

    python3 tutorials/03_coverage_vs_latitude.py
"""

import numpy as np

from leoaoi import latitude_availability, parse_scenario
from leoaoi.engine import with_parameter
from leoaoi.orbits import coverage_central_angle

base = parse_scenario("planes-sweep.scenario").config
c = base.constellation
print(f"each satellite sees a cap of {coverage_central_angle(c.altitude_km, base.beta_deg):.2f} deg "
      f"central angle, so capture stops a little above {c.inclination_deg:.0f} deg latitude")

latitudes = np.arange(0.0, 71.0, 10.0)
print("lat  " + "  ".join(f"M={m:<4d}" for m in (10, 20, 30)))
curves = [latitude_availability(with_parameter(base, "planes", m), latitudes, longitudes=6, step_s=20.0)
          for m in (10, 20, 30)]
for i, lat in enumerate(latitudes):
    print(f"{lat:3.0f}  " + "  ".join(f"{curve[i]:.3f} " for curve in curves))
