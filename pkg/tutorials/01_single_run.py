"""One simulated day on the 20x20 shell, followed frame by frame.

    python3 tutorials/01_single_run.py
"""

from dataclasses import replace

from leoaoi import GeodeticPoint, parse_scenario, run_scenario
from leoaoi.io import ledger_csv

scenario = parse_scenario("starlink-20x20.scenario")
config = replace(scenario.config, target=GeodeticPoint(30.0, -140.0))
result = run_scenario(config, seed=7)

s = result.summary
print(f"target {result.target}, capture probability {result.coverage:.3f}")
print(f"{len(result.records)} frames: {s.delivered} delivered, "
      f"{s.lost_comm} lost on links, {s.lost_detection} missed by the detector")
print(f"average AoI {s.aoi_avg:.1f} s, average peak AoI {s.paoi_avg:.1f} s")

# the first few frames: capture time, arrival at the ground station and delay
for r in result.records[:5]:
    print(f"frame {r.index}: captured {r.capture_time:.1f} s, "
          f"arrived {r.arrival:.1f} s, outcome {r.outcome}")

# the ledger holds everything needed to recompute both averages
with open("ledger.csv", "w") as f:
    f.write(ledger_csv(result.records))
