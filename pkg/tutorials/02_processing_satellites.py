"""Effect of spreading each frame over more processing satellites.

A short horizon and a handful of targets keep this under a minute; the
acceptance suite runs the full-day version.

    python3 tutorials/02_processing_satellites.py
"""

from dataclasses import replace

from leoaoi import parse_scenario, sweep
from leoaoi.io import ResultTable
from leoaoi.svgplot import sweep_chart

config = replace(parse_scenario("starlink-20x20.scenario").config, horizon_s=20_000.0)
lossless = replace(config, links=replace(config.links, p_min=0.0, p_max=0.0))

for label, cfg in (("with link losses", config), ("loss-free", lossless)):
    rows = sweep(cfg, "processing_satellites", [1, 3, 5], n_runs=4, seed=0)
    print(label)
    for row in rows:
        r = row.result
        print(f"  n={row.value}: PAoI {r.mean('paoi_avg'):8.1f} s "
              f"+/- {r.stderr('paoi_avg'):.1f}, delivered {r.total('delivered')}, "
              f"lost on links {r.total('lost_comm')}")

table = ResultTable.from_sweep("processing_satellites", rows)
with open("processing.svg", "w") as f:
    f.write(sweep_chart(table, "processing satellites n"))
