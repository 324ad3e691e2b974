"""
Command line entry point.

    leoaoi run SCENARIO [--seed S]
    leoaoi sweep SCENARIO
    leoaoi coverage SCENARIO --latitudes A:B:STEP
    leoaoi validate SCENARIO

SCENARIO is a path or the name of a bundled scenario. Outputs go to the
scenario's ``output.directory`` unless ``LEOAOI_OUTPUT_DIR`` is set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .config import Scenario, bundled_scenarios, dump_scenario, parse_scenario
from .engine import latitude_availability, run_scenario, sweep, with_parameter
from .errors import ConfigError
from .io import OutputSession, ResultTable, dumps_json, ledger_csv
from .svgplot import coverage_chart, sweep_chart

OUTPUT_ENV = "LEOAOI_OUTPUT_DIR"
EXIT_CONFIG = 2
EXIT_FAILURE = 1

log = logging.getLogger("leoaoi")

AXIS_LABELS = {
    "planes": "orbital planes M",
    "sats_per_plane": "satellites per plane N",
    "processing_satellites": "processing satellites n",
}


def output_dir(scenario: Scenario) -> str:
    return os.environ.get(OUTPUT_ENV) or scenario.output_dir


def parse_latitudes(text: str) -> np.ndarray:
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"--latitudes expects A:B:STEP, got {text!r}", "latitudes") from None
    if step <= 0 or b < a or not (-90 <= a <= 90 and -90 <= b <= 90):
        raise ConfigError(f"bad latitude range {text!r}", "latitudes")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(n)


def _summary_doc(scenario: Scenario, result) -> dict:
    s = result.summary
    return {
        "scenario": scenario.source,
        "config_digest": result.config_digest,
        "seed": result.seed,
        "run": result.run,
        "target": {"latitude_deg": result.target.latitude, "longitude_deg": result.target.longitude},
        "aoi_avg_s": s.aoi_avg,
        "paoi_avg_s": s.paoi_avg,
        "coverage": s.coverage,
        "frames": len(result.records),
        "delivered": s.delivered,
        "lost_comm": s.lost_comm,
        "lost_detect": s.lost_detection,
        "isl_distance_bounds_km": list(result.distance_bounds),
        "horizon_s": s.horizon,
    }


def cmd_run(args) -> int:
    scenario = parse_scenario(args.scenario)
    config = scenario.config if args.seed is None else replace(scenario.config, seed=args.seed)
    result = run_scenario(config)
    doc = _summary_doc(scenario, result)
    with OutputSession(output_dir(scenario)) as out:
        out.write("ledger.csv", ledger_csv(result.records))
        if "json" in scenario.formats:
            out.write("summary.json", dumps_json(doc))
    print(json.dumps(doc, indent=2))
    return 0


def cmd_sweep(args) -> int:
    scenario = parse_scenario(args.scenario)
    if scenario.sweep is None:
        raise ConfigError(f"{scenario.source} has no sweep block", "sweep")
    sw = scenario.sweep
    started = time.perf_counter()
    rows = sweep(scenario.config, sw.parameter, sw.values, sw.runs, workers=scenario.workers)
    table = ResultTable.from_sweep(sw.parameter, rows)
    with OutputSession(output_dir(scenario)) as out:
        if "csv" in scenario.formats:
            out.write("sweep.csv", table.to_csv())
        if "json" in scenario.formats:
            out.write("sweep.json", table.to_json())
        if "svg" in scenario.formats:
            out.write("sweep.svg", sweep_chart(table, AXIS_LABELS[sw.parameter]))
    sys.stdout.write(table.to_csv())
    log.info("sweep finished in %.1f s", time.perf_counter() - started)
    return 0


def cmd_coverage(args) -> int:
    scenario = parse_scenario(args.scenario)
    lats = parse_latitudes(args.latitudes)
    configs = {"": scenario.config}
    sw = scenario.sweep
    if sw is not None and sw.parameter in ("planes", "sats_per_plane"):
        key = "M" if sw.parameter == "planes" else "N"
        configs = {f"{key}={v}": with_parameter(scenario.config, sw.parameter, v) for v in sw.values}
    curves = {
        label or "availability": latitude_availability(cfg, lats, args.longitudes, args.step)
        for label, cfg in configs.items()
    }
    header = ["latitude_deg"] + list(curves)
    lines = [",".join(header)]
    for i, lat in enumerate(lats):
        lines.append(",".join([f"{lat:.6g}"] + [f"{c[i]:.6g}" for c in curves.values()]))
    text = "\n".join(lines) + "\n"
    with OutputSession(output_dir(scenario)) as out:
        if "csv" in scenario.formats:
            out.write("coverage.csv", text)
        if "json" in scenario.formats:
            out.write("coverage.json", dumps_json(
                {"latitude_deg": lats.tolist(), "curves": {k: v.tolist() for k, v in curves.items()}}))
        if "svg" in scenario.formats:
            out.write("coverage.svg", coverage_chart(lats.tolist(), {k: v.tolist() for k, v in curves.items()}))
    sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    scenario = parse_scenario(args.scenario)
    if args.print:
        sys.stdout.write(dump_scenario(scenario))
    else:
        print(f"{scenario.source}: ok ({scenario.config.constellation.planes}x"
              f"{scenario.config.constellation.sats_per_plane}, digest {scenario.config.digest()})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leoaoi", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    bundled = ", ".join(bundled_scenarios())

    p = sub.add_parser("run", help="simulate one run and write its frame ledger")
    p.add_argument("scenario", help=f"scenario path or bundled name ({bundled})")
    p.add_argument("--seed", type=int, help="override simulation.seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="Monte Carlo sweep described by the scenario's sweep block")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("coverage", help="capture availability versus latitude")
    p.add_argument("scenario")
    p.add_argument("--latitudes", required=True, metavar="A:B:STEP")
    p.add_argument("--longitudes", type=int, default=12, help="longitudes averaged per latitude")
    p.add_argument("--step", type=float, default=10.0, help="time step in seconds")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    p.add_argument("--print", action="store_true", help="print the scenario with defaults filled in")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        err = {"error": "config", "key": exc.key, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported as a structured failure
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        if args.verbose:
            raise
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
