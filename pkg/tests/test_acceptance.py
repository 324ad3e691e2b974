"""
Acceptance checks, one pass/fail line per criterion.

    python3 tests/test_acceptance.py      # prints the lines
    pytest tests/test_acceptance.py -v    # same checks as tests; lines also in the summary

Criterion 6 runs 20-target Monte Carlo sweeps over full sidereal days and
takes several minutes on one core; it uses every available CPU.
"""

from __future__ import annotations

import itertools
import math
import os
import sys
import time
from dataclasses import replace

import networkx as nx
import numpy as np
import pytest

from leoaoi.aoi import (FrameRecord, average_aoi, average_paoi, coverage_probability,
                        discrete_age_oracle, trapezoid_area)
from leoaoi.config import parse_scenario
from leoaoi.constants import SIDEREAL_DAY
from leoaoi.engine import WATER_BOXES, LatLonBox, ScenarioConfig, monte_carlo, run_scenario, sample_target, with_parameter
from leoaoi.io import ledger_csv
from leoaoi.links import LinkModel, packet_loss_prob
from leoaoi.orbits import ConstellationSpec, GeodeticPoint, build_constellation, coverage_central_angle, coverage_series, orbital_period
from leoaoi.tasks import ComputeModel, FrameModel, compression_factor, processing_time
from leoaoi.topology import TorusGrid, min_hop_path

RESULTS: dict[str, tuple[bool, str]] = {}
RUNS_PER_POINT = 20
WORKERS = os.cpu_count() or 1
MID_LATITUDE = (35.0, 55.0)


def report(name: str, passed: bool, detail: str) -> bool:
    RESULTS[name] = (passed, detail)
    print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}", flush=True)
    return passed


# ---------------------------------------------------------------- criterion 1

def criterion_1():
    rho = compression_factor(391.43e3 * 8, 2, 67.2)
    ok_rho = abs(rho / 23299.4 - 1) <= 5e-4
    model = LinkModel(d_min_km=744.0, d_max_km=2232.0)
    ok_loss = packet_loss_prob(0.0, model) == model.p_min and packet_loss_prob(1e6, model) == model.p_max
    t = processing_time(5.96e8, 374.2, ComputeModel())
    ok_proc = abs(t / 15.49 - 1) <= 1e-3
    rng = np.random.default_rng(0)
    T, Y = rng.uniform(0, 1e4, 10_000), rng.uniform(0, 1e4, 10_000)
    err = np.abs(trapezoid_area(T, Y) - (0.5 * (T + Y) ** 2 - 0.5 * T**2)) / (T + Y) ** 2
    ok_trap = float(err.max()) <= 8 * np.finfo(float).eps
    detail = (f"rho={rho:.2f} (ref 23299.4), P(0)={packet_loss_prob(0.0, model)}, "
              f"P(1e6 km)={packet_loss_prob(1e6, model)}, T_proc={t:.4f} s, "
              f"max trapezoid rel err={err.max():.1e}")
    return report("1 equation units", ok_rho and ok_loss and ok_proc and ok_trap, detail)


# ---------------------------------------------------------------- criterion 2

def random_ledger(rng, horizon):
    n = int(rng.integers(1, 15))
    caps = np.sort(rng.choice(np.arange(0.0, horizon * 0.9, 0.25), n, replace=False))
    recs = []
    for i, t in enumerate(caps):
        gap = (caps[i + 1] if i + 1 < n else horizon) - t
        recs.append(FrameRecord(i + 1, float(t), (float(t + rng.uniform(0.3, max(0.6, 1.2 * gap))),),
                                bool(rng.random() < 0.85)))
    first = recs[0]
    first.delivered = True
    first.arrivals = (min(first.arrivals[0], horizon),)
    return recs


def criterion_2():
    rng = np.random.default_rng(2024)
    worst = 0.0
    n = 120
    for _ in range(n):
        horizon = float(rng.uniform(50, 400))
        recs = random_ledger(rng, horizon)
        aoi, paoi = discrete_age_oracle(recs, horizon, 0.01)
        worst = max(worst, abs(aoi / average_aoi(recs, horizon) - 1),
                    abs(paoi / average_paoi(recs, horizon) - 1))
    return report("2 AoI oracle equivalence", worst <= 5e-3,
                  f"{n} random ledgers, worst relative gap {100 * worst:.3f}% (limit 0.5%)")


# ---------------------------------------------------------------- criterion 3

def criterion_3():
    checked, bad = 0, 0
    for m, n, seed in ((5, 5, 0), (5, 5, 1), (6, 6, 0), (6, 6, 1)):
        grid = TorusGrid(m, n)
        g = nx.Graph()
        for p, s in itertools.product(range(m), range(n)):
            g.add_edge((p, s), (p, (s + 1) % n))
            g.add_edge((p, s), ((p + 1) % m, s))
        pos = np.random.default_rng(seed).normal(size=(grid.size, 3)) * 1500.0
        for a, b in itertools.product(range(grid.size), repeat=2):
            src, dst = grid.sat_id(a), grid.sat_id(b)
            path = min_hop_path(src, dst, pos, grid)
            candidates = list(nx.all_shortest_paths(g, tuple(src), tuple(dst)))
            best = min(sum(np.linalg.norm(pos[grid.index(*u)] - pos[grid.index(*v)])
                           for u, v in zip(c, c[1:])) for c in candidates)
            hops_ok = path.hops == len(candidates[0]) - 1
            dist_ok = math.isclose(path.total_distance, best, rel_tol=1e-9, abs_tol=1e-9)
            checked += 1
            bad += not (hops_ok and dist_ok)
    return report("3 routing oracle", bad == 0,
                  f"{checked} src/dst pairs on 5x5 and 6x6 tori, {bad} mismatches")


# ---------------------------------------------------------------- criterion 4

def criterion_4():
    period = orbital_period(550.0)
    lam = coverage_central_angle(550.0, 50.0)
    c = build_constellation(ConstellationSpec(20, 20, 550.0, 53.0))
    times = np.arange(0.0, SIDEREAL_DAY, 10.0)
    covered_any = False
    lats = [59.6, 62.0, 70.0, 80.0, 90.0]
    for lat in lats + [-x for x in lats]:
        for lon in np.arange(-180.0, 180.0, 15.0):
            covered, _ = coverage_series(c, GeodeticPoint(lat, lon), 50.0, times)
            covered_any |= bool(covered.any())
    ok = abs(period - 5730.6) <= 0.5 and abs(lam - 6.33) <= 0.05 and not covered_any
    return report("4 geometry", ok,
                  f"period={period:.2f} s, central angle={lam:.3f} deg, "
                  f"capture beyond 59.5 deg: {'yes' if covered_any else 'none'}")


# ---------------------------------------------------------------- criterion 5

def criterion_5():
    f = FrameModel()
    x = f.frame_bits
    reduced = x / f.compression
    reduction = 1 - reduced / x
    eq2 = f.semantic_bits
    ok = (abs(x / 2.98e9 - 1) <= 0.01 and round(reduced / 1e3, 1) == 127.9
          and round(100 * reduction, 3) == 99.996)
    return report("5 size reduction", ok,
                  f"x={x / 1e9:.4f} Gb, x/rho={reduced / 1e3:.2f} kb ({100 * reduction:.4f}% reduction); "
                  f"with the vessel fraction alpha the routed payload is x*alpha/rho={eq2 / 1e3:.2f} kb, "
                  f"so the 127.9 kb figure omits alpha")


# ---------------------------------------------------------------- criterion 6

_MC_CACHE: dict = {}


def mc_point(config: ScenarioConfig):
    key = config.digest()
    if key not in _MC_CACHE:
        started = time.perf_counter()
        _MC_CACHE[key] = monte_carlo(config, RUNS_PER_POINT, seed=config.seed, workers=WORKERS)
        _MC_CACHE[key].elapsed = time.perf_counter() - started
    return _MC_CACHE[key]


def baseline() -> ScenarioConfig:
    return parse_scenario("starlink-20x20.scenario").config


def _fmt(values, digits=1):
    return "[" + ", ".join(f"{v:.{digits}f}" for v in values) + "]"


def mid_latitude_targets(count: int, seed: int = 7):
    lo, hi = MID_LATITUDE
    boxes = []
    for b in WATER_BOXES:
        for a, z in ((max(b.lat_min, lo), min(b.lat_max, hi)), (max(b.lat_min, -hi), min(b.lat_max, -lo))):
            if a < z:
                boxes.append(LatLonBox(a, z, b.lon_min, b.lon_max))
    rng = np.random.default_rng(seed)
    return [sample_target(boxes, rng) for _ in range(count)]


def criterion_6a():
    base = baseline()
    cfg = with_parameter(base, "sats_per_plane", 22)
    ms = [10, 15, 20, 25, 30]
    pts = [mc_point(with_parameter(cfg, "planes", m)) for m in ms]
    pm = [p.mean("coverage") for p in pts]
    paoi = [p.mean("paoi_avg") for p in pts]
    pm_ok = all(b >= a for a, b in zip(pm, pm[1:]))
    paoi_ok = all(b <= a for a, b in zip(paoi, paoi[1:]))
    shell = build_constellation(with_parameter(cfg, "planes", 20).constellation)
    mid = [coverage_probability(shell, t, cfg.beta_deg, cfg.horizon_s, cfg.step_s)
           for t in mid_latitude_targets(40)]
    mid_ok = float(np.mean(mid)) >= 0.99
    detail = (f"N=22, M={ms}: P_m={_fmt(pm, 3)} ({'non-decreasing' if pm_ok else 'NOT monotone'}), "
              f"PAoI={_fmt(paoi)} s ({'non-increasing' if paoi_ok else 'NOT non-increasing'}); "
              f"M=20 mean P_m over 40 water targets with |lat| in {list(MID_LATITUDE)} = "
              f"{np.mean(mid):.3f} (need >= 0.99)")
    return report("6a planes sweep", pm_ok and paoi_ok and mid_ok, detail)


def criterion_6b():
    base = baseline()
    ns = [16, 18, 20, 22]
    pts = [mc_point(with_parameter(base, "sats_per_plane", n)) for n in ns]
    paoi = [p.mean("paoi_avg") for p in pts]
    se = [p.stderr("paoi_avg") for p in pts]
    ok = all(paoi[k + 1] - paoi[k] <= math.hypot(se[k], se[k + 1]) for k in range(len(ns) - 1))
    return report("6b sats-per-plane sweep", ok,
                  f"M=20, N={ns}: PAoI={_fmt(paoi)} s, stderr={_fmt(se)} s "
                  f"(each step may rise by at most the combined stderr)")


def criterion_6c():
    base = baseline()
    lossless = replace(base, links=replace(base.links, p_min=0.0, p_max=0.0))
    free = [mc_point(with_parameter(lossless, "processing_satellites", n)).mean("paoi_avg") for n in (1, 5)]
    lossy_pts = [mc_point(with_parameter(base, "processing_satellites", n)) for n in (1, 5)]
    lossy = [p.mean("paoi_avg") for p in lossy_pts]
    free_ok = free[1] < free[0]
    lossy_ok = lossy[1] < 60.0 <= lossy[0]
    frames = lossy_pts[1].total("delivered") + lossy_pts[1].total("lost_comm") + lossy_pts[1].total("lost_detection")
    detail = (f"loss-free PAoI n=1: {free[0]:.1f} s, n=5: {free[1]:.1f} s "
              f"({'decreasing' if free_ok else 'NOT decreasing'}); with losses n=1: {lossy[0]:.1f} s, "
              f"n=5: {lossy[1]:.1f} s (need n=5 < 60 <= n=1); n=5 lost "
              f"{lossy_pts[1].total('lost_comm')} of {frames} frames to link loss")
    return report("6c processing satellites", free_ok and lossy_ok, detail)


# ---------------------------------------------------------------- criterion 7

def criterion_7():
    scenario = parse_scenario("starlink-20x20.scenario")
    texts = [ledger_csv(run_scenario(scenario.config, seed=7).records) for _ in range(2)]
    other = ledger_csv(run_scenario(scenario.config, seed=8).records)
    ok = texts[0] == texts[1] and texts[0] != other
    return report("7 determinism", ok,
                  f"two seed-7 runs give {'identical' if texts[0] == texts[1] else 'DIFFERENT'} ledgers "
                  f"({len(texts[0])} bytes); seed 8 differs: {texts[0] != other}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6a, criterion_6b, criterion_6c, criterion_7]


@pytest.mark.parametrize("check", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(check):
    assert check(), RESULTS[next(reversed(RESULTS))][1]


def main() -> int:
    started = time.perf_counter()
    outcomes = [check() for check in CRITERIA]
    mc_time = sum(getattr(r, "elapsed", 0.0) for r in _MC_CACHE.values())
    print(f"{sum(outcomes)}/{len(outcomes)} criteria passed in {time.perf_counter() - started:.0f} s "
          f"(Monte Carlo {mc_time:.0f} s on {WORKERS} worker(s))")
    return 0 if all(outcomes) else 1


if __name__ == "__main__":
    sys.exit(main())
