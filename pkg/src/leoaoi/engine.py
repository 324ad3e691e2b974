"""
Event loop for one monitored target, Monte Carlo replication and sweeps.

One run walks the coverage time grid. Whenever the pipeline is idle and some
satellite can capture the target, the best-placed satellite takes a frame,
ships equal fragments to its helpers, every satellite processes its share
and routes the detections to the ground station through the ISL grid. The
next frame can only be taken once every fragment has been processed.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .aoi import LOST_COMM, LOST_DETECTION, AoiSummary, FrameRecord, summarize
from .constants import SIDEREAL_DAY
from .errors import ConfigError
from .links import LinkModel, legs_survive, route_time
from .orbits import (
    Constellation,
    ConstellationSpec,
    GeodeticPoint,
    build_constellation,
    coverage_series,
    ground_positions,
)
from .tasks import ComputeModel, FrameModel, fragment, processing_time, sample_complexity
from .topology import DOWNLINK, TorusGrid, adjacent_distance_bounds, ring_distance, select_gateways

SEQUENTIAL = "sequential"
PARALLEL = "parallel"


@dataclass(frozen=True)
class LatLonBox:
    """Latitude/longitude rectangle; ``lon_min > lon_max`` wraps across 180 deg."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self):
        if not -90 <= self.lat_min < self.lat_max <= 90:
            raise ConfigError(f"bad latitude range {self.lat_min}..{self.lat_max}", "lat_min")
        for v in (self.lon_min, self.lon_max):
            if not -180 <= v <= 180:
                raise ConfigError(f"longitude out of [-180, 180]: {v}", "lon_min")

    @property
    def lon_span(self) -> float:
        return (self.lon_max - self.lon_min) % 360.0 or 360.0

    @property
    def area_weight(self) -> float:
        """Proportional to the spherical area of the box."""
        lat = np.radians([self.lat_min, self.lat_max])
        return float((np.sin(lat[1]) - np.sin(lat[0])) * self.lon_span)

    def sample(self, rng: np.random.Generator) -> GeodeticPoint:
        lo, hi = np.sin(np.radians([self.lat_min, self.lat_max]))
        lat = math.degrees(math.asin(rng.uniform(lo, hi)))
        lon = (self.lon_min + rng.uniform(0.0, self.lon_span) + 180.0) % 360.0 - 180.0
        return GeodeticPoint(lat, lon)


WATER_BOXES = (
    LatLonBox(-50.0, 50.0, 150.0, -120.0),   # Pacific
    LatLonBox(-40.0, 55.0, -60.0, -10.0),    # Atlantic
    LatLonBox(-40.0, 20.0, 50.0, 100.0),     # Indian
)

LOS_ANGELES = GeodeticPoint(34.05, -118.24)


def sample_target(boxes: Sequence[LatLonBox], rng: np.random.Generator) -> GeodeticPoint:
    """Uniform point over the union of (disjoint) boxes."""
    w = np.array([b.area_weight for b in boxes])
    k = rng.choice(len(boxes), p=w / w.sum())
    return boxes[k].sample(rng)


@dataclass(frozen=True)
class ScenarioConfig:
    constellation: ConstellationSpec = ConstellationSpec(20, 20, 550.0, 53.0)
    beta_deg: float = 50.0
    ground_station: GeodeticPoint = LOS_ANGELES
    target: GeodeticPoint | None = None
    target_region: tuple[LatLonBox, ...] = WATER_BOXES
    frame: FrameModel = FrameModel()
    compute: ComputeModel = ComputeModel()
    links: LinkModel = LinkModel()
    processing_satellites: int = 5
    horizon_s: float = SIDEREAL_DAY
    step_s: float = 1.0
    seed: int = 0
    min_elevation_deg: float = 10.0
    distribution: str = SEQUENTIAL

    def __post_init__(self):
        if not 0 < self.beta_deg <= 180:
            raise ConfigError(f"beta_deg must be in (0, 180], got {self.beta_deg}", "beta_deg")
        if self.processing_satellites < 1:
            raise ConfigError("processing_satellites must be >= 1", "processing_satellites")
        if self.processing_satellites > self.constellation.size:
            raise ConfigError(
                f"processing_satellites ({self.processing_satellites}) exceeds constellation size",
                "processing_satellites",
            )
        if not self.horizon_s > 0:
            raise ConfigError(f"horizon_s must be > 0, got {self.horizon_s}", "horizon_s")
        if not 0 < self.step_s <= self.horizon_s:
            raise ConfigError(f"step_s must be in (0, horizon_s], got {self.step_s}", "step_s")
        if not 0 <= self.min_elevation_deg < 90:
            raise ConfigError("min_elevation_deg must be in [0, 90)", "min_elevation_deg")
        if self.distribution not in (SEQUENTIAL, PARALLEL):
            raise ConfigError(f"distribution must be {SEQUENTIAL!r} or {PARALLEL!r}",
                              "distribution")
        if self.target is None and not self.target_region:
            raise ConfigError("need a fixed target or a non-empty target region", "target_region")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ScenarioResult:
    summary: AoiSummary
    records: list[FrameRecord]
    target: GeodeticPoint
    seed: int
    run: int
    config_digest: str
    distance_bounds: tuple[float, float]
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def aoi_avg(self):
        return self.summary.aoi_avg

    @property
    def paoi_avg(self):
        return self.summary.paoi_avg

    @property
    def coverage(self) -> float:
        return self.summary.coverage


@lru_cache(maxsize=4096)
def _helper_order(planes: int, sats_per_plane: int, capturer: int, count: int) -> tuple[int, ...]:
    return tuple(helper_order(TorusGrid(planes, sats_per_plane), capturer, count))


def helper_order(grid: TorusGrid, capturer: int, count: int) -> list[int]:
    """The ``count`` satellites nearest to ``capturer`` on the grid.

    Ordered by hop count, then same-plane before cross-plane, then by
    plane offset and slot offset.
    """
    if count <= 0:
        return []
    m, n = grid.planes, grid.sats_per_plane
    p0, s0 = divmod(capturer, n)
    idx = np.arange(grid.size)
    p, s = np.divmod(idx, n)
    dp = (p - p0 + m // 2) % m - m // 2
    ds = (s - s0 + n // 2) % n - n // 2
    hops = ring_distance(p, p0, m) + ring_distance(s, s0, n)
    keys = np.lexsort((ds, dp, np.abs(dp), hops))
    keys = keys[keys != capturer]
    return [int(k) for k in keys[:count]]


def _legs(grid: TorusGrid, edges: Sequence[int], lengths: np.ndarray) -> list[tuple[str, float]]:
    return [(grid.edge_class(e), float(lengths[e])) for e in edges]


class _Run:
    """State shared by the frames of one run."""

    def __init__(self, config: ScenarioConfig, target: GeodeticPoint,
                 constellation: Constellation, links: LinkModel):
        self.cfg = config
        self.target = target
        self.const = constellation
        self.grid = TorusGrid.for_constellation(constellation)
        self.links = links
        self.frame_bits = int(round(config.frame.frame_bits))
        self.semantic_ratio = config.frame.vessel_fraction / config.frame.compression

    def gs_position(self, t):
        gs = self.cfg.ground_station
        return ground_positions(gs.latitude, gs.longitude, t)

    def distribute(self, t0: float, capturer: int, helpers: list[int], shares: list[int],
                   positions: np.ndarray):
        """Fragment reception times (relative to t0) and the legs each fragment crossed."""
        grid = self.grid
        lengths = None
        ready, legs_out = [0.0], [[]]
        tx_free = 0.0
        for h, bits in zip(helpers, shares[1:]):
            if grid.hops_between(capturer, h) == 1:
                k = list(grid.neighbor_table[capturer]).index(h)
                e = int(grid.edge_table[capturer, k])
                legs = [(grid.edge_class(e), float(np.linalg.norm(positions[h] - positions[capturer])))]
            else:
                if lengths is None:
                    lengths = grid.edge_lengths(positions)
                _, edges = grid.route(capturer, h, lengths)
                legs = _legs(grid, edges, lengths)
            first_tx = bits / self.links.rate(legs[0][0])
            start = tx_free if self.cfg.distribution == SEQUENTIAL else 0.0
            tx_free = start + first_tx
            ready.append(start + route_time(legs, bits, self.links))
            legs_out.append(legs)
        return ready, legs_out

    def route_to_ground(self, sources: list[int], times: np.ndarray, payloads: list[float]):
        """Per source: (wait for visibility, ISL legs, downlink leg, delay) or None."""
        out = [None] * len(sources)
        pending = list(range(len(sources)))
        wait = np.zeros(len(sources))
        horizon = self.cfg.horizon_s
        while pending:
            t = times[pending] + wait[pending]
            pos = self.const.positions(t)
            lengths = self.grid.edge_lengths(pos)
            gws = select_gateways(np.asarray(sources)[pending], pos, self.gs_position(t),
                                  self.cfg.min_elevation_deg, self.grid, lengths)
            still = []
            for j, k, gw in zip(range(len(pending)), pending, gws):
                if gw is None:
                    wait[k] += self.cfg.step_s
                    if times[k] + wait[k] <= horizon:
                        still.append(k)
                    continue
                _, edges = self.grid.route(sources[k], gw.index, lengths[j])
                isl = _legs(self.grid, edges, lengths[j])
                down = (DOWNLINK, gw.slant_range_km)
                delay = route_time(isl + [down], payloads[k], self.links)
                out[k] = (float(wait[k]), isl, down, delay)
            pending = still
        return out


def run_scenario(config: ScenarioConfig, seed: int | None = None, run: int = 0,
                 target: GeodeticPoint | None = None) -> ScenarioResult:
    """Simulate one target over the observation horizon.

    Deterministic in ``(config, seed, run)``: the target draw and the
    simulation use independent streams derived from ``[seed, run]``.
    """
    seed = config.seed if seed is None else seed
    target_ss, sim_ss = np.random.SeedSequence([seed, run]).spawn(2)
    if target is None:
        target = config.target or sample_target(config.target_region, np.random.default_rng(target_ss))
    rng = np.random.default_rng(sim_ss)

    constellation = build_constellation(config.constellation)
    links = config.links
    if links.d_min_km is None or links.d_max_km is None:
        bounds = isl_distance_bounds(constellation)
        links = links.with_distance_bounds(
            links.d_min_km if links.d_min_km is not None else bounds[0],
            links.d_max_km if links.d_max_km is not None else bounds[1],
        )
    state = _Run(config, target, constellation, links)

    times = np.arange(0.0, config.horizon_s, config.step_s)
    covered, best = coverage_series(constellation, target, config.beta_deg, times)
    coverage = float(covered.mean())
    # next covered grid index at or after each index
    nxt = np.where(covered, np.arange(times.size), times.size)
    nxt = np.minimum.accumulate(nxt[::-1])[::-1]

    n_proc = config.processing_satellites
    shares = fragment(state.frame_bits, n_proc)
    records: list[FrameRecord] = []
    k = 0
    while k < times.size and nxt[k] < times.size:
        j = int(nxt[k])
        t_cap = float(times[j])
        capturer = int(best[j])
        helpers = list(_helper_order(state.grid.planes, state.grid.sats_per_plane, capturer,
                                     n_proc - 1))
        sats = [capturer] + helpers

        ready, dist_legs = state.distribute(t_cap, capturer, helpers, shares,
                                            constellation.positions(t_cap))
        cycles = sample_complexity(rng, config.compute, size=n_proc)
        t_proc = processing_time(1.0, cycles, config.compute) * np.asarray(shares, dtype=float)
        done = t_cap + np.asarray(ready) + t_proc
        payloads = [b * state.semantic_ratio for b in shares]
        routes = state.route_to_ground(sats, done, payloads)

        arrivals, routed = [], True
        route_delays, downlink_delays = [], []
        leg_km, leg_bits = [], []
        for i in range(n_proc):
            for _, d in dist_legs[i]:
                leg_km.append(d)
                leg_bits.append(shares[i])
            if routes[i] is None:
                arrivals.append(math.inf)
                routed = False
                continue
            wait, isl, down, delay = routes[i]
            for _, d in isl + [down]:
                leg_km.append(d)
                leg_bits.append(payloads[i])
            arrivals.append(float(done[i] + wait + delay))
            route_delays.append(wait + delay)
            downlink_delays.append(route_time([down], payloads[i], links))
        # every traversal draws, even after an unroutable share, to keep streams aligned
        delivered_comm = legs_survive(rng, leg_km, leg_bits, links) and routed
        detected = bool(rng.random() < config.frame.recall)

        loss = "" if delivered_comm and detected else (LOST_COMM if not delivered_comm else LOST_DETECTION)
        records.append(FrameRecord(
            index=len(records) + 1,
            capture_time=t_cap,
            arrivals=tuple(arrivals),
            delivered=not loss,
            loss=loss,
            capturer=capturer,
            t_distribute=float(max(ready)),
            t_process=float(max(t_proc)),
            t_route=float(max(route_delays)) if route_delays else math.inf,
            t_downlink=float(max(downlink_delays)) if downlink_delays else math.inf,
        ))
        idle = float(done.max())
        k = max(j + 1, int(math.ceil((idle - 1e-9) / config.step_s)))

    summary = summarize(records, config.horizon_s, coverage)
    finite = [r for r in records if math.isfinite(r.t_route)]
    timing = {
        name: float(np.mean([getattr(r, attr) for r in finite])) if finite else math.nan
        for name, attr in (("distribute", "t_distribute"), ("process", "t_process"),
                           ("route", "t_route"), ("downlink", "t_downlink"))
    }
    return ScenarioResult(
        summary=summary,
        records=records,
        target=target,
        seed=seed,
        run=run,
        config_digest=config.digest(),
        distance_bounds=(links.d_min_km, links.d_max_km),
        timing=timing,
    )


def isl_distance_bounds(constellation: Constellation, samples: int = 360) -> tuple[float, float]:
    """ISL length range over one orbital period (relative geometry repeats each orbit)."""
    times = np.linspace(0.0, constellation.period, samples, endpoint=False)
    return adjacent_distance_bounds(constellation, times)


@dataclass
class MonteCarloResult:
    runs: list[ScenarioResult]

    def _values(self, attr: str) -> np.ndarray:
        vals = [getattr(r, attr) for r in self.runs]
        return np.array([v for v in vals if v is not None], dtype=float)

    def mean(self, attr: str) -> float:
        v = self._values(attr)
        return float(v.mean()) if v.size else math.nan

    def stderr(self, attr: str) -> float:
        v = self._values(attr)
        return float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan

    def total(self, attr: str) -> int:
        return int(sum(getattr(r.summary, attr) for r in self.runs))

    @property
    def undefined_age_runs(self) -> int:
        return sum(r.aoi_avg is None for r in self.runs)


def _run_one(args):
    config, seed, run = args
    return run_scenario(config, seed, run)


def monte_carlo(config: ScenarioConfig, n_runs: int, seed: int | None = None,
                workers: int = 1) -> MonteCarloResult:
    """Independent replications, each with its own target draw and random stream."""
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    seed = config.seed if seed is None else seed
    jobs = [(config, seed, r) for r in range(n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(j) for j in jobs]
    runs.sort(key=lambda r: r.run)
    return MonteCarloResult(runs)


SWEEP_PARAMETERS = ("planes", "sats_per_plane", "processing_satellites")


def with_parameter(config: ScenarioConfig, parameter: str, value) -> ScenarioConfig:
    if parameter in ("planes", "sats_per_plane"):
        spec = replace(config.constellation, **{parameter: int(value)})
        if spec.phasing >= spec.planes:
            spec = replace(spec, phasing=spec.phasing % spec.planes)
        return replace(config, constellation=spec)
    if parameter == "processing_satellites":
        return replace(config, processing_satellites=int(value))
    raise ConfigError(f"cannot sweep {parameter!r}; choose one of {SWEEP_PARAMETERS}", "sweep.parameter")


@dataclass
class SweepRow:
    value: float
    result: MonteCarloResult

    def as_dict(self) -> dict:
        r = self.result
        return {
            "value": self.value,
            "aoi_avg": r.mean("aoi_avg"),
            "aoi_stderr": r.stderr("aoi_avg"),
            "paoi_avg": r.mean("paoi_avg"),
            "paoi_stderr": r.stderr("paoi_avg"),
            "coverage": r.mean("coverage"),
            "delivered": r.total("delivered"),
            "lost_comm": r.total("lost_comm"),
            "lost_detect": r.total("lost_detection"),
        }


def sweep(config: ScenarioConfig, parameter: str, values: Sequence, n_runs: int,
          seed: int | None = None, workers: int = 1) -> list[SweepRow]:
    """One Monte Carlo point per value; all else fixed.

    Every point reuses the same seed, so the sampled targets are shared
    across the sweep. ISL distance bounds follow each constellation unless
    fixed in the link model.
    """
    if not len(values):
        raise ValueError("sweep needs at least one value")
    return [
        SweepRow(value, monte_carlo(with_parameter(config, parameter, value), n_runs, seed, workers))
        for value in values
    ]


def latitude_availability(config: ScenarioConfig, latitudes: Sequence[float],
                          longitudes: int = 12, step_s: float | None = None) -> np.ndarray:
    """Capture availability per latitude, averaged over evenly spaced longitudes."""
    if longitudes < 1:
        raise ValueError("need at least one longitude")
    step = config.step_s if step_s is None else step_s
    constellation = build_constellation(config.constellation)
    times = np.arange(0.0, config.horizon_s, step)
    lons = -180.0 + 360.0 * np.arange(longitudes) / longitudes
    out = np.empty(len(latitudes))
    for i, lat in enumerate(latitudes):
        out[i] = np.mean([
            coverage_series(constellation, GeodeticPoint(float(lat), float(lon)),
                            config.beta_deg, times)[0].mean()
            for lon in lons
        ])
    return out
