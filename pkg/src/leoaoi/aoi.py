"""
Freshness metrics over a per-frame ledger.

Age at the ground monitor grows linearly from zero at t = 0 and drops, when
the last fragment of frame i arrives at t'_i, to t'_i - t_i. Only delivered
frames reset the age. The time average is assembled from trapezoids

    Q_i = Y_i T_i + Y_i^2 / 2,      T_i = t'_i - t_i,   Y_i = t_i - t_{i-1},

plus a head term up to the first delivery and a tail term after the last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UndefinedAgeError
from .orbits import Constellation, GeodeticPoint, coverage_series

DELIVERED = "delivered"
LOST_COMM = "communication"
LOST_DETECTION = "detection"


@dataclass
class FrameRecord:
    index: int
    capture_time: float
    arrivals: tuple[float, ...]
    delivered: bool = True
    loss: str = ""
    capturer: int = -1
    t_distribute: float = 0.0
    t_process: float = 0.0
    t_route: float = 0.0
    t_downlink: float = 0.0

    @property
    def arrival(self) -> float:
        return aggregate_arrival(self.arrivals)

    @property
    def network_time(self) -> float:
        return self.arrival - self.capture_time

    @property
    def outcome(self) -> str:
        return DELIVERED if self.delivered else self.loss


@dataclass
class AoiSummary:
    aoi_avg: float | None
    paoi_avg: float | None
    coverage: float
    delivered: int
    lost_comm: int
    lost_detection: int
    horizon: float

    @property
    def lost(self) -> int:
        return self.lost_comm + self.lost_detection


def aggregate_arrival(arrivals: Iterable[float]) -> float:
    """Frame completion: the last fragment to reach the ground station."""
    arrivals = list(arrivals)
    if not arrivals:
        raise ValueError("need at least one arrival")
    return max(arrivals)


def trapezoid_area(network_time, interframe):
    if np.any(np.asarray(network_time) < 0) or np.any(np.asarray(interframe) < 0):
        raise ValueError("network and interframe times must be >= 0")
    return interframe * network_time + interframe**2 / 2.0


def _updates(records: Sequence[FrameRecord], horizon: float) -> tuple[np.ndarray, np.ndarray]:
    """Capture and arrival times of the updates that lower the age.

    Frames delivered after the horizon are ignored, as is a frame that lands
    after some later-captured frame has already arrived: it carries older
    information and leaves the age unchanged.
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    cap, arr = [], []
    for r in records:
        if r.delivered:
            a = r.arrival
            if a <= horizon:
                cap.append(r.capture_time)
                arr.append(a)
    if not cap:
        raise UndefinedAgeError("no frame delivered within the observation horizon")
    cap, arr = np.asarray(cap), np.asarray(arr)
    order = np.argsort(cap, kind="stable")
    cap, arr = cap[order], arr[order]
    later_first = np.minimum.accumulate(arr[::-1])[::-1]
    fresh = np.append(arr[:-1] < later_first[1:], True)
    return cap[fresh], arr[fresh]


def head_area(first_capture: float, first_arrival: float) -> float:
    """Area before the first trapezoid: age grows from zero until t'_1, less the
    triangle that the first trapezoid already accounts for."""
    return 0.5 * (first_arrival**2 - (first_arrival - first_capture) ** 2)


def tail_area(last_capture: float, horizon: float) -> float:
    return 0.5 * (horizon - last_capture) ** 2


def average_aoi(records: Sequence[FrameRecord], horizon: float) -> float:
    cap, arr = _updates(records, horizon)
    network = arr - cap
    interframe = np.diff(cap)
    total = (
        head_area(cap[0], arr[0])
        + float(np.sum(trapezoid_area(network[1:], interframe)))
        + tail_area(cap[-1], horizon)
    )
    return total / horizon


def average_paoi(records: Sequence[FrameRecord], horizon: float) -> float:
    cap, arr = _updates(records, horizon)
    peaks = np.concatenate([arr[:1], arr[1:] - cap[:-1]])
    return float(peaks.mean())


def discrete_age_oracle(records: Sequence[FrameRecord], horizon: float,
                        step: float) -> tuple[float, float]:
    """Brute-force age averages by sampling age(t) on a midpoint grid.

    A peak is the last sample before the freshest received capture changes;
    a frame arriving after a newer one is received but is not a peak. Returns
    ``(aoi, paoi)``; ``paoi`` is NaN when no update arrives.
    """
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    n = max(1, int(round(horizon / step)))
    t = (np.arange(n) + 0.5) * (horizon / n)
    gen = np.zeros_like(t)
    freshest = np.full(t.shape, -1)
    delivered = sorted((r for r in records if r.delivered and r.arrival <= horizon),
                       key=lambda r: r.capture_time)
    for rank, r in enumerate(delivered):
        after = t >= r.arrival
        gen[after] = np.maximum(gen[after], r.capture_time)
        freshest[after] = np.maximum(freshest[after], rank)
    age = t - gen
    peaks = np.flatnonzero(np.diff(freshest) > 0)
    if freshest[0] >= 0:
        peaks = np.concatenate([[0], peaks])
    paoi = float(age[peaks].mean()) if peaks.size else math.nan
    return float(age.mean()), paoi


def coverage_probability(constellation: Constellation, target: GeodeticPoint, beta_deg: float,
                         horizon: float, step: float) -> float:
    """Fraction of sampled epochs in [0, horizon) at which the target is capturable."""
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    covered, _ = coverage_series(constellation, target, beta_deg, np.arange(0.0, horizon, step))
    return float(covered.mean())


def summarize(records: Sequence[FrameRecord], horizon: float, coverage: float) -> AoiSummary:
    delivered = sum(r.delivered for r in records)
    try:
        aoi, paoi = average_aoi(records, horizon), average_paoi(records, horizon)
    except UndefinedAgeError:
        aoi = paoi = None
    return AoiSummary(
        aoi_avg=aoi,
        paoi_avg=paoi,
        coverage=coverage,
        delivered=delivered,
        lost_comm=sum(r.loss == LOST_COMM for r in records),
        lost_detection=sum(r.loss == LOST_DETECTION for r in records),
        horizon=horizon,
    )
