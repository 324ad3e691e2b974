"""Link rates, transmission/propagation delay and distance-dependent packet loss."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import ConfigError
from .topology import DOWNLINK, INTER, INTRA, RoutePath

PER_HOP = "per-hop"
PER_PACKET = "per-packet"
LOSS_MODES = (PER_HOP, PER_PACKET)


@dataclass(frozen=True)
class LinkModel:
    """Link rates (bit/s) and loss law.

    ``d_min_km``/``d_max_km`` left as None are filled from the simulated
    constellation's ISL lengths by :meth:`with_distance_bounds`.
    """

    rate_intra_bps: float = 10e9
    rate_inter_bps: float = 1e9
    rate_downlink_bps: float = 500e6
    p_min: float = 0.001
    p_max: float = 0.1
    d_min_km: float | None = None
    d_max_km: float | None = None
    loss_mode: str = PER_HOP
    packet_bits: int = 12_000

    def __post_init__(self):
        for name in ("rate_intra_bps", "rate_inter_bps", "rate_downlink_bps", "packet_bits"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}", name)
        if not 0 <= self.p_min <= self.p_max <= 1:
            raise ConfigError(
                f"need 0 <= p_min <= p_max <= 1, got p_min={self.p_min}, p_max={self.p_max}",
                "p_min",
            )
        if self.loss_mode not in LOSS_MODES:
            raise ConfigError(f"loss_mode must be one of {LOSS_MODES}, got {self.loss_mode!r}",
                              "loss_mode")
        if self.d_min_km is not None and self.d_max_km is not None:
            if not self.d_min_km < self.d_max_km:
                raise ConfigError(
                    f"need d_min_km < d_max_km, got {self.d_min_km} >= {self.d_max_km}",
                    "d_max_km",
                )

    def rate(self, link_class: str) -> float:
        return {
            INTRA: self.rate_intra_bps,
            INTER: self.rate_inter_bps,
            DOWNLINK: self.rate_downlink_bps,
        }[link_class]

    def with_distance_bounds(self, d_min: float, d_max: float) -> "LinkModel":
        return replace(self, d_min_km=d_min, d_max_km=d_max)

    @property
    def lossless(self) -> bool:
        return self.p_max == 0.0


def packet_loss_prob(d_km, model: LinkModel):
    """Loss probability on a link of length ``d_km``.

    Rises from ``p_min`` at zero distance towards ``p_max`` with length
    scale ``d_max - d_min``.
    """
    if model.d_min_km is None or model.d_max_km is None:
        raise ConfigError("distance bounds not set on the link model", "d_max_km")
    if not model.d_max_km > model.d_min_km:
        raise ConfigError("d_max_km must exceed d_min_km", "d_max_km")
    d = np.asarray(d_km, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be >= 0")
    w = np.exp(-d / (model.d_max_km - model.d_min_km))
    # same law written as a convex combination, so both endpoints come out exact
    p = model.p_min * w + model.p_max * (1.0 - w)
    return float(p) if p.ndim == 0 else p


def transmission_time(payload_bits: Sequence[float], rates_bps: Sequence[float]) -> float:
    if len(payload_bits) != len(rates_bps):
        raise ValueError("payloads and rates must have equal length")
    return float(sum(d / r for d, r in zip(payload_bits, rates_bps)))


def propagation_time(distances_km: Iterable[float]) -> float:
    return float(sum(distances_km)) / SPEED_OF_LIGHT


def route_time(legs: Sequence[tuple[str, float]], payload_bits: float, model: LinkModel) -> float:
    """Store-and-forward delay of ``payload_bits`` over (class, km) legs."""
    return transmission_time(
        [payload_bits] * len(legs), [model.rate(c) for c, _ in legs]
    ) + propagation_time(d for _, d in legs)


def evaluate_route_loss(rng: np.random.Generator, path: RoutePath | Sequence[tuple[str, float]],
                        payload_bits: float, model: LinkModel) -> bool:
    """True if the payload crosses every leg (downlink included) without loss."""
    legs = path.legs() if isinstance(path, RoutePath) else path
    if not legs:
        return True
    return legs_survive(rng, [d for _, d in legs], [payload_bits] * len(legs), model)


def legs_survive(rng: np.random.Generator, distances_km: Sequence[float],
                 payload_bits: Sequence[float], model: LinkModel) -> bool:
    """Joint survival of independent leg traversals, each with its own payload."""
    p = np.asarray(packet_loss_prob(np.asarray(distances_km, dtype=float), model)).reshape(-1)
    if model.loss_mode == PER_HOP:
        return bool(np.all(rng.random(p.size) >= p))
    packets = np.maximum(1, np.ceil(np.asarray(payload_bits, dtype=float) / model.packet_bits))
    return bool(np.all(rng.binomial(packets.astype(np.int64), p) == 0))


def delivery_probability(legs: Sequence[tuple[str, float]], payload_bits: float,
                         model: LinkModel) -> float:
    if not legs:
        return 1.0
    p = np.asarray(packet_loss_prob([d for _, d in legs], model))
    packets = 1 if model.loss_mode == PER_HOP else max(1, math.ceil(payload_bits / model.packet_bits))
    return float(np.prod((1.0 - p) ** packets))
