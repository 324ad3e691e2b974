"""
On-board vessel-detection workload.

A captured frame is tiled into detector-sized images, split evenly across the
processing satellites, and reduced to bounding boxes. Detector cost is a
gamma-distributed number of CPU cycles per bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class FrameModel:
    frame_area_km2: float = 162.16
    gsd_m: float = 0.43
    image_width_px: int = 1280
    image_height_px: int = 720
    image_bits: float = 391.43e3 * 8
    bbox_bits: float = 67.2
    vessels_per_image: float = 2.0
    vessel_fraction: float = 0.2
    recall: float = 0.9

    def __post_init__(self):
        for name in ("frame_area_km2", "gsd_m", "image_width_px", "image_height_px",
                     "image_bits", "bbox_bits", "vessels_per_image"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}", name)
        if not 0 < self.vessel_fraction <= 1:
            raise ConfigError(f"vessel_fraction must be in (0, 1], got {self.vessel_fraction}",
                              "vessel_fraction")
        if not 0 < self.recall <= 1:
            raise ConfigError(f"recall must be in (0, 1], got {self.recall}", "recall")

    @property
    def pixels_per_image(self) -> int:
        return self.image_width_px * self.image_height_px

    @property
    def images_per_frame(self) -> int:
        ground_pixels = self.frame_area_km2 * 1e6 / self.gsd_m**2
        return math.ceil(ground_pixels / self.pixels_per_image)

    @property
    def frame_bits(self) -> float:
        """Total frame size x in bits."""
        return self.images_per_frame * self.image_bits

    @property
    def compression(self) -> float:
        return compression_factor(self.image_bits, self.vessels_per_image, self.bbox_bits)

    @property
    def semantic_bits(self) -> float:
        """Bits sent to ground for the whole frame."""
        return semantic_payload(self.frame_bits, self.vessel_fraction, self.compression)


@dataclass(frozen=True)
class ComputeModel:
    cpu_hz: float = 1.8e9
    cores: int = 8
    mean_cycles_per_bit: float = 374.2
    gamma_shape: float = 10.0

    def __post_init__(self):
        for name in ("cpu_hz", "cores", "mean_cycles_per_bit", "gamma_shape"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}", name)

    @property
    def gamma_scale(self) -> float:
        return self.mean_cycles_per_bit / self.gamma_shape


def compression_factor(image_bits: float, vessels_per_image: float, bbox_bits: float) -> float:
    """Ratio of image size to the bounding boxes it yields."""
    if min(image_bits, vessels_per_image, bbox_bits) <= 0:
        raise ValueError("compression inputs must be positive")
    return image_bits / (vessels_per_image * bbox_bits)


def semantic_payload(bits: float, vessel_fraction: float, rho: float) -> float:
    if rho < 1:
        raise ValueError(f"compression factor must be >= 1, got {rho}")
    if not 0 < vessel_fraction <= 1:
        raise ValueError(f"vessel fraction must be in (0, 1], got {vessel_fraction}")
    if bits < 0:
        raise ValueError(f"bits must be >= 0, got {bits}")
    return bits * vessel_fraction / rho


def fragment(bits: int, n: int) -> list[int]:
    """Split ``bits`` into ``n`` integer shares differing by at most one bit."""
    if n < 1:
        raise ValueError(f"need at least one fragment, got {n}")
    q, r = divmod(int(bits), n)
    return [q + 1] * r + [q] * (n - r)


def sample_complexity(rng: np.random.Generator, compute: ComputeModel, size=None):
    return rng.gamma(compute.gamma_shape, compute.gamma_scale, size=size)


def processing_time(bits: float, cycles_per_bit, compute: ComputeModel):
    if bits <= 0 or np.any(np.asarray(cycles_per_bit) <= 0):
        raise ValueError("fragment size and complexity must be positive")
    t = bits * np.asarray(cycles_per_bit, dtype=float) / (compute.cores * compute.cpu_hz)
    return float(t) if t.ndim == 0 else t


def detection_succeeds(rng: np.random.Generator, recall: float) -> bool:
    """Whole-frame detection outcome; succeeds with probability ``recall``."""
    if not 0 <= recall <= 1:
        raise ValueError(f"recall must be in [0, 1], got {recall}")
    return bool(rng.random() < recall)
