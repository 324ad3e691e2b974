"""
Walker constellations on circular orbits.

Satellites move on ideal two-body circles around a spherical Earth. All
positions are in km in an Earth-centred inertial frame whose x axis points
at longitude 0 at t = 0; ground points rotate about z at the sidereal rate.

Satellites are indexed ``p * N + s`` (plane-major) everywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .constants import MU_EARTH, OMEGA_EARTH, R_EARTH
from .errors import ConfigError, GeometryError

WALKER_STAR = "walker-star"
WALKER_DELTA = "walker-delta"
SHELL_TYPES = (WALKER_STAR, WALKER_DELTA)

INERTIAL = "inertial"
EARTH_FIXED = "earth-fixed"


@dataclass(frozen=True)
class ConstellationSpec:
    planes: int
    sats_per_plane: int
    altitude_km: float
    inclination_deg: float
    shell_type: str = WALKER_DELTA
    phasing: int = 1

    def __post_init__(self):
        if self.planes < 1:
            raise ConfigError(f"planes must be >= 1, got {self.planes}", "planes")
        if self.sats_per_plane < 1:
            raise ConfigError(
                f"sats_per_plane must be >= 1, got {self.sats_per_plane}", "sats_per_plane"
            )
        if not self.altitude_km > 0:
            raise ConfigError(f"altitude_km must be > 0, got {self.altitude_km}", "altitude_km")
        if not 0 <= self.inclination_deg <= 180:
            raise ConfigError(
                f"inclination_deg must be in [0, 180], got {self.inclination_deg}",
                "inclination_deg",
            )
        if self.shell_type not in SHELL_TYPES:
            raise ConfigError(
                f"shell_type must be one of {SHELL_TYPES}, got {self.shell_type!r}", "shell_type"
            )
        if not 0 <= self.phasing < self.planes:
            raise ConfigError(
                f"phasing must be in [0, planes), got {self.phasing}", "phasing"
            )

    @property
    def size(self) -> int:
        return self.planes * self.sats_per_plane

    @property
    def radius_km(self) -> float:
        return R_EARTH + self.altitude_km

    @property
    def raan_spread_deg(self) -> float:
        return 180.0 if self.shell_type == WALKER_STAR else 360.0


class SatelliteId(NamedTuple):
    plane: int
    slot: int


@dataclass(frozen=True)
class OrbitalElements:
    """Circular orbit; the argument of latitude doubles as mean anomaly."""

    radius_km: float
    inclination_deg: float
    raan_deg: float
    anomaly_deg: float

    @property
    def mean_motion(self) -> float:
        return math.sqrt(MU_EARTH / self.radius_km**3)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.mean_motion


@dataclass(frozen=True)
class GeodeticPoint:
    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ConfigError(f"latitude out of [-90, 90]: {self.latitude}", "latitude")
        if not -180.0 <= self.longitude <= 180.0:
            raise ConfigError(f"longitude out of [-180, 180]: {self.longitude}", "longitude")


@dataclass(frozen=True)
class CartesianState:
    position: np.ndarray
    frame: str = INERTIAL

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.position))


def orbital_period(altitude_km: float) -> float:
    a = R_EARTH + altitude_km
    return 2.0 * math.pi * math.sqrt(a**3 / MU_EARTH)


@dataclass(frozen=True)
class Constellation:
    """Elements of every satellite of a shell, plus vectorised propagation."""

    spec: ConstellationSpec
    raan: np.ndarray = field(repr=False)        # rad, shape (S,)
    anomaly0: np.ndarray = field(repr=False)    # rad, shape (S,)

    @property
    def size(self) -> int:
        return self.spec.size

    @property
    def radius_km(self) -> float:
        return self.spec.radius_km

    @property
    def mean_motion(self) -> float:
        return math.sqrt(MU_EARTH / self.radius_km**3)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.mean_motion

    def sat_id(self, index: int) -> SatelliteId:
        return SatelliteId(*divmod(int(index), self.spec.sats_per_plane))

    def index(self, sat: SatelliteId) -> int:
        return sat.plane * self.spec.sats_per_plane + sat.slot

    def elements(self, index: int) -> OrbitalElements:
        return OrbitalElements(
            radius_km=self.radius_km,
            inclination_deg=self.spec.inclination_deg,
            raan_deg=math.degrees(self.raan[index]),
            anomaly_deg=math.degrees(self.anomaly0[index]),
        )

    def __iter__(self) -> Iterator[tuple[SatelliteId, OrbitalElements]]:
        for k in range(self.size):
            yield self.sat_id(k), self.elements(k)

    def __len__(self) -> int:
        return self.size

    def positions(self, t) -> np.ndarray:
        """Inertial positions at time(s) ``t``.

        Scalar ``t`` gives shape (S, 3); an array of T times gives (T, S, 3).
        """
        t = np.asarray(t, dtype=float)
        u = self.anomaly0 + self.mean_motion * t[..., None]
        return _circular_positions(self.radius_km, math.radians(self.spec.inclination_deg),
                                   self.raan, u)


def _circular_positions(radius, inc, raan, u):
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan), np.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    return radius * np.stack(
        np.broadcast_arrays(co * cu - so * su * ci, so * cu + co * su * ci, su * si), axis=-1
    )


def build_constellation(spec: ConstellationSpec) -> Constellation:
    """Lay out a walker shell.

    Plane p gets RAAN ``p * spread / M`` and slot s gets anomaly
    ``s * 360/N + p * F * 360/(M N)``, with spread 180 deg for walker-star
    and 360 deg for walker-delta.
    """
    m, n = spec.planes, spec.sats_per_plane
    p, s = np.divmod(np.arange(m * n), n)
    raan_deg = p * (spec.raan_spread_deg / m)
    anomaly_deg = s * (360.0 / n) + p * spec.phasing * (360.0 / (m * n))
    return Constellation(
        spec=spec,
        raan=np.radians(raan_deg),
        anomaly0=np.radians(np.mod(anomaly_deg, 360.0)),
    )


def propagate(sat: OrbitalElements, t: float) -> CartesianState:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    u = math.radians(sat.anomaly_deg) + sat.mean_motion * t
    pos = _circular_positions(
        sat.radius_km, math.radians(sat.inclination_deg), math.radians(sat.raan_deg), u
    )
    return CartesianState(pos, INERTIAL)


def ground_positions(lat_deg, lon_deg, t, radius: float = R_EARTH) -> np.ndarray:
    """Inertial positions of Earth-fixed points; broadcasts over all inputs."""
    lat = np.radians(lat_deg)
    lon = np.radians(lon_deg) + OMEGA_EARTH * np.asarray(t, dtype=float)
    cl = np.cos(lat)
    return radius * np.stack(
        np.broadcast_arrays(cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)), axis=-1
    )


def ground_to_inertial(pt: GeodeticPoint, t: float) -> CartesianState:
    return CartesianState(ground_positions(pt.latitude, pt.longitude, t), INERTIAL)


def _as_array(state) -> np.ndarray:
    return np.asarray(state.position if isinstance(state, CartesianState) else state, float)


def _check_frames(a, b):
    if isinstance(a, CartesianState) and isinstance(b, CartesianState) and a.frame != b.frame:
        raise GeometryError(f"frame mismatch: {a.frame} vs {b.frame}")


def off_nadir_angle(sat_pos, target_pos) -> float:
    """Angle (deg) at the satellite between nadir and the line of sight to the target."""
    _check_frames(sat_pos, target_pos)
    s = _as_array(sat_pos)
    los = _as_array(target_pos) - s
    los_norm = np.linalg.norm(los)
    if los_norm == 0.0:
        raise GeometryError("target coincides with satellite position")
    cosang = np.dot(-s, los) / (np.linalg.norm(s) * los_norm)
    return math.degrees(math.acos(float(np.clip(cosang, -1.0, 1.0))))


def cos_off_nadir(sat_pos: np.ndarray, target_pos: np.ndarray) -> np.ndarray:
    """Vectorised cosine of the off-nadir angle over the last axis."""
    los = target_pos - sat_pos
    num = -np.einsum("...k,...k->...", sat_pos, los)
    den = np.linalg.norm(sat_pos, axis=-1) * np.linalg.norm(los, axis=-1)
    return num / den


def elevation_angle(gs_pos, sat_pos) -> float:
    _check_frames(gs_pos, sat_pos)
    return float(elevation_angles(_as_array(gs_pos), _as_array(sat_pos)))


def elevation_angles(gs_pos: np.ndarray, sat_pos: np.ndarray) -> np.ndarray:
    """Elevation (deg) of each satellite above the local horizontal at ``gs_pos``."""
    los = sat_pos - gs_pos
    up = gs_pos / np.linalg.norm(gs_pos, axis=-1, keepdims=True)
    sin_el = np.einsum("...k,...k->...", los, up) / np.linalg.norm(los, axis=-1)
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def coverage_central_angle(altitude_km: float, beta_deg: float) -> float:
    """Largest Earth-central angle (deg) between sub-satellite point and a capturable target."""
    r = R_EARTH + altitude_km
    beta = math.radians(beta_deg)
    horizon = math.asin(R_EARTH / r)
    if beta >= horizon:
        return math.degrees(math.pi / 2 - horizon)
    gamma = math.pi - math.asin(r / R_EARTH * math.sin(beta))
    return math.degrees(math.pi - gamma - beta)


def horizon_off_nadir(altitude_km: float) -> float:
    return math.degrees(math.asin(R_EARTH / (R_EARTH + altitude_km)))



def capture_dot_threshold(altitude_km: float, beta_deg: float) -> float:
    """Minimum ``sat . target`` (km^2) for a capturable target.

    A target is capturable when it is on the visible side of the Earth and
    within ``beta_deg`` of nadir; on the visible side the off-nadir angle grows
    with the central angle, so both reduce to one bound on the dot product.
    """
    r = R_EARTH + altitude_km
    return r * R_EARTH * math.cos(math.radians(coverage_central_angle(altitude_km, beta_deg)))


def coverage_series(constellation: Constellation, target: GeodeticPoint, beta_deg: float,
                    times) -> tuple[np.ndarray, np.ndarray]:
    """Capture opportunities for ``target`` at each of ``times``.

    Returns ``(covered, best)``: whether some satellite can capture the target,
    and the index of the satellite with the smallest off-nadir angle (-1 where
    uncovered). Satellites of a plane are evenly phased, so only the one
    nearest in phase to the target's projection on each plane is examined.
    """
    spec = constellation.spec
    m, n = spec.planes, spec.sats_per_plane
    times = np.asarray(times, dtype=float)
    inc = math.radians(spec.inclination_deg)
    raan = constellation.raan[::n]                                  # (M,)
    u0 = constellation.anomaly0[::n]                                # slot 0 of each plane
    e1 = np.stack([np.cos(raan), np.sin(raan), np.zeros(m)], axis=1)
    e2 = np.stack([-np.sin(raan) * math.cos(inc), np.cos(raan) * math.cos(inc),
                   np.full(m, math.sin(inc))], axis=1)
    g = ground_positions(target.latitude, target.longitude, times, radius=1.0)  # (T, 3)
    proj_1 = g @ e1.T                                               # (T, M)
    proj_2 = g @ e2.T
    psi = np.arctan2(proj_2, proj_1)
    amp = np.hypot(proj_1, proj_2)
    spacing = 2.0 * math.pi / n
    base = u0[None, :] + constellation.mean_motion * times[:, None]
    k = np.rint((psi - base) / spacing)
    delta = base + k * spacing - psi
    delta = (delta + math.pi) % (2.0 * math.pi) - math.pi
    cos_central = amp * np.cos(delta)                               # (T, M)
    plane = cos_central.argmax(axis=1)
    best_cos = np.take_along_axis(cos_central, plane[:, None], axis=1)[:, 0]
    slot = np.take_along_axis(k, plane[:, None], axis=1)[:, 0].astype(np.int64) % n
    threshold = capture_dot_threshold(spec.altitude_km, beta_deg) / (constellation.radius_km * R_EARTH)
    covered = best_cos >= threshold - 1e-12
    best = np.where(covered, plane * n + slot, -1)
    return covered, best
