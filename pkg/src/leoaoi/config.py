"""
Scenario files.

A scenario is a YAML document whose keys carry their units. Every key is
listed in ``SCHEMA``; unknown keys are rejected and only keys marked optional
fall back to a default. ``dump_scenario(parse_scenario(p))`` reproduces the
document with all defaults filled in.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import yaml

from .constants import SIDEREAL_DAY
from .engine import (
    PARALLEL,
    SEQUENTIAL,
    SWEEP_PARAMETERS,
    WATER_BOXES,
    LatLonBox,
    ScenarioConfig,
)
from .errors import ConfigError
from .links import LOSS_MODES, LinkModel
from .orbits import SHELL_TYPES, WALKER_DELTA, ConstellationSpec, GeodeticPoint
from .tasks import ComputeModel, FrameModel

REQUIRED = object()

OUTPUT_FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True)
class Key:
    path: str
    kind: type
    default: Any = REQUIRED
    check: Callable[[Any], bool] | None = None
    expect: str = ""

    @property
    def required(self) -> bool:
        return self.default is REQUIRED


def _positive(v):
    return v > 0


def _prob(v):
    return 0 <= v <= 1


SCHEMA: tuple[Key, ...] = (
    Key("constellation.planes", int, check=lambda v: v >= 1, expect=">= 1"),
    Key("constellation.sats_per_plane", int, check=lambda v: v >= 1, expect=">= 1"),
    Key("constellation.altitude_km", float, check=_positive, expect="> 0"),
    Key("constellation.inclination_deg", float, check=lambda v: 0 <= v <= 180, expect="in [0, 180]"),
    Key("constellation.shell_type", str, WALKER_DELTA, lambda v: v in SHELL_TYPES,
        f"one of {', '.join(SHELL_TYPES)}"),
    Key("constellation.phasing", int, 1, lambda v: v >= 0, ">= 0 and < planes"),
    Key("capture.max_off_nadir_deg", float, check=lambda v: 0 < v <= 180, expect="in (0, 180]"),
    Key("ground_station.latitude_deg", float, check=lambda v: -90 <= v <= 90, expect="in [-90, 90]"),
    Key("ground_station.longitude_deg", float, check=lambda v: -180 <= v <= 180,
        expect="in [-180, 180]"),
    Key("ground_station.min_elevation_deg", float, 10.0, lambda v: 0 <= v < 90, "in [0, 90)"),
    Key("frame.area_km2", float, check=_positive, expect="> 0"),
    Key("frame.gsd_m_per_px", float, check=_positive, expect="> 0"),
    Key("frame.image_width_px", int, check=_positive, expect="> 0"),
    Key("frame.image_height_px", int, check=_positive, expect="> 0"),
    Key("frame.image_size_bits", float, check=_positive, expect="> 0"),
    Key("frame.bbox_size_bits", float, check=_positive, expect="> 0"),
    Key("frame.vessels_per_image", float, check=_positive, expect="> 0"),
    Key("frame.vessel_fraction", float, check=lambda v: 0 < v <= 1, expect="in (0, 1]"),
    Key("frame.recall", float, check=lambda v: 0 < v <= 1, expect="in (0, 1]"),
    Key("compute.cpu_freq_hz", float, check=_positive, expect="> 0"),
    Key("compute.cores", int, check=_positive, expect="> 0"),
    Key("compute.mean_complexity_cycles_per_bit", float, check=_positive, expect="> 0"),
    Key("compute.complexity_gamma_shape", float, 10.0, _positive, "> 0"),
    Key("links.rate_intra_plane_bps", float, 10e9, _positive, "> 0"),
    Key("links.rate_inter_plane_bps", float, 1e9, _positive, "> 0"),
    Key("links.rate_downlink_bps", float, 500e6, _positive, "> 0"),
    Key("links.p_loss_min", float, check=_prob, expect="in [0, 1]"),
    Key("links.p_loss_max", float, check=_prob, expect="in [0, 1] and >= p_loss_min"),
    Key("links.d_min_km", float, None, lambda v: v >= 0, ">= 0"),
    Key("links.d_max_km", float, None, _positive, "> d_min_km"),
    Key("links.loss_mode", str, LOSS_MODES[0], lambda v: v in LOSS_MODES,
        f"one of {', '.join(LOSS_MODES)}"),
    Key("links.packet_size_bits", int, 12_000, _positive, "> 0"),
    Key("simulation.processing_satellites", int, 5, lambda v: v >= 1, ">= 1"),
    Key("simulation.horizon_s", float, SIDEREAL_DAY, _positive, "> 0"),
    Key("simulation.step_s", float, 1.0, _positive, "> 0 and <= horizon_s"),
    Key("simulation.seed", int, 0, lambda v: v >= 0, ">= 0"),
    Key("simulation.distribution", str, SEQUENTIAL, lambda v: v in (SEQUENTIAL, PARALLEL),
        f"{SEQUENTIAL} or {PARALLEL}"),
    Key("simulation.workers", int, 1, lambda v: v >= 1, ">= 1"),
    Key("sweep.parameter", str, None, lambda v: v in SWEEP_PARAMETERS,
        f"one of {', '.join(SWEEP_PARAMETERS)}"),
    Key("sweep.values", list, None, lambda v: len(v) > 0 and all(isinstance(x, (int, float)) for x in v),
        "a non-empty list of numbers"),
    Key("sweep.runs", int, 20, lambda v: v >= 2, ">= 2 (a standard error needs two runs)"),
    Key("output.directory", str, "results"),
    Key("output.formats", list, ["csv", "json", "svg"], lambda v: set(v) <= set(OUTPUT_FORMATS),
        f"a subset of {list(OUTPUT_FORMATS)}"),
)

_KEYS = {k.path: k for k in SCHEMA}
_SECTIONS = {k.path.split(".")[0] for k in SCHEMA}
_TARGET_KEYS = ("latitude_deg", "longitude_deg")
_BOX_KEYS = ("lat_min_deg", "lat_max_deg", "lon_min_deg", "lon_max_deg")


@dataclass
class SweepSpec:
    parameter: str
    values: list
    runs: int = 20


@dataclass
class Scenario:
    config: ScenarioConfig
    sweep: SweepSpec | None = None
    output_dir: str = "results"
    formats: list[str] = field(default_factory=lambda: list(OUTPUT_FORMATS))
    workers: int = 1
    source: str | None = None


def _coerce(key: Key, value):
    if key.kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        if not math.isfinite(value):
            raise ConfigError(f"{key.path} must be finite, got {value}", key.path)
        return float(value)
    if key.kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if key.kind is int and isinstance(value, float) and value.is_integer():
        return int(value)
    if key.kind in (str, list) and isinstance(value, key.kind):
        return value
    raise ConfigError(
        f"{key.path} must be of type {key.kind.__name__}, got {type(value).__name__} ({value!r})",
        key.path,
    )


def _flatten(doc: dict, errors: list[str]) -> dict[str, Any]:
    flat = {}
    for section, body in doc.items():
        if section in ("target", "target_region"):
            continue
        if section not in _SECTIONS:
            errors.append(f"unknown key {section!r}")
            continue
        if not isinstance(body, dict):
            errors.append(f"{section} must be a mapping")
            continue
        for name, value in body.items():
            path = f"{section}.{name}"
            if path not in _KEYS:
                errors.append(f"unknown key {path!r}")
            else:
                flat[path] = value
    return flat


def _parse_target(doc, errors):
    target = doc.get("target")
    if target is None:
        return None
    if not isinstance(target, dict) or set(target) != set(_TARGET_KEYS):
        errors.append(f"target must be a mapping with exactly {list(_TARGET_KEYS)}")
        return None
    try:
        return GeodeticPoint(float(target["latitude_deg"]), float(target["longitude_deg"]))
    except (ConfigError, TypeError, ValueError) as exc:
        errors.append(f"target: {exc}")


def _parse_region(doc, errors):
    region = doc.get("target_region")
    if region is None:
        return None
    if not isinstance(region, list) or not region:
        errors.append("target_region must be a non-empty list of boxes")
        return None
    boxes = []
    for i, box in enumerate(region):
        if not isinstance(box, dict) or set(box) != set(_BOX_KEYS):
            errors.append(f"target_region[{i}] must have exactly {list(_BOX_KEYS)}")
            continue
        try:
            boxes.append(LatLonBox(*(float(box[k]) for k in _BOX_KEYS)))
        except (ConfigError, TypeError, ValueError) as exc:
            errors.append(f"target_region[{i}]: {exc}")
    return tuple(boxes)


def scenario_from_dict(doc: Any, source: str | None = None) -> Scenario:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a mapping at the top level")
    errors: list[str] = []
    flat = _flatten(doc, errors)
    target = _parse_target(doc, errors)
    region = _parse_region(doc, errors)

    missing = [k.path for k in SCHEMA if k.required and k.path not in flat]
    if missing:
        errors.append("missing required keys: " + ", ".join(missing))
    values: dict[str, Any] = {}
    for key in SCHEMA:
        if key.path not in flat:
            if not key.required:
                values[key.path] = key.default
            continue
        try:
            v = _coerce(key, flat[key.path])
        except ConfigError as exc:
            errors.append(str(exc))
            continue
        if key.check is not None and not key.check(v):
            errors.append(f"{key.path} out of range: expected {key.expect}, got {v!r}")
            continue
        values[key.path] = v
    if errors:
        raise ConfigError("; ".join(errors), _first_key(errors))

    sweep = None
    if "sweep" in doc:
        if values["sweep.parameter"] is None or values["sweep.values"] is None:
            raise ConfigError("sweep needs both 'parameter' and 'values'", "sweep")
        sweep = SweepSpec(values["sweep.parameter"], list(values["sweep.values"]), values["sweep.runs"])

    v = values
    try:
        config = ScenarioConfig(
            constellation=_build(ConstellationSpec, "constellation", v["constellation.planes"],
                                 v["constellation.sats_per_plane"], v["constellation.altitude_km"],
                                 v["constellation.inclination_deg"], v["constellation.shell_type"],
                                 v["constellation.phasing"]),
            beta_deg=v["capture.max_off_nadir_deg"],
            ground_station=GeodeticPoint(v["ground_station.latitude_deg"],
                                         v["ground_station.longitude_deg"]),
            target=target,
            target_region=region if region is not None else WATER_BOXES,
            frame=_build(FrameModel, "frame", v["frame.area_km2"], v["frame.gsd_m_per_px"],
                         v["frame.image_width_px"], v["frame.image_height_px"],
                         v["frame.image_size_bits"], v["frame.bbox_size_bits"],
                         v["frame.vessels_per_image"], v["frame.vessel_fraction"],
                         v["frame.recall"]),
            compute=_build(ComputeModel, "compute", v["compute.cpu_freq_hz"], v["compute.cores"],
                           v["compute.mean_complexity_cycles_per_bit"],
                           v["compute.complexity_gamma_shape"]),
            links=_build(LinkModel, "links", v["links.rate_intra_plane_bps"],
                         v["links.rate_inter_plane_bps"], v["links.rate_downlink_bps"],
                         v["links.p_loss_min"], v["links.p_loss_max"], v["links.d_min_km"],
                         v["links.d_max_km"], v["links.loss_mode"], v["links.packet_size_bits"]),
            processing_satellites=v["simulation.processing_satellites"],
            horizon_s=v["simulation.horizon_s"],
            step_s=v["simulation.step_s"],
            seed=v["simulation.seed"],
            min_elevation_deg=v["ground_station.min_elevation_deg"],
            distribution=v["simulation.distribution"],
        )
    except ConfigError as exc:
        raise ConfigError(str(exc), _qualify(exc.key)) from None
    return Scenario(config, sweep, v["output.directory"], list(v["output.formats"]),
                    v["simulation.workers"], source)


_FIELD_TO_KEY = {
    ("constellation", "phasing"): "constellation.phasing",
    ("links", "p_min"): "links.p_loss_min",
    ("links", "d_max_km"): "links.d_max_km",
    ("frame", "recall"): "frame.recall",
}


def _build(cls, section, *args):
    try:
        return cls(*args)
    except ConfigError as exc:
        key = _FIELD_TO_KEY.get((section, exc.key), f"{section}.{exc.key}")
        raise ConfigError(f"{key}: {exc}", key) from None


def _qualify(key):
    if key is None or "." in key:
        return key
    return {"processing_satellites": "simulation.processing_satellites",
            "step_s": "simulation.step_s"}.get(key, key)


def _first_key(errors):
    for e in errors:
        m = re.search(r"'?(\w+(?:\.\w+|\[\d+\])*)'?", e.replace("unknown key ", "").replace("missing required keys: ", ""))
        if m:
            return m.group(1)
    return None


def parse_scenario(path) -> Scenario:
    """Load and validate a scenario file (or the name of a bundled one)."""
    path = resolve_scenario(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed scenario {path}: {exc}") from None
    return scenario_from_dict(doc, str(path))


def resolve_scenario(path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("leoaoi") / "data" / p.name
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"scenario file not found: {path}")


def bundled_scenarios() -> list[str]:
    return sorted(p.name for p in (resources.files("leoaoi") / "data").iterdir()
                  if p.name.endswith(".scenario"))


def scenario_to_dict(scenario: Scenario) -> dict:
    c = scenario.config
    doc = {
        "constellation": {
            "planes": c.constellation.planes,
            "sats_per_plane": c.constellation.sats_per_plane,
            "altitude_km": c.constellation.altitude_km,
            "inclination_deg": c.constellation.inclination_deg,
            "shell_type": c.constellation.shell_type,
            "phasing": c.constellation.phasing,
        },
        "capture": {"max_off_nadir_deg": c.beta_deg},
        "ground_station": {
            "latitude_deg": c.ground_station.latitude,
            "longitude_deg": c.ground_station.longitude,
            "min_elevation_deg": c.min_elevation_deg,
        },
        "frame": {
            "area_km2": c.frame.frame_area_km2,
            "gsd_m_per_px": c.frame.gsd_m,
            "image_width_px": c.frame.image_width_px,
            "image_height_px": c.frame.image_height_px,
            "image_size_bits": c.frame.image_bits,
            "bbox_size_bits": c.frame.bbox_bits,
            "vessels_per_image": c.frame.vessels_per_image,
            "vessel_fraction": c.frame.vessel_fraction,
            "recall": c.frame.recall,
        },
        "compute": {
            "cpu_freq_hz": c.compute.cpu_hz,
            "cores": c.compute.cores,
            "mean_complexity_cycles_per_bit": c.compute.mean_cycles_per_bit,
            "complexity_gamma_shape": c.compute.gamma_shape,
        },
        "links": {
            "rate_intra_plane_bps": c.links.rate_intra_bps,
            "rate_inter_plane_bps": c.links.rate_inter_bps,
            "rate_downlink_bps": c.links.rate_downlink_bps,
            "p_loss_min": c.links.p_min,
            "p_loss_max": c.links.p_max,
            "loss_mode": c.links.loss_mode,
            "packet_size_bits": c.links.packet_bits,
        },
        "simulation": {
            "processing_satellites": c.processing_satellites,
            "horizon_s": c.horizon_s,
            "step_s": c.step_s,
            "seed": c.seed,
            "distribution": c.distribution,
            "workers": scenario.workers,
        },
        "output": {"directory": scenario.output_dir, "formats": list(scenario.formats)},
    }
    if c.links.d_min_km is not None:
        doc["links"]["d_min_km"] = c.links.d_min_km
    if c.links.d_max_km is not None:
        doc["links"]["d_max_km"] = c.links.d_max_km
    if c.target is not None:
        doc["target"] = {"latitude_deg": c.target.latitude, "longitude_deg": c.target.longitude}
    doc["target_region"] = [
        dict(zip(_BOX_KEYS, (b.lat_min, b.lat_max, b.lon_min, b.lon_max))) for b in c.target_region
    ]
    if scenario.sweep is not None:
        doc["sweep"] = {
            "parameter": scenario.sweep.parameter,
            "values": list(scenario.sweep.values),
            "runs": scenario.sweep.runs,
        }
    return doc


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False)
