"""Age-of-information simulator for distributed on-board vessel detection in LEO."""

__version__ = "0.1.0"

from .aoi import (
    AoiSummary,
    FrameRecord,
    average_aoi,
    average_paoi,
    coverage_probability,
    discrete_age_oracle,
    summarize,
)
from .config import Scenario, SweepSpec, dump_scenario, parse_scenario, scenario_from_dict
from .engine import (
    LatLonBox,
    MonteCarloResult,
    ScenarioConfig,
    ScenarioResult,
    latitude_availability,
    monte_carlo,
    run_scenario,
    sweep,
)
from .errors import ConfigError, GeometryError, TopologyError, UndefinedAgeError
from .links import LinkModel, packet_loss_prob
from .orbits import (
    Constellation,
    ConstellationSpec,
    GeodeticPoint,
    build_constellation,
    coverage_series,
    propagate,
)
from .tasks import ComputeModel, FrameModel, fragment, processing_time
from .topology import TorusGrid, min_hop_path, select_gateway

__all__ = [
    "AoiSummary", "ComputeModel", "ConfigError", "Constellation", "ConstellationSpec",
    "FrameModel", "FrameRecord", "GeodeticPoint", "GeometryError", "LatLonBox", "LinkModel",
    "MonteCarloResult", "Scenario", "ScenarioConfig", "ScenarioResult", "SweepSpec",
    "TopologyError", "TorusGrid", "UndefinedAgeError", "average_aoi", "average_paoi",
    "build_constellation", "coverage_probability", "coverage_series", "discrete_age_oracle",
    "dump_scenario", "fragment", "latitude_availability", "min_hop_path", "monte_carlo",
    "packet_loss_prob", "parse_scenario", "processing_time", "propagate", "run_scenario",
    "scenario_from_dict", "select_gateway", "summarize", "sweep",
]
