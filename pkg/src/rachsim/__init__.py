"""rachsim: discrete-event simulation of LTE contention-based random access
under massive simultaneous machine-type traffic."""

__version__ = "0.1.0"

from .config import (ConfigError, DetectionCurveSpec, RachConfig, RunConfig,
                     ScenarioConfig, default_duration_for, load_config,
                     load_config_file, serialize_config)
from .engine import RunResult, run_monte_carlo, run_simulation
from .mac import Phase, RaMac, UeRaState
from .metrics import (AccessRecord, SummaryStats, ecdf, mean_ecdf,
                      success_time_series, summary_stats)
from .phy import (DetectionCurve, OpportunityOutcome, OutcomeKind,
                  PreambleTransmission, PrachSchedule, collision_distinguishable,
                  detect_preambles, preamble_tx_power, prach_opportunities)
from .propagation import (LinkModel, LinkState, antenna_gain_db, noise_floor_dbm,
                          pathloss_db, uplink_snr_db, wall_loss_db)
from .scenario import (Building, Deployment, DevicePlacement, GeometryError,
                       Site, distance_3d, generate_deployment,
                       select_serving_sector)

__all__ = [
    "AccessRecord", "Building", "ConfigError", "Deployment", "DetectionCurve",
    "DetectionCurveSpec", "DevicePlacement", "GeometryError", "LinkModel",
    "LinkState", "OpportunityOutcome", "OutcomeKind", "Phase",
    "PrachSchedule", "PreambleTransmission", "RaMac", "RachConfig",
    "RunConfig", "RunResult", "ScenarioConfig", "Site", "SummaryStats",
    "UeRaState", "antenna_gain_db", "collision_distinguishable",
    "default_duration_for", "detect_preambles", "distance_3d", "ecdf",
    "generate_deployment", "load_config", "load_config_file", "mean_ecdf",
    "noise_floor_dbm", "pathloss_db", "prach_opportunities",
    "preamble_tx_power", "run_monte_carlo", "run_simulation",
    "select_serving_sector", "serialize_config", "success_time_series",
    "summary_stats", "uplink_snr_db", "wall_loss_db",
]
