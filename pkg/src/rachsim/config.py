"""Simulation parameters and their validation.

Everything the simulator can be told lives in one YAML document with three
sections (``scenario``, ``rach``, ``run``) plus a ``schema_version`` field.
Omitted keys fall back to the defaults defined here; unknown keys are hard
errors so a typo cannot silently corrupt an experiment.  See
docs/config_schema.md for the full schema.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

SCHEMA_VERSION = 1

WALL_TYPES = (
    "concrete_with_windows",
    "concrete_without_windows",
    "stone_blocks",
    "wood",
)

# Sweep values and the simulation time used for each one.
SIM_DURATION_S_BY_N = {
    50: 60.0,
    100: 60.0,
    150: 120.0,
    200: 120.0,
    300: 300.0,
    400: 300.0,
    500: 400.0,
    600: 400.0,
}
DEFAULT_SWEEP = tuple(sorted(SIM_DURATION_S_BY_N))


class ConfigError(ValueError):
    """Raised when a document fails to parse or a value is out of range."""


def default_duration_for(n: int) -> float:
    """Simulation time (s) for ``n`` devices: the entry of the nearest
    listed population, ties resolved upward."""
    if n in SIM_DURATION_S_BY_N:
        return SIM_DURATION_S_BY_N[n]
    nearest = min(SIM_DURATION_S_BY_N, key=lambda k: (abs(k - n), -k))
    return SIM_DURATION_S_BY_N[nearest]


@dataclass(frozen=True)
class ScenarioConfig:
    """Deployment and radio parameters (units in the field names)."""

    dl_carrier_freq_mhz: float = 945.0
    ul_carrier_freq_mhz: float = 900.0
    rb_bandwidth_khz: float = 180.0
    available_bandwidth_rb: int = 50
    sectors_per_site: int = 3
    sector_beamwidth_deg: float = 65.0
    sector_max_gain_dbi: float = 14.0
    enb_tx_power_dbm: float = 43.0
    mtd_max_tx_power_dbm: float = 23.0
    enb_noise_figure_db: float = 3.0
    mtd_noise_figure_db: float = 5.0
    shadowing_sigma_db: float = 8.0
    num_buildings: int = 96
    apartments_per_floor: int = 6
    floors_per_building: int = 3
    mtd_speed_kmh: float = 0.0
    num_mtds: int = 100
    sim_duration_s: float | None = None  # None: pick by num_mtds

    # Geometry of the building grid (single three-sector site at the center).
    # The default pitch spreads the 96 buildings over a full macro cell, so
    # the coverage edge falls inside the map and the farthest indoor devices
    # sit below the preamble detection floor even at maximum power.
    building_footprint_m: tuple[float, float] = (25.0, 50.0)
    floor_height_m: float = 3.0
    grid_columns: int = 12
    grid_rows: int = 8
    grid_pitch_m: tuple[float, float] = (320.0, 480.0)
    deployment_area_m: tuple[float, float] | None = None  # None: grid bounding box
    site_height_m: float = 30.0
    mtd_height_above_floor_m: float = 1.5
    sector_azimuths_deg: tuple[float, ...] = (0.0, 120.0, 240.0)

    # Wall penetration model.
    external_wall_type: str = "concrete_with_windows"
    external_wall_loss_db: dict[str, float] = field(
        default_factory=lambda: {
            "concrete_with_windows": 7.0,
            "concrete_without_windows": 15.0,
            "stone_blocks": 12.0,
            "wood": 4.0,
        }
    )
    internal_wall_loss_db: float = 5.0
    max_internal_walls: int = 3

    @property
    def prach_bandwidth_hz(self) -> float:
        """PRACH occupies 6 resource blocks."""
        return 6.0 * self.rb_bandwidth_khz * 1e3


@dataclass(frozen=True)
class RachConfig:
    """Random-access procedure parameters.

    ``preamble_trans_max`` and ``max_grants_per_rar`` use ``None`` for
    "unbounded" (spelled ``unbounded`` in config files).
    """

    prach_config_index: int = 1
    backoff_indicator_ms: int = 0
    preamble_initial_received_target_power_dbm: float = -110.0
    power_ramping_step_db: float = 2.0
    num_contention_preambles: int = 54
    preamble_trans_max: int | None = None
    contention_resolution_timer_ms: int = 32
    delta_preamble_db: float = 0.0  # preamble format 0
    rar_window_ms: int = 10
    rar_processing_delay_ms: int = 3
    msg3_harq_max: int = 5
    max_grants_per_rar: int | None = None


@dataclass(frozen=True)
class DetectionCurveSpec:
    """Which missed-detection curve a run uses.

    kind 'default': the built-in table; 'file': two-column text table at
    ``path``; 'step': detect iff SNR >= ``threshold_db`` (analytic runs).
    """

    kind: str = "default"
    path: str | None = None
    threshold_db: float | None = None


@dataclass(frozen=True)
class RunConfig:
    """Monte Carlo execution control."""

    seed: int = 12345
    num_runs: int = 10
    mode: str = "realistic"  # 'realistic' or 'ideal'
    detection_curve: DetectionCurveSpec = field(default_factory=DetectionCurveSpec)
    output_dir: str = "results"
    activation_window_ms: int = 0  # 0: every device starts at t = 0


# ---------------------------------------------------------------------------
# Validation


def _check(cond: bool, key: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def _finite(value: float, key: str) -> None:
    _check(isinstance(value, (int, float)) and math.isfinite(value), key, "must be finite")


def validate_scenario(s: ScenarioConfig) -> None:
    for key in ("dl_carrier_freq_mhz", "ul_carrier_freq_mhz", "rb_bandwidth_khz"):
        v = getattr(s, key)
        _finite(v, key)
        _check(v > 0, key, f"must be > 0 (got {v})")
    for key in (
        "enb_tx_power_dbm",
        "mtd_max_tx_power_dbm",
        "sector_max_gain_dbi",
    ):
        _finite(getattr(s, key), key)
    for key in ("enb_noise_figure_db", "mtd_noise_figure_db", "shadowing_sigma_db"):
        v = getattr(s, key)
        _finite(v, key)
        _check(v >= 0, key, f"must be >= 0 (got {v})")
    _check(s.available_bandwidth_rb >= 6, "available_bandwidth_rb",
           f"must be >= 6 so PRACH fits (got {s.available_bandwidth_rb})")
    _check(s.sectors_per_site == 3, "sectors_per_site",
           f"only 3 co-located sectors are supported (got {s.sectors_per_site})")
    _check(s.sector_beamwidth_deg > 0, "sector_beamwidth_deg", "must be > 0")
    _check(len(s.sector_azimuths_deg) == s.sectors_per_site, "sector_azimuths_deg",
           f"needs exactly {s.sectors_per_site} entries")
    az = sorted(a % 360.0 for a in s.sector_azimuths_deg)
    gaps = [(az[(i + 1) % 3] - az[i]) % 360.0 for i in range(3)]
    _check(all(abs(g - 120.0) < 1e-9 for g in gaps), "sector_azimuths_deg",
           "azimuths must be mutually 120 degrees apart")
    _check(s.num_mtds >= 1, "num_mtds", f"must be >= 1 (got {s.num_mtds})")
    _check(s.mtd_speed_kmh == 0.0, "mtd_speed_kmh",
           "only static devices (0 km/h) are supported")
    if s.sim_duration_s is not None:
        _check(s.sim_duration_s > 0, "sim_duration_s", f"must be > 0 (got {s.sim_duration_s})")
    _check(s.floors_per_building >= 1, "floors_per_building", "must be >= 1")
    _check(s.apartments_per_floor >= 1, "apartments_per_floor", "must be >= 1")
    _check(s.num_buildings == s.grid_columns * s.grid_rows, "num_buildings",
           f"must equal grid_columns*grid_rows = {s.grid_columns * s.grid_rows} "
           f"(got {s.num_buildings})")
    fx, fy = s.building_footprint_m
    _check(fx > 0 and fy > 0, "building_footprint_m", "sides must be > 0")
    px, py = s.grid_pitch_m
    _check(px >= fx and py >= fy, "grid_pitch_m",
           f"pitch must be >= footprint {s.building_footprint_m} (got {s.grid_pitch_m})")
    _check(s.floor_height_m > 0, "floor_height_m", "must be > 0")
    _check(0 <= s.mtd_height_above_floor_m < s.floor_height_m, "mtd_height_above_floor_m",
           f"must lie in [0, floor_height_m) (got {s.mtd_height_above_floor_m})")
    _check(s.site_height_m > 0, "site_height_m", "must be > 0")
    if s.deployment_area_m is not None:
        ax, ay = s.deployment_area_m
        _check(ax > 0 and ay > 0, "deployment_area_m", "sides must be > 0")
    _check(s.external_wall_type in WALL_TYPES, "external_wall_type",
           f"must be one of {WALL_TYPES} (got {s.external_wall_type!r})")
    _check(set(s.external_wall_loss_db) == set(WALL_TYPES), "external_wall_loss_db",
           f"must map exactly the wall types {WALL_TYPES}")
    for wt, loss in s.external_wall_loss_db.items():
        _check(loss >= 0, f"external_wall_loss_db.{wt}", f"must be >= 0 (got {loss})")
    _check(s.internal_wall_loss_db >= 0, "internal_wall_loss_db", "must be >= 0")
    _check(s.max_internal_walls >= 0, "max_internal_walls", "must be >= 0")


def validate_rach(r: RachConfig) -> None:
    _check(0 <= r.prach_config_index <= 15, "prach_config_index",
           f"must be in [0, 15] (got {r.prach_config_index})")
    _check(r.backoff_indicator_ms >= 0, "backoff_indicator_ms",
           f"must be >= 0 (got {r.backoff_indicator_ms})")
    _finite(r.preamble_initial_received_target_power_dbm,
            "preamble_initial_received_target_power_dbm")
    _check(r.power_ramping_step_db >= 0, "power_ramping_step_db", "must be >= 0")
    _check(1 <= r.num_contention_preambles <= 64, "num_contention_preambles",
           f"must be in [1, 64] (got {r.num_contention_preambles})")
    if r.preamble_trans_max is not None:
        _check(r.preamble_trans_max >= 1, "preamble_trans_max",
               f"must be >= 1 or unbounded (got {r.preamble_trans_max})")
    _check(r.contention_resolution_timer_ms > 0, "contention_resolution_timer_ms",
           f"must be > 0 (got {r.contention_resolution_timer_ms})")
    _check(r.delta_preamble_db == 0.0, "delta_preamble_db",
           f"must be 0 for preamble format 0 (got {r.delta_preamble_db})")
    _check(r.rar_window_ms >= 1, "rar_window_ms", "must be >= 1")
    _check(0 <= r.rar_processing_delay_ms < r.rar_window_ms, "rar_processing_delay_ms",
           f"must lie in [0, rar_window_ms) or responses can never arrive in time "
           f"(got {r.rar_processing_delay_ms}, window {r.rar_window_ms})")
    _check(r.msg3_harq_max >= 1, "msg3_harq_max", "must be >= 1")
    if r.max_grants_per_rar is not None:
        _check(r.max_grants_per_rar >= 1, "max_grants_per_rar",
               f"must be >= 1 or unbounded (got {r.max_grants_per_rar})")


def validate_run(r: RunConfig) -> None:
    _check(isinstance(r.seed, int) and 0 <= r.seed < 2**64, "seed",
           f"must be a 64-bit unsigned integer (got {r.seed})")
    _check(r.num_runs >= 1, "num_runs", f"must be >= 1 (got {r.num_runs})")
    _check(r.mode in ("ideal", "realistic"), "mode",
           f"must be 'ideal' or 'realistic' (got {r.mode!r})")
    _check(bool(r.output_dir), "output_dir", "must be non-empty")
    _check(r.activation_window_ms >= 0, "activation_window_ms", "must be >= 0")
    dc = r.detection_curve
    _check(dc.kind in ("default", "file", "step"), "detection_curve",
           f"kind must be 'default', 'file' or 'step' (got {dc.kind!r})")
    if dc.kind == "file":
        _check(bool(dc.path), "detection_curve", "file form needs a path")
    if dc.kind == "step":
        _check(dc.threshold_db is not None and math.isfinite(dc.threshold_db) or
               dc.threshold_db == -math.inf, "detection_curve",
               "step form needs step_threshold_db")


def validate(scenario: ScenarioConfig, rach: RachConfig, run: RunConfig) -> None:
    validate_scenario(scenario)
    validate_rach(rach)
    validate_run(run)


# ---------------------------------------------------------------------------
# Loading / serialization

_TUPLE_FIELDS = {
    "building_footprint_m": 2,
    "grid_pitch_m": 2,
    "deployment_area_m": 2,
    "sector_azimuths_deg": None,
}
_UNBOUNDED_FIELDS = {"preamble_trans_max", "max_grants_per_rar"}
_INT_FIELDS = {
    "available_bandwidth_rb", "sectors_per_site", "num_buildings",
    "apartments_per_floor", "floors_per_building", "num_mtds",
    "grid_columns", "grid_rows", "max_internal_walls",
    "prach_config_index", "backoff_indicator_ms", "num_contention_preambles",
    "preamble_trans_max", "contention_resolution_timer_ms", "rar_window_ms",
    "rar_processing_delay_ms", "msg3_harq_max", "max_grants_per_rar",
    "seed", "num_runs", "activation_window_ms",
}


def _coerce(cls, key: str, value):
    if key in _UNBOUNDED_FIELDS:
        if value is None or (isinstance(value, str) and value == "unbounded"):
            return None
    if key == "detection_curve":
        return _parse_curve_spec(value)
    if key in _TUPLE_FIELDS:
        if value is None and key == "deployment_area_m":
            return None
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key}: expected a list (got {value!r})")
        width = _TUPLE_FIELDS[key]
        if width is not None and len(value) != width:
            raise ConfigError(f"{key}: expected {width} entries (got {len(value)})")
        return tuple(float(v) for v in value)
    if key == "external_wall_loss_db":
        if not isinstance(value, dict):
            raise ConfigError(f"{key}: expected a mapping")
        return {str(k): float(v) for k, v in value.items()}
    if key == "sim_duration_s" and value is None:
        return None
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer (got {value!r})")
        return value
    ftype = {f.name: f.type for f in dataclasses.fields(cls)}[key]
    if ftype in ("float", "float | None"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number (got {value!r})")
        return float(value)
    if ftype == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string (got {value!r})")
        return value
    return value


def _parse_curve_spec(value) -> DetectionCurveSpec:
    if isinstance(value, DetectionCurveSpec):
        return value
    if value == "default" or value is None:
        return DetectionCurveSpec()
    if isinstance(value, dict):
        keys = set(value)
        if keys == {"file"}:
            return DetectionCurveSpec(kind="file", path=str(value["file"]))
        if keys == {"step_threshold_db"}:
            return DetectionCurveSpec(kind="step",
                                      threshold_db=float(value["step_threshold_db"]))
    raise ConfigError(
        "detection_curve: expected 'default', {file: <path>} or "
        f"{{step_threshold_db: <dB>}} (got {value!r})")


def _build_section(cls, name: str, data: dict, explicit: set[str]):
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    updates = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown key '{name}.{key}'")
        updates[key] = _coerce(cls, key, value)
        explicit.add(f"{name}.{key}")
    return dataclasses.replace(defaults, **updates)


@dataclass(frozen=True)
class LoadedConfig:
    scenario: ScenarioConfig
    rach: RachConfig
    run: RunConfig
    explicit: frozenset[str]  # dotted keys present in the document


def load_config(source: str | dict) -> LoadedConfig:
    """Parse and validate a YAML document (text or pre-parsed mapping).

    Missing keys take the defaults; unknown keys raise ConfigError.
    """
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = yaml.safe_load(source)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config document does not parse: {exc}") from exc
        if data is None:
            data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config document must be a mapping (got {type(data).__name__})")
    allowed = {"schema_version", "scenario", "rach", "run"}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' (top level allows {sorted(allowed)})")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported value {version!r} "
                          f"(this build reads version {SCHEMA_VERSION})")
    explicit: set[str] = set()
    sections = {}
    for name, cls in (("scenario", ScenarioConfig), ("rach", RachConfig), ("run", RunConfig)):
        block = data.get(name, {})
        if block is None:
            block = {}
        if not isinstance(block, dict):
            raise ConfigError(f"section '{name}' must be a mapping")
        sections[name] = _build_section(cls, name, block, explicit)
    cfg = LoadedConfig(sections["scenario"], sections["rach"], sections["run"],
                       frozenset(explicit))
    validate(cfg.scenario, cfg.rach, cfg.run)
    return cfg


def load_config_file(path: str | Path) -> LoadedConfig:
    return load_config(Path(path).read_text())


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def config_to_dict(scenario: ScenarioConfig, rach: RachConfig, run: RunConfig) -> dict:
    """Plain-type mapping of the full configuration (JSON/YAML friendly)."""
    out = {"schema_version": SCHEMA_VERSION}
    for name, obj in (("scenario", scenario), ("rach", rach), ("run", run)):
        section = {}
        for f in dataclasses.fields(obj):
            value = getattr(obj, f.name)
            if f.name in _UNBOUNDED_FIELDS:
                value = "unbounded" if value is None else value
            elif f.name == "detection_curve":
                if value.kind == "default":
                    value = "default"
                elif value.kind == "file":
                    value = {"file": value.path}
                else:
                    value = {"step_threshold_db": value.threshold_db}
            else:
                value = _plain(value)
            section[f.name] = value
        out[name] = section
    return out


def serialize_config(scenario: ScenarioConfig, rach: RachConfig, run: RunConfig) -> str:
    """YAML text that loads back to an identical configuration."""
    return yaml.safe_dump(config_to_dict(scenario, rach, run), sort_keys=False)


# Defaults that are deliberate modeling choices rather than standard LTE
# signaling values; flagged as such by --print-defaults.
_MODEL_CHOICE_KEYS = {
    "scenario": {
        "sector_max_gain_dbi", "building_footprint_m", "floor_height_m",
        "grid_columns", "grid_rows", "grid_pitch_m", "deployment_area_m",
        "site_height_m", "mtd_height_above_floor_m", "sector_azimuths_deg",
        "external_wall_type", "external_wall_loss_db", "internal_wall_loss_db",
        "max_internal_walls",
    },
    "rach": {"rar_window_ms", "rar_processing_delay_ms", "msg3_harq_max",
             "max_grants_per_rar"},
    "run": set(),
}


def format_defaults() -> str:
    """Human-readable listing of every default, for --print-defaults."""
    scenario, rach, run = ScenarioConfig(), RachConfig(), RunConfig()
    data = config_to_dict(scenario, rach, run)
    lines = [f"schema_version = {data['schema_version']}"]
    for name in ("scenario", "rach", "run"):
        lines.append("")
        lines.append(f"[{name}]")
        for key, value in data[name].items():
            note = "  # model choice, overridable" if key in _MODEL_CHOICE_KEYS[name] else ""
            lines.append(f"{key} = {value}{note}")
    return "\n".join(lines) + "\n"
