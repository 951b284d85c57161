"""
Configuration system for the owc-alloc simulator
Simulation settings (TOML file + environment) and selective activation of tools
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Set

import tomlkit
from dotenv import load_dotenv
from pydantic import AliasChoices, BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from tomlkit.exceptions import ParseError as TomlParseError

from .errors import ConfigurationError, ParseError

# Load environment variables from project root
project_root = Path(__file__).resolve().parents[3]
load_dotenv(project_root / ".env")


class RoomConfig(BaseModel):
    """Room geometry, AP grid and number of users"""

    width_m: float = 5.0
    depth_m: float = 5.0
    height_m: float = 3.0
    plane_gap_m: float = 2.15
    ap_rows: int = 4
    ap_cols: int = 4
    users: int = 10

    @model_validator(mode="after")
    def _check_geometry(self):
        if min(self.width_m, self.depth_m, self.height_m) <= 0:
            raise ValueError("room dimensions must be positive")
        if not 0 < self.plane_gap_m < self.height_m:
            raise ValueError("plane_gap_m must lie between 0 and height_m")
        if self.ap_rows < 1 or self.ap_cols < 1 or self.ap_rows * self.ap_cols < 2:
            raise ValueError("the AP grid needs at least two APs")
        if self.users < 1:
            raise ValueError("users must be at least 1")
        return self

    @property
    def n_aps(self) -> int:
        return self.ap_rows * self.ap_cols


class ChannelConfig(BaseModel):
    """VCSEL, detector and noise parameters ([channel] section)"""

    wavelength_nm: float = Field(830.0, gt=0)
    beam_waist_um: float = Field(10.0, gt=0)
    tx_power_mw: float = Field(10.0, gt=0)
    bandwidth_ghz: float = Field(5.0, gt=0)
    rin_db_hz: float = Field(-155.0, lt=0)
    responsivity_a_w: float = Field(0.53, gt=0)
    # A_rec; each photodiode gets A_rec / photodiodes (15 mm^2 by default)
    detector_area_mm2: float = Field(240.0, gt=0)
    photodiodes: int = Field(16, ge=1)
    fov_deg: float = Field(45.0, gt=0, le=90)
    mode_tilt_deg: float = Field(25.0, ge=0, lt=90)
    load_ohms: float = Field(50.0, gt=0)
    temperature_k: float = Field(300.0, gt=0)
    filter_gain: float = Field(1.0, gt=0)
    # read and written as eq3_literal in configuration files
    axial_literal: bool = Field(
        False,
        validation_alias=AliasChoices("eq3_literal", "axial_literal"),
        serialization_alias="eq3_literal",
    )


class BiaConfig(BaseModel):
    """Stream power and coverage threshold used by the rate model ([bia] section)"""

    # electrical power per stream referred to the photodiode output (A^2)
    stream_power: float = Field(2.0e-2, gt=0)
    coverage_snr_db: float = 0.0


class SolverConfig(BaseModel):
    """Dual decomposition and exhaustive search parameters ([solver] section)"""

    step_a: float = Field(0.1, gt=0)
    step_b: float = Field(10.0, gt=0)
    initial_multiplier: float = Field(0.1, ge=0)
    tol_rel: float = Field(1e-4, gt=0)
    feasibility_tol_rel: float = Field(1e-6, gt=0)
    max_iters: int = Field(5000, ge=1)
    repair_every: int = Field(10, ge=1)
    grid_step: float = Field(0.01, gt=0)
    grid_budget: float = Field(1e8, gt=0)


class DatasetConfig(BaseModel):
    """Requirement sampling ranges and dataset production ([dataset] section)"""

    e_max_low: float = Field(1.0, gt=0)
    e_max_high: float = Field(5.0, gt=0)
    e_min_low: float = Field(0.1, ge=0)
    e_min_high_fraction: float = Field(0.5, gt=0, le=1)
    capacity_low: float = Field(1.0, gt=0)
    capacity_high: float = Field(3.0, gt=0)
    randomize_weights: bool = False
    weight_low: float = Field(0.5, gt=0)
    weight_high: float = Field(2.0, gt=0)
    placement: Literal["uniform", "coverage"] = "uniform"
    max_retries: int = Field(100, ge=1)
    beam_waists_um: List[float] = Field(default_factory=list)
    train_fraction: float = Field(0.9, gt=0, lt=1)
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.e_max_low > self.e_max_high:
            raise ValueError("e_max_low must not exceed e_max_high")
        if self.capacity_low > self.capacity_high:
            raise ValueError("capacity_low must not exceed capacity_high")
        if self.weight_low > self.weight_high:
            raise ValueError("weight_low must not exceed weight_high")
        if any(w <= 0 for w in self.beam_waists_um):
            raise ValueError("beam_waists_um entries must be positive")
        return self


class SurrogateConfig(BaseModel):
    """Network architecture and optimizer ([surrogate] section)"""

    arch: str = "conv1d:16:3,conv1d:16:3,dense:64"
    output_layout: Literal["totals", "full"] = "totals"
    learning_rate: float = Field(1e-3, ge=0)
    momentum: float = Field(0.9, ge=0, lt=1)
    batch_size: int = Field(32, ge=1)
    epochs: int = Field(50, ge=1)
    refine: int = Field(5, ge=0)


class ExperimentsConfig(BaseModel):
    """Sweeps, seeds and output locations ([experiments] section)"""

    beam_waists_um: List[float] = Field(default_factory=lambda: [10.0, 15.0, 20.0, 25.0, 30.0])
    dataset_sizes: List[int] = Field(default_factory=lambda: [5000, 10000])
    seeds: List[int] = Field(default_factory=lambda: [1, 2, 3])
    cdf_drops: int = Field(100, ge=1)
    sweep_drops: int = Field(10, ge=1)
    output_dir: str = "results"
    dataset_path: Optional[str] = None
    weights_path: Optional[str] = None
    workers: int = Field(1, ge=1)
    absolute_rates: bool = False

    @field_validator("beam_waists_um", "dataset_sizes", "seeds")
    @classmethod
    def _non_empty(cls, value):
        if not value:
            raise ValueError("sweep lists must not be empty")
        return value

    @field_validator("dataset_sizes")
    @classmethod
    def _positive_sizes(cls, value):
        if any(n < 2 for n in value):
            raise ValueError("dataset sizes must be at least 2")
        return value


class Settings(BaseSettings):
    """Complete simulation settings"""

    model_config = SettingsConfigDict(env_prefix="OWC_", env_nested_delimiter="__", extra="ignore")

    seed: int = 0
    log_level: str = "INFO"
    room: RoomConfig = Field(default_factory=RoomConfig)
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    bia: BiaConfig = Field(default_factory=BiaConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    surrogate: SurrogateConfig = Field(default_factory=SurrogateConfig)
    experiments: ExperimentsConfig = Field(default_factory=ExperimentsConfig)

    def with_beam_waist(self, beam_waist_um: float) -> "Settings":
        """Copy of these settings with another VCSEL beam waist"""
        channel = self.channel.model_copy(update={"beam_waist_um": float(beam_waist_um)})
        return self.model_copy(update={"channel": channel})


CONFIG_SECTIONS = ("room", "channel", "bia", "solver", "dataset", "surrogate", "experiments")


# Scenario presets applied underneath the configuration file
SCENARIO_PRESETS: Dict[str, Dict[str, Any]] = {
    "office": {
        "description": "5m x 5m x 3m room, 16 VCSELs on a 4x4 grid, 10 users",
        "overrides": {},
    },
    "desk": {
        "description": "Two APs and three users, small enough for exhaustive search",
        "overrides": {
            "room": {"ap_rows": 1, "ap_cols": 2, "users": 3},
            "channel": {"photodiodes": 2, "detector_area_mm2": 30.0},
            "experiments": {"dataset_sizes": [200, 400], "sweep_drops": 5},
            "surrogate": {"epochs": 20},
        },
    },
    "quick": {
        "description": "2x2 AP grid and four users for fast end-to-end runs",
        "overrides": {
            "room": {"ap_rows": 2, "ap_cols": 2, "users": 4},
            "channel": {"photodiodes": 4, "detector_area_mm2": 60.0},
            "experiments": {"dataset_sizes": [500, 1000], "sweep_drops": 5},
            "surrogate": {"epochs": 20},
        },
    },
}


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: str) -> Dict[str, Any]:
    """Read a TOML configuration file into plain dictionaries"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read configuration file: {e}", key=str(path)) from e

    try:
        document = tomlkit.parse(text)
    except TomlParseError as e:
        raise ParseError(str(e), path=str(path), line=getattr(e, "line", None)) from e

    data = document.unwrap()
    for key, value in data.items():
        if isinstance(value, dict) and key not in CONFIG_SECTIONS:
            raise ConfigurationError(f"unknown section [{key}]", key=key)
    return data


def load_settings(
    path: Optional[str] = None,
    profile: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Settings:
    """
    Build the effective settings

    Precedence (highest first): explicit overrides, configuration file,
    scenario preset, environment (OWC_*), defaults.
    """
    profile = profile or os.getenv("OWC_PROFILE") or "office"
    path = path or os.getenv("OWC_CONFIG") or None

    preset = get_scenario_preset(profile)
    if preset is None:
        raise ConfigurationError(f"unknown profile '{profile}'", key="profile")

    data: Dict[str, Any] = {}
    if path:
        data = read_config_file(path)
    data = _deep_merge(preset["overrides"], data)
    if overrides:
        data = _deep_merge(data, overrides)

    try:
        return Settings(**data)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first.get("loc", ()))
        raise ConfigurationError(first.get("msg", "invalid value"), key=key or None) from e


def settings_to_toml(settings: Settings) -> str:
    """Render settings as a TOML document"""
    data = settings.model_dump(exclude_none=True, by_alias=True)
    return tomlkit.dumps(data)


def get_scenario_preset(name: str) -> Optional[Dict[str, Any]]:
    """Get a scenario preset by name"""
    return SCENARIO_PRESETS.get(name)


class ToolConfig:
    """Configuration manager for tool activation"""

    def __init__(self):
        self.enabled_modules: Set[str] = set()
        self.enabled_tools: Set[str] = set()
        self.disabled_tools: Set[str] = set()
        self._load_configuration()

    @staticmethod
    def _split(value: str) -> Set[str]:
        return set(item.strip() for item in value.split(",") if item.strip())

    def _load_configuration(self):
        """Load configuration from environment variables"""
        self.enabled_modules = self._split(os.getenv("OWC_ENABLED_MODULES", ""))
        self.enabled_tools = self._split(os.getenv("OWC_ENABLED_TOOLS", ""))
        self.disabled_tools = self._split(os.getenv("OWC_DISABLED_TOOLS", ""))

        disabled_modules = self._split(os.getenv("OWC_DISABLED_MODULES", ""))
        if disabled_modules and self.enabled_modules:
            self.enabled_modules -= disabled_modules
        self.disabled_modules = disabled_modules

    def is_module_enabled(self, module_name: str) -> bool:
        """Check if a module is enabled"""
        if module_name in self.disabled_modules:
            return False
        if not self.enabled_modules:
            return True
        return module_name in self.enabled_modules

    def is_tool_enabled(self, tool_name: str) -> bool:
        """Check if a tool is enabled"""
        if tool_name in self.disabled_tools:
            return False
        if self.enabled_tools:
            return tool_name in self.enabled_tools
        return True

    def get_configuration_summary(self) -> Dict[str, Any]:
        """Get a summary of the current configuration"""
        return {
            "enabled_modules": sorted(self.enabled_modules),
            "enabled_tools": sorted(self.enabled_tools),
            "disabled_tools": sorted(self.disabled_tools),
            "configuration_mode": "selective" if (self.enabled_modules or self.enabled_tools) else "all",
        }


# Predefined tool sets for common use cases
PREDEFINED_CONFIGS = {
    "full": {
        "description": "Every module and tool",
    },
    "solver": {
        "description": "Channel, rate and allocation tools only",
        "enabled_modules": ["channel", "bia", "allocator"],
    },
    "experiments": {
        "description": "Dataset, training and experiment tools",
        "enabled_modules": ["dataset", "surrogate", "harness"],
    },
    "read_only": {
        "description": "Tools that only compute and report, writing no files",
        "enabled_tools": [
            "compute_channel", "compute_rates",
            "get_configuration", "list_configurations",
        ],
    },
}


def apply_predefined_config(config_name: str) -> bool:
    """Export a predefined tool set to the environment; False when unknown"""
    predefined = PREDEFINED_CONFIGS.get(config_name)
    if predefined is None:
        return False
    if "enabled_modules" in predefined:
        os.environ["OWC_ENABLED_MODULES"] = ",".join(predefined["enabled_modules"])
    if "enabled_tools" in predefined:
        os.environ["OWC_ENABLED_TOOLS"] = ",".join(predefined["enabled_tools"])
    if "disabled_tools" in predefined:
        os.environ["OWC_DISABLED_TOOLS"] = ",".join(predefined["disabled_tools"])
    return True


def list_predefined_configs() -> Dict[str, str]:
    """List all available predefined tool sets"""
    return {name: config["description"] for name, config in PREDEFINED_CONFIGS.items()}
