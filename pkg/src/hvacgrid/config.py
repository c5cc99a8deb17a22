"""Experiment configuration: a versioned YAML tree with typed defaults.

Every run directory gets a snapshot of the fully resolved configuration, which
is sufficient to bit-reproduce the run.  All numeric defaults that the source
material leaves open are invented and marked as such in the README.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

CONFIG_VERSION = 1
SCENARIOS = ("mpc", "combo", "drl")
DEFAULT_EPOCHS = {"combo": 50, "drl": 100}
DATA_DIR_ENV_VAR = "HVACGRID_DATA_DIR"


class ConfigError(ValueError):
    """Invalid configuration; message enumerates every problem found."""


@dataclass(frozen=True)
class DataConfig:
    weather: str = "bundled"
    prices: str = "bundled"
    train_days: int = 20
    test_days: int = 5


@dataclass(frozen=True)
class BuildingConfig:
    n_zones: int = 7
    thermal_capacitance_kwh_per_c: list = field(default_factory=lambda: [2.5])
    envelope_resistance_c_per_kw: list = field(default_factory=lambda: [6.0])
    internal_gain_kw: list = field(default_factory=lambda: [0.1])
    desired_temp_c: list = field(default_factory=lambda: [25.0])
    criticality: list = field(default_factory=lambda: [0.6])
    initial_zone_temp_c: float = 29.0


@dataclass(frozen=True)
class HvacConfig:
    k_fan: float = 0.08
    cop: float = 3.0
    cp_air_kj_per_kg_c: float = 1.005
    supply_temp_c: float = 15.0
    return_temp_c: float = 27.0
    mdot_min_kg_s: float = 0.0
    mdot_max_kg_s: float = 0.5


@dataclass(frozen=True)
class PvConfig:
    area_m2: float = 20.0
    yield_frac: float = 0.15
    performance_ratio: float = 0.75


@dataclass(frozen=True)
class BatteryConfig:
    capacity_kwh: float = 6.0
    self_discharge_rate_per_hour: float = 0.001
    eta_charge: float = 0.95
    eta_discharge: float = 0.95
    max_charge_kw: float = 0.9
    max_discharge_kw: float = 0.9
    safety_factor: float = 0.05


@dataclass(frozen=True)
class DieselConfig:
    enabled: bool = False
    tau_slots: float = 2.0
    max_output_kw: float = 2.0
    price_threshold: float = 0.12


@dataclass(frozen=True)
class MicrogridConfig:
    pv: PvConfig = field(default_factory=PvConfig)
    battery: BatteryConfig = field(default_factory=BatteryConfig)
    diesel: DieselConfig = field(default_factory=DieselConfig)
    sell_ratio: float = 0.3
    p_const_kw: float = 0.5
    initial_soc_frac: float = 0.5


@dataclass(frozen=True)
class MpcConfig:
    w_energy: float = 0.7
    w_comfort: float = 0.3
    horizon: int = 4
    iters: int = 40
    step_size: float = 0.2
    wc_min: float = 0.2
    wc_max: float = 0.8
    eps_comfort: float = 0.1
    substep_minutes: float = 1.0
    integrate_battery: bool = True   # scenario 1 only; combo's inner MPC is airflow-only


@dataclass(frozen=True)
class OuConfig:
    theta: float = 0.15
    sigma: float = 0.2
    mu: float = 0.0
    scale_initial: float = 0.35
    scale_final: float = 0.05


@dataclass(frozen=True)
class DdpgConfig:
    hidden: list = field(default_factory=lambda: [128, 128])
    lr: float = 0.001
    tau: float = 0.001
    discount: float = 0.99
    batch_size: int = 128
    buffer_capacity: int = 100_000
    warmup: int = 128
    bn_momentum: float = 0.01
    ou: OuConfig = field(default_factory=OuConfig)


@dataclass(frozen=True)
class RewardConfig:
    penalty_epsilon: float = 0.5
    kappa_up: float = 0.5
    kappa_low: float = 0.5
    lambda_comfort: float = 0.15
    comfort_low_c: float = 23.0
    comfort_high_c: float = 27.0


@dataclass(frozen=True)
class MetricsConfig:
    rmse_window_hours: float = 3.0


@dataclass(frozen=True)
class ExperimentConfig:
    config_version: int = CONFIG_VERSION
    scenario: str = "mpc"
    seed: int = 0
    epochs: int | None = None     # None -> per-scenario default (50 combo / 100 drl)
    slot_hours: float = 0.5
    slots_per_episode: int = 48
    output_dir: str = "runs"
    data: DataConfig = field(default_factory=DataConfig)
    building: BuildingConfig = field(default_factory=BuildingConfig)
    hvac: HvacConfig = field(default_factory=HvacConfig)
    microgrid: MicrogridConfig = field(default_factory=MicrogridConfig)
    mpc: MpcConfig = field(default_factory=MpcConfig)
    ddpg: DdpgConfig = field(default_factory=DdpgConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)

    def effective_epochs(self) -> int:
        if self.epochs is not None:
            return self.epochs
        return DEFAULT_EPOCHS.get(self.scenario, 1)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTION_TYPES = {
    "data": DataConfig,
    "building": BuildingConfig,
    "hvac": HvacConfig,
    "microgrid": MicrogridConfig,
    "mpc": MpcConfig,
    "ddpg": DdpgConfig,
    "reward": RewardConfig,
    "metrics": MetricsConfig,
    "pv": PvConfig,
    "battery": BatteryConfig,
    "diesel": DieselConfig,
    "ou": OuConfig,
}


def _build_section(cls, raw: dict, path: str, errors: list[str]):
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            errors.append(f"{path}{key}: unknown key")
            continue
        if isinstance(value, dict):
            sub_cls = _SECTION_TYPES.get(key)
            if sub_cls is None:
                errors.append(f"{path}{key}: does not take a mapping")
                continue
            kwargs[key] = _build_section(sub_cls, value, f"{path}{key}.", errors)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        errors.append(f"{path.rstrip('.') or 'config'}: {exc}")
        return cls()


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a validated ExperimentConfig; raises ConfigError listing every issue."""
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    cfg = _build_section(ExperimentConfig, raw, "", errors)
    errors.extend(validate(cfg))
    if errors:
        raise ConfigError("invalid configuration:\n  - " + "\n  - ".join(errors))
    return cfg


def validate(cfg: ExperimentConfig) -> list[str]:
    """Cross-field checks; returns the list of problems (empty when valid)."""
    errors: list[str] = []
    if cfg.config_version != CONFIG_VERSION:
        errors.append(f"config_version must be {CONFIG_VERSION}")
    if cfg.scenario not in SCENARIOS:
        errors.append(f"scenario must be one of {SCENARIOS}")
    if cfg.epochs is not None and cfg.epochs <= 0:
        errors.append("epochs must be > 0")
    if cfg.slot_hours <= 0 or abs(24.0 / cfg.slot_hours - round(24.0 / cfg.slot_hours)) > 1e-9:
        errors.append("slot_hours must divide a day")
    if cfg.slots_per_episode != int(round(24.0 / cfg.slot_hours)):
        errors.append("slots_per_episode must equal one day of slots")
    if cfg.data.train_days <= 0 or cfg.data.test_days <= 0:
        errors.append("train_days and test_days must be > 0")
    for name in ("weather", "prices"):
        src = getattr(cfg.data, name)
        if src != "bundled" and not Path(resolve_data_path(src)).exists():
            errors.append(f"data.{name}: file not found: {src}")
    b = cfg.building
    if b.n_zones < 1:
        errors.append("building.n_zones must be >= 1")
    for name in ("thermal_capacitance_kwh_per_c", "envelope_resistance_c_per_kw",
                 "internal_gain_kw", "desired_temp_c", "criticality"):
        vals = getattr(b, name)
        if not isinstance(vals, (list, tuple)) or len(vals) not in (1, b.n_zones):
            errors.append(f"building.{name}: need 1 or n_zones values")
    if not 0.0 <= cfg.microgrid.initial_soc_frac <= 1.0:
        errors.append("microgrid.initial_soc_frac must be in [0, 1]")
    return errors


def resolve_data_path(src: str) -> str:
    """Apply the data-directory environment override to a relative path."""
    base = os.environ.get(DATA_DIR_ENV_VAR)
    if base and not os.path.isabs(src) and src != "bundled":
        return str(Path(base) / src)
    return src


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Load a YAML config file (or pure defaults) and apply flag overrides."""
    raw: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        with open(p) as fh:
            loaded = yaml.safe_load(fh)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{p}: config root must be a mapping")
        raw = loaded
    cfg = config_from_dict(raw)
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg


def apply_overrides(cfg: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Apply CLI overrides (already typed) on top of a loaded config."""
    top: dict = {}
    data_over: dict = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("weather", "prices", "train_days", "test_days"):
            data_over[key] = value
        elif key in ("scenario", "seed", "epochs", "output_dir", "slot_hours"):
            top[key] = value
        else:
            raise ConfigError(f"unknown override: {key}")
    if data_over:
        top["data"] = replace(cfg.data, **data_over)
    cfg = replace(cfg, **top)
    errors = validate(cfg)
    if errors:
        raise ConfigError("invalid configuration:\n  - " + "\n  - ".join(errors))
    return cfg


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=True)


def per_zone(values, n_zones: int) -> list[float]:
    """Broadcast a 1-element list to n_zones, or pass through a full list."""
    vals = list(values)
    if len(vals) == 1:
        return [float(vals[0])] * n_zones
    if len(vals) != n_zones:
        raise ConfigError(f"expected 1 or {n_zones} values, got {len(vals)}")
    return [float(v) for v in vals]
