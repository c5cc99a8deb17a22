"""Per-zone thermal dynamics and HVAC electrical power.

Each zone is a single thermal capacitance behind an envelope resistance
(no inter-zone coupling).  Supply air at ``supply_temp_c`` removes heat at
cp * mdot * (T_zone - T_supply); the electrical load is a quadratic fan law
plus a chiller term linear in total airflow.

Units: C in kWh/degC, R in degC/kW, cp in kJ/(kg*degC) so that
cp * mdot[kg/s] * dT[degC] is directly kW.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ZoneParams:
    thermal_capacitance: float   # kWh/degC
    envelope_resistance: float   # degC/kW
    internal_gain_kw: float
    desired_temp_c: float
    criticality: float           # relative comfort priority, in (0,1)

    def __post_init__(self):
        if self.thermal_capacitance <= 0:
            raise ValueError("thermal capacitance must be positive")
        if self.envelope_resistance <= 0:
            raise ValueError("envelope resistance must be positive")
        if self.internal_gain_kw < 0:
            raise ValueError("internal gain must be >= 0")
        if not 0.0 < self.criticality < 1.0:
            raise ValueError("criticality must be in (0, 1)")


@dataclass(frozen=True)
class HvacParams:
    k_fan: float                 # kW per (kg/s)^2, fan efficiency + duct losses
    cop: float                   # chiller coefficient of performance
    cp_air: float = 1.005        # kJ/(kg*degC)
    supply_temp_c: float = 15.0  # chilled air leaving the chiller
    return_temp_c: float = 27.0  # fallback air-entering-chiller temperature
    mdot_min: float = 0.0        # per-zone airflow bounds, kg/s
    mdot_max: float = 0.5

    def __post_init__(self):
        if self.k_fan <= 0 or self.cop <= 0 or self.cp_air <= 0:
            raise ValueError("k_fan, cop and cp_air must be positive")
        if self.mdot_min < 0 or self.mdot_min >= self.mdot_max:
            raise ValueError("airflow bounds require 0 <= mdot_min < mdot_max")
        if self.supply_temp_c >= self.return_temp_c:
            raise ValueError("supply temperature must be below return temperature")


@dataclass
class BuildingState:
    zone_temps_c: np.ndarray
    n_zones: int = 0

    def __post_init__(self):
        self.zone_temps_c = np.asarray(self.zone_temps_c, dtype=float)
        if self.n_zones == 0:
            self.n_zones = self.zone_temps_c.shape[0]
        if self.zone_temps_c.shape != (self.n_zones,):
            raise ValueError("zone temperature vector length must equal n_zones")
        if not np.all(np.isfinite(self.zone_temps_c)):
            raise ValueError("zone temperatures must be finite")


@dataclass(frozen=True)
class ZoneBank:
    """Vectorised view over a list of ZoneParams (arrays indexed by zone)."""

    c: np.ndarray
    r: np.ndarray
    q: np.ndarray
    desired: np.ndarray
    criticality: np.ndarray

    @classmethod
    def from_zones(cls, zones: list[ZoneParams]) -> "ZoneBank":
        return cls(
            c=np.array([z.thermal_capacitance for z in zones]),
            r=np.array([z.envelope_resistance for z in zones]),
            q=np.array([z.internal_gain_kw for z in zones]),
            desired=np.array([z.desired_temp_c for z in zones]),
            criticality=np.array([z.criticality for z in zones]),
        )

    @property
    def n(self) -> int:
        return self.c.shape[0]


def rc_step(bank: ZoneBank, hvac: HvacParams, temps, t_out, mdots,
            dt_hours: float, substep_minutes: float = 1.0):
    """Advance zone temperatures one slot of forward-Euler substeps.

    The per-slot ODE is linear (constant mdot and T_out within the slot), so
    the m Euler substeps collapse to the closed form T*f + (c/k)*(1-f) with
    f = (1 - h*k)^m -- bit-for-bit the same map as iterating, but O(1).
    Accepts batched arrays: temps/mdots of shape [..., n].
    """
    h = substep_minutes / 60.0
    m = int(round(dt_hours / h))
    if m < 1 or abs(m * h - dt_hours) > 1e-9:
        raise ValueError("slot must be an integer number of substeps")
    temps = np.asarray(temps, dtype=float)
    mdots = np.asarray(mdots, dtype=float)
    k = (1.0 / bank.r + hvac.cp_air * mdots) / bank.c              # 1/h
    drive = (np.asarray(t_out) / bank.r + hvac.cp_air * mdots * hvac.supply_temp_c
             + bank.q) / bank.c
    f = (1.0 - h * k) ** m
    return temps * f + (drive / k) * (1.0 - f)


def zone_step(zone: ZoneParams, hvac: HvacParams, t_zone: float, t_out: float,
              mdot: float, dt_hours: float, substep_minutes: float = 1.0) -> float:
    """Single-zone slot update; validates the airflow bound."""
    if not hvac.mdot_min - 1e-12 <= mdot <= hvac.mdot_max + 1e-12:
        raise ValueError(f"mdot={mdot} outside [{hvac.mdot_min}, {hvac.mdot_max}]")
    bank = ZoneBank.from_zones([zone])
    out = rc_step(bank, hvac, np.array([t_zone]), t_out, np.array([mdot]),
                  dt_hours, substep_minutes)
    return float(out[0])


def fan_power(hvac: HvacParams, mdot_total: float) -> float:
    """Fan electrical power, quadratic in total supply airflow."""
    return hvac.k_fan * mdot_total ** 2


def chiller_power(hvac: HvacParams, mdot_total: float, return_temp_c: float | None = None) -> float:
    """Chiller electrical power (cp/cop) * mdot * (T_return - T_supply)."""
    t_s = hvac.return_temp_c if return_temp_c is None else return_temp_c
    return (hvac.cp_air / hvac.cop) * mdot_total * (t_s - hvac.supply_temp_c)


def return_air_temp(hvac: HvacParams, mdots, zone_temps) -> float:
    """Airflow-weighted mean zone temperature; configured constant at zero flow."""
    mdots = np.asarray(mdots, dtype=float)
    total = float(np.sum(mdots))
    if total <= 0.0:
        return hvac.return_temp_c
    return float(np.dot(mdots, np.asarray(zone_temps, dtype=float)) / total)


def hvac_power(hvac: HvacParams, mdots, zone_temps=None) -> float:
    """Total HVAC electrical power (fan + chiller) for the per-zone airflows.

    When ``zone_temps`` is given, the chiller sees the airflow-weighted mean
    zone temperature as its return-air temperature; otherwise the configured
    constant is used.
    """
    mdots = np.asarray(mdots, dtype=float)
    if np.any(mdots < hvac.mdot_min - 1e-12) or np.any(mdots > hvac.mdot_max + 1e-12):
        raise ValueError("airflow outside configured per-zone bounds")
    total = float(np.sum(mdots))
    t_s = hvac.return_temp_c if zone_temps is None else return_air_temp(hvac, mdots, zone_temps)
    return fan_power(hvac, total) + chiller_power(hvac, total, t_s)


def comfort_factor(traj, desired: float, eps_comfort: float = 0.1) -> float:
    """Sum of inverse absolute setpoint deviations over a temperature trajectory.

    Larger is more comfortable; the eps clamp caps the singularity at the
    setpoint so the factor is always finite.
    """
    traj = np.asarray(traj, dtype=float)
    if traj.size == 0:
        raise ValueError("comfort factor needs a nonempty trajectory")
    if eps_comfort <= 0:
        raise ValueError("eps_comfort must be positive")
    return float(np.sum(1.0 / np.maximum(np.abs(desired - traj), eps_comfort)))


def band_distance(temps, low_c: float, high_c: float):
    """Per-zone distance to the comfort band [low, high]; zero inside."""
    temps = np.asarray(temps, dtype=float)
    return np.maximum(temps - high_c, 0.0) + np.maximum(low_c - temps, 0.0)
