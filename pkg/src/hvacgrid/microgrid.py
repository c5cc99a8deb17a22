"""Microgrid component models: PV array, battery storage, diesel generator,
grid exchange and tariff arithmetic.

Sign conventions used throughout the package:

* battery power ``p_ess``: >= 0 charging, < 0 discharging (one signed axis,
  so a learning agent gets a single action dimension per battery)
* grid power ``p_grid``: > 0 import from the utility, < 0 export

Powers are kW, energies kWh, SOC is stored in kWh in [0, capacity].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PvPanel:
    """Photovoltaic array: output = area * yield * irradiance * performance."""

    area_m2: float
    yield_frac: float
    performance_ratio: float

    def __post_init__(self):
        if self.area_m2 <= 0:
            raise ValueError("PV panel area must be positive")
        if not 0.0 < self.yield_frac <= 1.0:
            raise ValueError("panel yield must be in (0, 1]")
        if not 0.0 < self.performance_ratio <= 1.0:
            raise ValueError("performance ratio must be in (0, 1]")


@dataclass(frozen=True)
class Battery:
    """Electrical storage system parameters.

    ``safety_factor`` bounds the usable band [gamma*cap, (1-gamma)*cap];
    violations are penalised by the combo reward, not forbidden physically.
    """

    capacity_kwh: float
    self_discharge_rate_per_hour: float = 0.0
    eta_charge: float = 0.95
    eta_discharge: float = 0.95
    max_charge_kw: float = 0.9
    max_discharge_kw: float = 0.9
    safety_factor: float = 0.05

    def __post_init__(self):
        if self.capacity_kwh <= 0:
            raise ValueError("battery capacity must be positive")
        if self.self_discharge_rate_per_hour < 0:
            raise ValueError("self-discharge rate must be >= 0")
        for name in ("eta_charge", "eta_discharge"):
            eta = getattr(self, name)
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"{name} must be in (0, 1]")
        if self.max_charge_kw <= 0 or self.max_discharge_kw <= 0:
            raise ValueError("charge/discharge power limits must be positive")
        if not 0.0 < self.safety_factor < 0.5:
            raise ValueError("safety factor must be in (0, 0.5)")


@dataclass(frozen=True)
class DieselGen:
    """Diesel generator with first-order command-to-delivery lag (in slots)."""

    tau: float
    max_output_kw: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("diesel time constant must be positive")
        if self.max_output_kw <= 0:
            raise ValueError("diesel max output must be positive")


@dataclass(frozen=True)
class MicrogridState:
    """Snapshot of the microgrid at one time slot."""

    soc: float
    p_dg: float = 0.0
    p_solar: float = 0.0
    p_grid: float = 0.0


@dataclass(frozen=True)
class Tariff:
    """Buy price series (currency/kWh) plus the constant sell-price ratio."""

    buy_price_series: np.ndarray
    sell_ratio: float = 0.3

    def __post_init__(self):
        prices = np.asarray(self.buy_price_series, dtype=float)
        object.__setattr__(self, "buy_price_series", prices)
        if prices.ndim != 1 or prices.size == 0:
            raise ValueError("buy price series must be a nonempty 1-D array")
        if np.any(prices < 0):
            raise ValueError("buy prices must be >= 0")
        if not 0.0 < self.sell_ratio <= 1.0:
            raise ValueError("sell ratio must be in (0, 1]")


def pv_power(panel: PvPanel, irradiance_kw_m2: float) -> float:
    """PV output in kW for the given plane-of-array irradiance (kW/m^2)."""
    if irradiance_kw_m2 < 0:
        raise ValueError("irradiance must be >= 0")
    return panel.area_m2 * panel.yield_frac * irradiance_kw_m2 * panel.performance_ratio


def soc_update(batt: Battery, soc, p_ess, dt_hours: float):
    """Unclamped SOC update; accepts numpy arrays for batched rollouts.

    Charging stores eta_charge * p * dt, discharging drains p * dt / eta_discharge,
    so a round trip loses energy whenever eta_charge * eta_discharge < 1.
    """
    soc_sd = (1.0 - batt.self_discharge_rate_per_hour * dt_hours) * np.asarray(soc, dtype=float)
    p = np.asarray(p_ess, dtype=float)
    charge = np.maximum(p, 0.0)
    discharge = np.maximum(-p, 0.0)
    return soc_sd + batt.eta_charge * charge * dt_hours - discharge * dt_hours / batt.eta_discharge


def battery_step(batt: Battery, soc: float, p_ess: float, dt_hours: float) -> tuple[float, bool]:
    """One storage step; returns (new_soc, saturated).

    ``p_ess`` must lie within [-max_discharge, +max_charge]; the result is
    clamped to [0, capacity] and ``saturated`` reports whether clamping fired.
    """
    if not -batt.max_discharge_kw <= p_ess <= batt.max_charge_kw:
        raise ValueError(
            f"p_ess={p_ess} outside [-{batt.max_discharge_kw}, {batt.max_charge_kw}]"
        )
    raw = float(soc_update(batt, soc, p_ess, dt_hours))
    clamped = min(max(raw, 0.0), batt.capacity_kwh)
    return clamped, clamped != raw


def feasible_ess_power(batt: Battery, soc: float, p_ess: float, dt_hours: float) -> float:
    """Largest-magnitude battery power (same sign as ``p_ess``) for which the
    SOC update stays inside [0, capacity].  Used by the plant so the power
    balance is written with the power the battery can actually absorb/deliver.
    """
    soc_sd = (1.0 - batt.self_discharge_rate_per_hour * dt_hours) * soc
    charge_cap = max(batt.capacity_kwh - soc_sd, 0.0) / (batt.eta_charge * dt_hours)
    discharge_cap = max(soc_sd, 0.0) * batt.eta_discharge / dt_hours
    return float(np.clip(p_ess, -discharge_cap, charge_cap))


def diesel_step(dg: DieselGen, p_dg: float, u_dg: float) -> float:
    """Next diesel output for one slot: -p/tau + u/tau, clamped to [0, max].

    The literal recurrence has the (documented, intentionally uncorrected)
    fixed point u / (tau + 1) under a constant command.
    """
    if u_dg < 0:
        raise ValueError("diesel command must be >= 0")
    if u_dg > dg.max_output_kw:
        raise ValueError(f"diesel command {u_dg} exceeds max output {dg.max_output_kw}")
    nxt = -p_dg / dg.tau + u_dg / dg.tau
    return min(max(nxt, 0.0), dg.max_output_kw)


def grid_exchange(p_net: float, p_ess: float, p_dg: float) -> float:
    """Utility exchange closing the bus balance:

    p_grid + p_solar + p_dg - p_ess == p_const + p_hvac
    holds identically with p_net = p_hvac + p_const - p_solar.
    """
    return p_net + p_ess - p_dg


def slot_cost(p_grid: float, tariff: Tariff, t: int, dt_hours: float) -> float:
    """Cost of one slot's utility exchange: buy at v_t, sell at sigma * v_t."""
    n = tariff.buy_price_series.shape[0]
    if not 0 <= t < n:
        raise ValueError(f"slot index {t} outside tariff series of length {n}")
    v = float(tariff.buy_price_series[t])
    bought = max(p_grid, 0.0) * dt_hours
    sold = max(-p_grid, 0.0) * dt_hours
    return v * bought - tariff.sell_ratio * v * sold


def soc_in_safe_band(batt: Battery, soc: float) -> bool:
    """True iff gamma*cap <= soc <= (1-gamma)*cap (boundaries inclusive)."""
    lo = batt.safety_factor * batt.capacity_kwh
    hi = (1.0 - batt.safety_factor) * batt.capacity_kwh
    return lo <= soc <= hi
