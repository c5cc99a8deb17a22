"""The simulated world shared by all three controllers: zone thermals,
battery, PV, optional diesel generator and the utility interface.

One Plant instance is stepped through a day (48 half-hour slots by default);
every step emits a SlotRecord carrying the full accounting, including the
power-balance residual (identically ~0 by construction, logged so the
invariant is checked end to end).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .building import HvacParams, ZoneBank, ZoneParams, hvac_power, rc_step
from .microgrid import (Battery, DieselGen, PvPanel, Tariff, diesel_step,
                        feasible_ess_power, grid_exchange, pv_power, slot_cost,
                        soc_update)
from .timeseries import PriceSeries, WeatherSeries, slice_day


@dataclass(frozen=True)
class SlotRecord:
    day: int
    slot: int
    t_out_c: float
    irradiance_kw_m2: float
    buy_price: float
    soc_kwh: float            # after the step
    p_ess_kw: float           # effective battery power (post feasibility limit)
    p_dg_kw: float            # diesel output delivered during the slot
    p_solar_kw: float
    p_hvac_kw: float
    p_net_kw: float
    p_grid_kw: float
    cost: float
    balance_residual_kw: float
    zone_temps_c: np.ndarray  # after the step
    mdots: np.ndarray
    ess_saturated: bool


class Plant:
    def __init__(self, zones: list[ZoneParams], hvac: HvacParams, battery: Battery,
                 pv: PvPanel, diesel: DieselGen | None = None, sell_ratio: float = 0.3,
                 p_const_kw: float = 0.5, slot_hours: float = 0.5,
                 substep_minutes: float = 1.0, initial_soc_kwh: float | None = None,
                 initial_zone_temp_c: float = 28.0):
        self.zones = list(zones)
        self.bank = ZoneBank.from_zones(self.zones)
        self.hvac = hvac
        self.battery = battery
        self.pv = pv
        self.diesel = diesel
        self.sell_ratio = sell_ratio
        self.p_const_kw = p_const_kw
        self.slot_hours = slot_hours
        self.substep_minutes = substep_minutes
        self.initial_soc_kwh = (0.5 * battery.capacity_kwh if initial_soc_kwh is None
                                else initial_soc_kwh)
        self.initial_zone_temp_c = initial_zone_temp_c

        self.zone_temps = np.full(self.bank.n, initial_zone_temp_c, dtype=float)
        self.soc = self.initial_soc_kwh
        self.p_dg = 0.0
        self.slot = 0
        self.day = -1
        self._t_out = np.zeros(0)
        self._irr = np.zeros(0)
        self._tariff: Tariff | None = None

    @property
    def n_zones(self) -> int:
        return self.bank.n

    @property
    def n_slots(self) -> int:
        return self._t_out.shape[0]

    def reset(self, weather: WeatherSeries, prices: PriceSeries, day: int) -> None:
        """Load one day of driving data and restore the initial conditions."""
        w = slice_day(weather, day)
        p = slice_day(prices, day)
        self._t_out = w.t_out_c
        self._irr = w.irradiance_kw_m2
        self._tariff = Tariff(p.buy_price, self.sell_ratio)
        self.zone_temps = np.full(self.bank.n, self.initial_zone_temp_c, dtype=float)
        self.soc = self.initial_soc_kwh
        self.p_dg = 0.0
        self.slot = 0
        self.day = day

    def exogenous(self, slot: int) -> tuple[float, float, float]:
        """(t_out, irradiance, buy_price) for a slot of the loaded day,
        clamped at the day end so horizon lookups never run off the data."""
        i = min(max(slot, 0), self.n_slots - 1)
        return (float(self._t_out[i]), float(self._irr[i]),
                float(self._tariff.buy_price_series[i]))

    def forecast_slices(self, horizon: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Exact future window starting at the current slot (clamped at day end)."""
        idx = np.minimum(np.arange(self.slot, self.slot + horizon), self.n_slots - 1)
        return self._t_out[idx], self._irr[idx], self._tariff.buy_price_series[idx]

    def step(self, mdots, p_ess_cmd: float, u_dg: float = 0.0) -> SlotRecord:
        """Advance one slot under the commanded airflows and battery power."""
        if self._tariff is None:
            raise RuntimeError("plant not initialised; call reset() first")
        if self.slot >= self.n_slots:
            raise RuntimeError("day is over; reset() for a new day")
        mdots = np.clip(np.asarray(mdots, dtype=float),
                        self.hvac.mdot_min, self.hvac.mdot_max)
        if mdots.shape != (self.bank.n,):
            raise ValueError(f"expected {self.bank.n} airflows, got shape {mdots.shape}")
        p_cmd = float(np.clip(p_ess_cmd, -self.battery.max_discharge_kw,
                              self.battery.max_charge_kw))
        t_out, irr, _price = self.exogenous(self.slot)

        p_solar = pv_power(self.pv, irr)
        p_hvac = hvac_power(self.hvac, mdots, zone_temps=self.zone_temps)
        p_net = p_hvac + self.p_const_kw - p_solar

        p_ess = feasible_ess_power(self.battery, self.soc, p_cmd, self.slot_hours)
        saturated = p_ess != p_cmd
        p_dg_now = self.p_dg
        p_grid = grid_exchange(p_net, p_ess, p_dg_now)
        cost = slot_cost(p_grid, self._tariff, self.slot, self.slot_hours)
        residual = (p_grid + p_solar + p_dg_now - p_ess - self.p_const_kw - p_hvac)

        self.soc = float(np.clip(soc_update(self.battery, self.soc, p_ess, self.slot_hours),
                                 0.0, self.battery.capacity_kwh))
        self.zone_temps = rc_step(self.bank, self.hvac, self.zone_temps, t_out, mdots,
                                  self.slot_hours, self.substep_minutes)
        if self.diesel is not None:
            self.p_dg = diesel_step(self.diesel, self.p_dg, u_dg)
        rec = SlotRecord(day=self.day, slot=self.slot, t_out_c=t_out,
                         irradiance_kw_m2=irr, buy_price=_price, soc_kwh=self.soc,
                         p_ess_kw=p_ess, p_dg_kw=p_dg_now, p_solar_kw=p_solar,
                         p_hvac_kw=p_hvac, p_net_kw=p_net, p_grid_kw=p_grid, cost=cost,
                         balance_residual_kw=residual,
                         zone_temps_c=self.zone_temps.copy(), mdots=mdots.copy(),
                         ess_saturated=saturated)
        self.slot += 1
        return rec
