"""MDP environments binding the plant to the two learning scenarios.

ComboEnv (partially known system): the agent dispatches the battery and tunes
the weight pair of the airflow MPC that keeps running inside the loop.
State (7): [soc, p_net, buy_price, t_in, t_out, w_c, time_of_day].
Action (3): [p_ess, w_energy_raw, w_comfort_raw].

PureEnv (unknown system): the agent commands the battery and every zone's
airflow directly.  State (2+n+2): [soc, buy_price, T_1..T_n, t_delta, t_out].
Action (1+n): [p_ess, mdot_1..mdot_n].

Episodes are one day (48 slots of 30 minutes by default).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .building import band_distance
from .microgrid import Battery, MicrogridState, pv_power
from .mpc import Forecast, MpcController
from .plant import Plant, SlotRecord
from .timeseries import PriceSeries, WeatherSeries, n_days

_W_EPS = 1e-6  # clip margin keeping decoded MPC weights inside the open (0,1)


@dataclass(frozen=True)
class RewardParams:
    penalty_epsilon: float = 0.5
    kappa_up: float = 0.5
    kappa_low: float = 0.5
    wc_min: float = 0.2
    wc_max: float = 0.8
    lambda_comfort: float = 0.15
    comfort_low_c: float = 23.0
    comfort_high_c: float = 27.0

    def __post_init__(self):
        for name in ("penalty_epsilon", "kappa_up", "kappa_low", "wc_min", "wc_max",
                     "lambda_comfort"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not self.wc_min < self.wc_max:
            raise ValueError("wc_min must be below wc_max")
        if not self.comfort_low_c < self.comfort_high_c:
            raise ValueError("comfort band must be nonempty")


def net_demand(p_hvac: float, p_const: float, p_solar: float) -> float:
    """Building net power demand; negative when PV covers everything."""
    return p_hvac + p_const - p_solar


def combo_reward(soc: float, p_net: float, w_c: float, u_t: float,
                 battery: Battery, params: RewardParams) -> float:
    """Safety-band and tuning-range penalised negative energy cost.

    ``w_c`` is the pre-clip comfort weight chosen by the agent, so the range
    penalty stays visible to learning; inside the SOC band r_b is zero.
    """
    cap = battery.capacity_kwh
    gamma = battery.safety_factor
    if soc <= gamma * cap:
        r_b = -(soc * u_t + params.penalty_epsilon * cap)
    elif soc >= (1.0 - gamma) * cap:
        r_b = -(soc * u_t + (1.0 - params.penalty_epsilon) * cap)
    else:
        r_b = 0.0
    if w_c > params.wc_max:
        r_net = -(p_net * u_t + params.kappa_up * (w_c - params.wc_max))
    elif w_c < params.wc_min:
        r_net = -(p_net * u_t + params.kappa_low * (params.wc_min - w_c))
    else:
        r_net = -(p_net * u_t)
    return r_b + r_net


def pure_reward(power_cost: float, t_delta: float, lambda_comfort: float) -> float:
    """r = -power_cost - lambda * t_delta (t_delta >= 0 by construction)."""
    if t_delta < 0:
        raise ValueError("t_delta must be >= 0")
    return -power_cost - lambda_comfort * t_delta


def pure_state_assemble(zone_temps, zone_index: int) -> np.ndarray:
    """Zone temperature vector cycled for the given (1-based) zone index.

    Index 1 keeps the natural order; index 2 yields [T_n, T_1, ..., T_{n-1}],
    and rotating n times returns the original vector.
    """
    temps = np.asarray(zone_temps, dtype=float)
    n = temps.shape[0]
    if not 1 <= zone_index <= n:
        raise ValueError(f"zone index {zone_index} outside 1..{n}")
    return np.roll(temps, zone_index - 1)


class _EnvBase:
    """Day-indexed episode runner over a Plant; subclasses fill in the MDP."""

    def __init__(self, plant: Plant, weather: WeatherSeries, prices: PriceSeries,
                 days, reward_params: RewardParams, slots_per_episode: int = 48):
        self.plant = plant
        self.weather = weather
        self.prices = prices
        available = min(n_days(weather), n_days(prices))
        self.days = [int(d) for d in days]
        for d in self.days:
            if not 0 <= d < available:
                raise ValueError(f"day {d} not available in the dataset ({available} days)")
        self.reward_params = reward_params
        self.slots_per_episode = slots_per_episode
        self._ready = False

    @property
    def slot_hours(self) -> float:
        return self.plant.slot_hours

    def reset(self, day: int) -> np.ndarray:
        if day not in self.days:
            raise ValueError(f"day {day} is not part of this environment")
        self.plant.reset(self.weather, self.prices, day)
        self._ready = True
        return self._assemble_state()

    def _require_ready(self):
        if not self._ready:
            raise RuntimeError("environment not initialised; call reset() first")

    def _assemble_state(self) -> np.ndarray:
        raise NotImplementedError


class ComboEnv(_EnvBase):
    """Scenario 2: DDPG supervises the battery and the MPC weight pair."""

    def __init__(self, plant: Plant, controller: MpcController, weather: WeatherSeries,
                 prices: PriceSeries, days, reward_params: RewardParams,
                 slots_per_episode: int = 48, initial_w_c: float = 0.5):
        super().__init__(plant, weather, prices, days, reward_params, slots_per_episode)
        if controller.integrate_battery:
            raise ValueError("the combo scenario's inner MPC is airflow-only")
        self.controller = controller
        self.initial_w_c = initial_w_c
        self._w_c = initial_w_c
        self._last_p_net = 0.0
        batt = plant.battery
        self.state_dim = 7
        self.action_dim = 3
        self.action_low = np.array([-batt.max_discharge_kw, 0.0, 0.0])
        self.action_high = np.array([batt.max_charge_kw, 1.0, 1.0])

    def reset(self, day: int) -> np.ndarray:
        self._w_c = self.initial_w_c
        self.controller.reset()
        state = super().reset(day)
        return state

    def _assemble_state(self) -> np.ndarray:
        plant = self.plant
        slot = plant.slot
        t_out, irr, price = plant.exogenous(slot)
        if slot == 0:
            self._last_p_net = net_demand(0.0, plant.p_const_kw, pv_power(plant.pv, irr))
        cr = plant.bank.criticality
        t_in = float(np.dot(cr, plant.zone_temps) / np.sum(cr))
        time_of_day = (slot % self.slots_per_episode) / self.slots_per_episode
        return np.array([plant.soc, self._last_p_net, price, t_in, t_out,
                         self._w_c, time_of_day])

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        self._require_ready()
        action = np.asarray(action, dtype=float)
        if action.shape != (self.action_dim,):
            raise ValueError(f"action of shape {action.shape} != ({self.action_dim},)")
        p_ess_cmd = float(np.clip(action[0], self.action_low[0], self.action_high[0]))
        w_e_raw, w_c_raw = float(action[1]), float(action[2])
        w_e = float(np.clip(w_e_raw, _W_EPS, 1.0 - _W_EPS))
        w_c = float(np.clip(w_c_raw, _W_EPS, 1.0 - _W_EPS))

        plant = self.plant
        t_out_h, irr_h, price_h = plant.forecast_slices(self.controller.params.horizon)
        forecast = Forecast(t_out_h, irr_h, price_h, plant.p_const_kw)
        micro = MicrogridState(soc=plant.soc, p_dg=plant.p_dg)
        mdots, _, _ = self.controller.receding_step(plant.zone_temps, micro, forecast,
                                                    weights=(w_e, w_c))
        rec = plant.step(mdots, p_ess_cmd, u_dg=0.0)
        u_t = plant.sell_ratio * rec.buy_price
        # penalty evaluated on the pre-clip w_c so the range signal survives
        reward = combo_reward(rec.soc_kwh, rec.p_net_kw, w_c_raw, u_t,
                              plant.battery, self.reward_params)
        self._w_c = w_c
        self._last_p_net = rec.p_net_kw
        done = plant.slot >= self.slots_per_episode
        info = _record_info(rec, w_e=w_e, w_c=w_c)
        return self._assemble_state(), reward, done, info


class PureEnv(_EnvBase):
    """Scenario 3: DDPG commands battery power and every zone's airflow."""

    def __init__(self, plant: Plant, weather: WeatherSeries, prices: PriceSeries,
                 days, reward_params: RewardParams, slots_per_episode: int = 48):
        super().__init__(plant, weather, prices, days, reward_params, slots_per_episode)
        n = plant.n_zones
        batt = plant.battery
        hvac = plant.hvac
        self.state_dim = 2 + n + 2
        self.action_dim = 1 + n
        self.action_low = np.concatenate([[-batt.max_discharge_kw], np.full(n, hvac.mdot_min)])
        self.action_high = np.concatenate([[batt.max_charge_kw], np.full(n, hvac.mdot_max)])

    def _t_delta(self) -> float:
        rp = self.reward_params
        return float(np.mean(band_distance(self.plant.zone_temps,
                                           rp.comfort_low_c, rp.comfort_high_c)))

    def _assemble_state(self) -> np.ndarray:
        plant = self.plant
        t_out, _, price = plant.exogenous(plant.slot)
        temps = pure_state_assemble(plant.zone_temps, 1)
        return np.concatenate([[plant.soc, price], temps, [self._t_delta(), t_out]])

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        self._require_ready()
        action = np.asarray(action, dtype=float)
        if action.shape != (self.action_dim,):
            raise ValueError(f"action of shape {action.shape} != ({self.action_dim},)")
        clipped = np.clip(action, self.action_low, self.action_high)
        rec = self.plant.step(clipped[1:], float(clipped[0]), u_dg=0.0)
        t_delta = self._t_delta()
        reward = pure_reward(rec.cost, t_delta, self.reward_params.lambda_comfort)
        done = self.plant.slot >= self.slots_per_episode
        info = _record_info(rec, t_delta=t_delta)
        return self._assemble_state(), reward, done, info


def _record_info(rec: SlotRecord, **extra) -> dict:
    info = {
        "day": rec.day, "slot": rec.slot, "t_out_c": rec.t_out_c,
        "irradiance_kw_m2": rec.irradiance_kw_m2, "buy_price": rec.buy_price,
        "soc_kwh": rec.soc_kwh, "p_ess_kw": rec.p_ess_kw, "p_dg_kw": rec.p_dg_kw,
        "p_solar_kw": rec.p_solar_kw, "p_hvac_kw": rec.p_hvac_kw,
        "p_net_kw": rec.p_net_kw, "p_grid_kw": rec.p_grid_kw, "cost": rec.cost,
        "balance_residual_kw": rec.balance_residual_kw,
        "zone_temps_c": rec.zone_temps_c, "mdots": rec.mdots,
    }
    info.update(extra)
    return info
