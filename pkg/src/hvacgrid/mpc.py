"""Receding-horizon airflow (and, in integrated mode, battery) optimisation.

The objective trades HVAC energy against per-zone comfort:

    w_energy * E_H  +  w_comfort * sum_i CR_i / CF_i

with E_H the fan+chiller energy over the horizon and CF_i the comfort factor
of zone i over the predicted trajectory.  Integrated mode (scenario 1) adds
the grid cost of every horizon slot and optimises the battery dispatch jointly.

Solver: projected gradient descent over the stacked decision trajectory with
batched central finite differences, Armijo backtracking and box projection.
The prediction model is the plant's own RC zone model, so scenario 1 is a
completely determined control loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .building import HvacParams, ZoneBank, ZoneParams, chiller_power, fan_power, rc_step
from .microgrid import Battery, MicrogridState, PvPanel, pv_power, soc_update


@dataclass(frozen=True)
class MpcParams:
    w_energy: float
    w_comfort: float
    horizon: int = 4
    slot_hours: float = 0.5
    iters: int = 40
    step_size: float = 0.2
    wc_min: float = 0.2
    wc_max: float = 0.8
    eps_comfort: float = 0.1
    substep_minutes: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.w_energy < 1.0 or not 0.0 < self.w_comfort < 1.0:
            raise ValueError("weights must lie in (0, 1)")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.iters < 1 or self.step_size <= 0:
            raise ValueError("iters and step_size must be positive")
        if not self.wc_min < self.wc_max:
            raise ValueError("wc_min must be below wc_max")


@dataclass
class MpcPlan:
    mdots: np.ndarray            # horizon x n_zones, kg/s
    p_ess: np.ndarray | None     # horizon, kW (integrated mode only)
    objective_value: float
    iters_used: int = 0


@dataclass(frozen=True)
class Forecast:
    """Exact future window handed to the controller (no forecast error model)."""

    t_out_c: np.ndarray
    irradiance_kw_m2: np.ndarray
    buy_price: np.ndarray
    p_const_kw: float = 0.0

    def __post_init__(self):
        for name in ("t_out_c", "irradiance_kw_m2", "buy_price"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    def __len__(self) -> int:
        return min(len(self.t_out_c), len(self.irradiance_kw_m2), len(self.buy_price))


def _eq6_terms(params: MpcParams, bank: ZoneBank, hvac: HvacParams,
               trajs: np.ndarray, mdots: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched (energy_kwh, comfort_penalty) for trajs/mdots of shape [B,H,n]."""
    total = mdots.sum(axis=2)                                     # [B,H]
    p_hvac = hvac.k_fan * total ** 2 + (hvac.cp_air / hvac.cop) * total * (
        hvac.return_temp_c - hvac.supply_temp_c)
    energy = p_hvac.sum(axis=1) * params.slot_hours               # [B]
    cf = np.sum(1.0 / np.maximum(np.abs(bank.desired - trajs), params.eps_comfort),
                axis=1)                                           # [B,n]
    comfort = np.sum(bank.criticality / cf, axis=1)               # [B]
    return energy, comfort


def objective(params: MpcParams, zones: list[ZoneParams], hvac: HvacParams,
              predicted_trajs: np.ndarray, mdots: np.ndarray) -> float:
    """Energy/comfort trade-off for a given plan and its predicted trajectory.

    ``predicted_trajs`` holds the end-of-slot zone temperatures the plan is
    expected to produce; shapes must both be horizon x n_zones.
    """
    trajs = np.asarray(predicted_trajs, dtype=float)
    md = np.asarray(mdots, dtype=float)
    if trajs.shape != md.shape or trajs.ndim != 2 or trajs.shape[1] != len(zones):
        raise ValueError(
            f"shape mismatch: trajectory {trajs.shape}, plan {md.shape}, zones {len(zones)}")
    bank = ZoneBank.from_zones(zones)
    energy, comfort = _eq6_terms(params, bank, hvac, trajs[None], md[None])
    return float(params.w_energy * energy[0] + params.w_comfort * comfort[0])


class MpcController:
    """Receding-horizon controller; one instance per control loop.

    Instances keep the previous (shifted) plan as a warm start and are not
    safe for concurrent mutation; independent instances may run in parallel.
    """

    def __init__(self, zones: list[ZoneParams], hvac: HvacParams, params: MpcParams,
                 battery: Battery | None = None, pv: PvPanel | None = None,
                 sell_ratio: float = 0.3, integrate_battery: bool = False):
        if integrate_battery and (battery is None or pv is None):
            raise ValueError("integrated mode needs battery and pv models")
        self.zones = list(zones)
        self.bank = ZoneBank.from_zones(self.zones)
        self.hvac = hvac
        self.params = params
        self.battery = battery
        self.pv = pv
        self.sell_ratio = sell_ratio
        self.integrate_battery = integrate_battery
        self._warm: np.ndarray | None = None

    # ------------------------------------------------------------------
    @property
    def n_zones(self) -> int:
        return self.bank.n

    def _n_vars(self) -> int:
        h, n = self.params.horizon, self.n_zones
        return h * n + (h if self.integrate_battery else 0)

    def _bounds(self) -> tuple[np.ndarray, np.ndarray]:
        h, n = self.params.horizon, self.n_zones
        lo = np.full(h * n, self.hvac.mdot_min)
        hi = np.full(h * n, self.hvac.mdot_max)
        if self.integrate_battery:
            lo = np.concatenate([lo, np.full(h, -self.battery.max_discharge_kw)])
            hi = np.concatenate([hi, np.full(h, self.battery.max_charge_kw)])
        return lo, hi

    def _split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        """x of shape [B, D] -> (mdots [B,H,n], p_ess [B,H] or None)."""
        h, n = self.params.horizon, self.n_zones
        md = x[:, : h * n].reshape(x.shape[0], h, n)
        pe = x[:, h * n:].reshape(x.shape[0], h) if self.integrate_battery else None
        return md, pe

    def _objective_batch(self, x: np.ndarray, temps0: np.ndarray, soc0: float,
                         forecast: Forecast, w_energy: float, w_comfort: float) -> np.ndarray:
        """Objective for a batch of candidate plans (rows of x)."""
        p = self.params
        mdots, p_ess = self._split(x)
        b = x.shape[0]
        temps = np.broadcast_to(temps0, (b, self.n_zones)).copy()
        trajs = np.empty((b, p.horizon, self.n_zones))
        cost = np.zeros(b)
        if self.integrate_battery:
            soc = np.full(b, float(soc0))
        for t in range(p.horizon):
            if self.integrate_battery:
                total = mdots[:, t, :].sum(axis=1)
                p_hvac = (self.hvac.k_fan * total ** 2
                          + (self.hvac.cp_air / self.hvac.cop) * total
                          * (self.hvac.return_temp_c - self.hvac.supply_temp_c))
                p_net = p_hvac + forecast.p_const_kw - pv_power(
                    self.pv, float(forecast.irradiance_kw_m2[t]))
                # feasibility pre-limit mirrors the plant's battery handling
                sd = (1.0 - self.battery.self_discharge_rate_per_hour * p.slot_hours) * soc
                charge_cap = np.maximum(self.battery.capacity_kwh - sd, 0.0) / (
                    self.battery.eta_charge * p.slot_hours)
                discharge_cap = np.maximum(sd, 0.0) * self.battery.eta_discharge / p.slot_hours
                pe = np.clip(p_ess[:, t], -discharge_cap, charge_cap)
                p_grid = p_net + pe
                v = float(forecast.buy_price[t])
                cost += v * np.maximum(p_grid, 0.0) * p.slot_hours
                cost -= self.sell_ratio * v * np.maximum(-p_grid, 0.0) * p.slot_hours
                soc = np.clip(soc_update(self.battery, soc, pe, p.slot_hours),
                              0.0, self.battery.capacity_kwh)
            temps = rc_step(self.bank, self.hvac, temps, float(forecast.t_out_c[t]),
                            mdots[:, t, :], p.slot_hours, p.substep_minutes)
            trajs[:, t, :] = temps
        energy, comfort = _eq6_terms(p, self.bank, self.hvac, trajs, mdots)
        return w_energy * energy + w_comfort * comfort + cost

    def plan_objective(self, building_temps, soc: float, forecast: Forecast,
                       mdots: np.ndarray, p_ess: np.ndarray | None = None,
                       weights: tuple[float, float] | None = None) -> float:
        """Evaluate one candidate plan with the solver's own objective."""
        w_e, w_c = weights if weights is not None else (self.params.w_energy,
                                                        self.params.w_comfort)
        x = np.asarray(mdots, dtype=float).reshape(1, -1)
        if self.integrate_battery:
            pe = np.zeros(self.params.horizon) if p_ess is None else np.asarray(p_ess, float)
            x = np.concatenate([x, pe.reshape(1, -1)], axis=1)
        temps0 = np.asarray(building_temps, dtype=float)
        return float(self._objective_batch(x, temps0, soc, forecast, w_e, w_c)[0])

    # ------------------------------------------------------------------
    def solve(self, building_temps, micro: MicrogridState, forecast: Forecast,
              weights: tuple[float, float] | None = None) -> MpcPlan:
        """Optimise the horizon plan from the current measurements.

        Deterministic given identical inputs; monotone descent by construction
        (only improving iterates are accepted).
        """
        p = self.params
        if len(forecast) < p.horizon:
            raise ValueError(
                f"forecast covers {len(forecast)} slots, horizon needs {p.horizon}")
        w_e, w_c = weights if weights is not None else (p.w_energy, p.w_comfort)
        temps0 = np.asarray(building_temps, dtype=float)
        lo, hi = self._bounds()
        d = self._n_vars()

        if self._warm is not None and self._warm.shape == (d,):
            x = np.clip(self._warm, lo, hi)
        else:
            x = np.empty(d)
            x[: p.horizon * self.n_zones] = self.hvac.mdot_min + 0.5 * (
                self.hvac.mdot_max - self.hvac.mdot_min)
            if self.integrate_battery:
                x[p.horizon * self.n_zones:] = 0.0

        def evaluate(batch: np.ndarray) -> np.ndarray:
            return self._objective_batch(batch, temps0, micro.soc, forecast, w_e, w_c)

        span = hi - lo
        fd_eps = 1e-5 * span
        f = float(evaluate(x[None])[0])
        step = None
        accepted = 0
        for _ in range(p.iters):
            # batched central differences: rows are x +/- eps_j e_j
            pert = np.concatenate([x + np.diag(fd_eps), x - np.diag(fd_eps)])
            vals = evaluate(np.clip(pert, lo, hi))
            # account for clipped perturbations at the box edge
            hi_pts = np.clip(x + np.diag(fd_eps), lo, hi)
            lo_pts = np.clip(x - np.diag(fd_eps), lo, hi)
            denom = np.diagonal(hi_pts).copy() - np.diagonal(lo_pts).copy()
            denom[denom == 0.0] = 1.0
            g = (vals[:d] - vals[d:]) / denom
            gnorm = float(np.linalg.norm(g))
            if gnorm < 1e-14:
                break
            if step is None:
                step = p.step_size * float(np.linalg.norm(span)) / gnorm
            else:
                step = min(step * 2.0, 1e6)
            improved = False
            for _ in range(40):
                x_new = np.clip(x - step * g, lo, hi)
                f_new = float(evaluate(x_new[None])[0])
                if f_new < f - 1e-4 * float(np.dot(g, x - x_new)):
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
            accepted += 1
            gain = f - f_new
            x, f = x_new, f_new
            if gain < 1e-10 * max(1.0, abs(f)):
                break

        mdots, p_ess = self._split(x[None])
        plan = MpcPlan(mdots=mdots[0].copy(),
                       p_ess=p_ess[0].copy() if p_ess is not None else None,
                       objective_value=f, iters_used=accepted)
        return plan

    def receding_step(self, building_temps, micro: MicrogridState, forecast: Forecast,
                      weights: tuple[float, float] | None = None
                      ) -> tuple[np.ndarray, float, MpcPlan]:
        """Solve and return the first-slot actuation; shifts the plan for the
        next call's warm start (last row repeated)."""
        plan = self.solve(building_temps, micro, forecast, weights)
        shifted_md = np.vstack([plan.mdots[1:], plan.mdots[-1:]])
        if plan.p_ess is not None:
            shifted_pe = np.concatenate([plan.p_ess[1:], plan.p_ess[-1:]])
            self._warm = np.concatenate([shifted_md.ravel(), shifted_pe])
            p_ess0 = float(plan.p_ess[0])
        else:
            self._warm = shifted_md.ravel()
            p_ess0 = 0.0
        return plan.mdots[0].copy(), p_ess0, plan

    def reset(self) -> None:
        """Drop the warm start (call at episode/day boundaries)."""
        self._warm = None


def grid_search_plan(controller: MpcController, building_temps, micro: MicrogridState,
                     forecast: Forecast, levels: int = 21,
                     weights: tuple[float, float] | None = None) -> tuple[np.ndarray, float]:
    """Exhaustive airflow grid search (oracle-grade, exponential in H*n).

    Enumerates ``levels`` airflow values per decision variable and returns the
    best plan and its objective under the controller's own evaluator.
    """
    p = controller.params
    n = controller.n_zones
    if controller.integrate_battery:
        raise ValueError("grid oracle only covers the airflow-only objective")
    grid = np.linspace(controller.hvac.mdot_min, controller.hvac.mdot_max, levels)
    d = p.horizon * n
    idx = np.indices([levels] * d).reshape(d, -1).T
    candidates = grid[idx]                                        # [levels^d, d]
    w = weights if weights is not None else (p.w_energy, p.w_comfort)
    vals = controller._objective_batch(candidates, np.asarray(building_temps, float),
                                       micro.soc, forecast, w[0], w[1])
    best = int(np.argmin(vals))
    return candidates[best].reshape(p.horizon, n), float(vals[best])
