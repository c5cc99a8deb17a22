"""Co-simulation of a multi-zone building HVAC system and a renewable
microgrid, with three interchangeable controllers: integrated MPC, a DDPG
agent supervising the MPC's weight pair, and a pure DDPG agent."""

from .building import (BuildingState, HvacParams, ZoneParams, chiller_power,
                       comfort_factor, fan_power, hvac_power, zone_step)
from .config import ExperimentConfig, load_config
from .ddpg import DdpgAgent, Experience, MlpNet, OuNoise, ReplayBuffer, soft_update
from .envs import (ComboEnv, PureEnv, RewardParams, combo_reward, net_demand,
                   pure_reward, pure_state_assemble)
from .microgrid import (Battery, DieselGen, MicrogridState, PvPanel, Tariff,
                        battery_step, diesel_step, grid_exchange, pv_power,
                        slot_cost, soc_in_safe_band)
from .mpc import Forecast, MpcController, MpcParams, MpcPlan, objective
from .plant import Plant

__version__ = "0.1.0"
