from .adam import AdamState, adam_step
from .agent import DdpgAgent, EvalLog, TrainLog
from .net import MlpNet, soft_update
from .noise import OuNoise
from .replay import Experience, ReplayBuffer

__all__ = [
    "AdamState", "adam_step", "DdpgAgent", "EvalLog", "TrainLog",
    "MlpNet", "soft_update", "OuNoise", "Experience", "ReplayBuffer",
]
