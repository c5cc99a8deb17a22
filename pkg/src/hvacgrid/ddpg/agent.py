"""Deep deterministic policy gradient agent built on the numpy MLP stack.

Training follows the classic recipe: act with OU exploration noise, store
transitions, and per slot update the critic on Bellman targets from the target
networks, the actor along the deterministic policy gradient, and both targets
by soft blending.  Everything is driven by a single Generator seeded at
construction, so training runs are bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .adam import AdamState, adam_step
from .net import MlpNet, soft_update
from .noise import OuNoise
from .replay import Experience, ReplayBuffer

CHECKPOINT_VERSION = 1


@dataclass
class TrainLog:
    episodes: list[int] = field(default_factory=list)
    days: list[int] = field(default_factory=list)
    returns: list[float] = field(default_factory=list)
    critic_losses: list[float] = field(default_factory=list)
    actor_grad_norms: list[float] = field(default_factory=list)
    noise_scales: list[float] = field(default_factory=list)

    def to_rows(self) -> list[dict]:
        return [
            {"episode": e, "day": d, "episode_return": r, "mean_critic_loss": c,
             "mean_actor_grad_norm": a, "noise_scale": s}
            for e, d, r, c, a, s in zip(self.episodes, self.days, self.returns,
                                        self.critic_losses, self.actor_grad_norms,
                                        self.noise_scales)
        ]


@dataclass
class EvalLog:
    day_returns: list[float] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)


class DdpgAgent:
    def __init__(self, state_dim: int, action_dim: int, action_low, action_high,
                 hidden=(128, 128), lr: float = 0.001, tau: float = 0.001,
                 discount: float = 0.99, batch_size: int = 128,
                 buffer_capacity: int = 100_000, warmup: int | None = None,
                 ou_theta: float = 0.15, ou_sigma: float = 0.2, ou_mu: float = 0.0,
                 noise_scale_initial: float = 0.35, noise_scale_final: float = 0.05,
                 bn_momentum: float = 0.01, seed: int = 0):
        if not 0.0 < tau <= 1.0:
            raise ValueError("tau must be in (0, 1]")
        if not 0.0 <= discount < 1.0:
            raise ValueError("discount must be in [0, 1)")
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.action_low = np.asarray(action_low, dtype=float)
        self.action_high = np.asarray(action_high, dtype=float)
        if self.action_low.shape != (action_dim,) or self.action_high.shape != (action_dim,):
            raise ValueError("action bounds must match action_dim")
        if np.any(self.action_low >= self.action_high):
            raise ValueError("action_low must be elementwise below action_high")
        self.hidden = tuple(int(h) for h in hidden)
        self.tau = tau
        self.discount = discount
        self.batch_size = batch_size
        self.warmup = batch_size if warmup is None else max(warmup, batch_size)
        self.noise_scale_initial = noise_scale_initial
        self.noise_scale_final = noise_scale_final
        self.seed = seed
        self.rng = np.random.default_rng(seed)

        self.actor = MlpNet([state_dim, *self.hidden, action_dim],
                            out_lo=self.action_low, out_hi=self.action_high,
                            bn_momentum=bn_momentum, rng=self.rng)
        self.critic = MlpNet([state_dim + action_dim, *self.hidden, 1],
                             bn_momentum=bn_momentum, rng=self.rng)
        self.target_actor = self.actor.clone()
        self.target_critic = self.critic.clone()
        self.adam_actor = AdamState.for_params(self.actor.params(), lr=lr)
        self.adam_critic = AdamState.for_params(self.critic.params(), lr=lr)
        self.buffer = ReplayBuffer(buffer_capacity, state_dim, action_dim)
        self.noise = OuNoise(action_dim, mu=ou_mu, theta=ou_theta, sigma=ou_sigma,
                             scale=noise_scale_initial)
        self.trained = False

    # ------------------------------------------------------------------
    def act(self, state, explore: bool = False) -> np.ndarray:
        """Greedy actor action, plus range-scaled OU noise when exploring."""
        state = np.asarray(state, dtype=float)
        if state.shape != (self.state_dim,):
            raise ValueError(f"state of shape {state.shape} != ({self.state_dim},)")
        a = self.actor.forward(state[None], train=False)[0]
        if explore:
            half_range = 0.5 * (self.action_high - self.action_low)
            a = a + self.noise.sample(1.0, self.rng) * half_range
        return np.clip(a, self.action_low, self.action_high)

    def bellman_targets(self, batch: dict[str, np.ndarray]) -> np.ndarray:
        """y_i = r_i + discount * Q'(s_{i+1}, mu'(s_{i+1})) (target nets, eval)."""
        s2 = batch["next_states"]
        if s2.shape[0] == 0:
            raise ValueError("empty batch")
        a2 = self.target_actor.forward(s2, train=False)
        q2 = self.target_critic.forward(np.concatenate([s2, a2], axis=1),
                                        train=False)[:, 0]
        return batch["rewards"] + self.discount * q2

    def critic_update(self, batch: dict[str, np.ndarray],
                      targets: np.ndarray | None = None) -> float:
        """One Adam step on the mean squared Bellman error; returns pre-step loss."""
        y = self.bellman_targets(batch) if targets is None else targets
        sa = np.concatenate([batch["states"], batch["actions"]], axis=1)
        q = self.critic.forward(sa, train=True)[:, 0]
        err = q - y
        loss = float(np.mean(err ** 2))
        grad_out = (2.0 * err / err.shape[0])[:, None]
        grads, _ = self.critic.backward(grad_out)
        adam_step(self.adam_critic, self.critic.params(), grads)
        return loss

    def actor_update(self, batch: dict[str, np.ndarray]) -> float:
        """One Adam ascent step on mean Q(s, mu(s)); returns the gradient norm.

        The critic is evaluated in eval mode (frozen normalisation): with the
        actions feeding the first hidden layer, train-mode batch statistics
        would cancel any batch-wide action shift out of the policy gradient.
        """
        s = batch["states"]
        a = self.actor.forward(s, train=True)
        sa = np.concatenate([s, a], axis=1)
        self.critic.forward(sa, train=False, cache=True)
        # ascend mean Q == descend -mean Q
        grad_q = np.full((s.shape[0], 1), -1.0 / s.shape[0])
        _, grad_sa = self.critic.backward(grad_q)
        grad_a = grad_sa[:, self.state_dim:]
        grads, _ = self.actor.backward(grad_a)
        adam_step(self.adam_actor, self.actor.params(), grads)
        return float(np.sqrt(sum(float(np.sum(g ** 2)) for g in grads)))

    def update_targets(self) -> None:
        soft_update(self.target_critic, self.critic, self.tau)
        soft_update(self.target_actor, self.actor, self.tau)

    # ------------------------------------------------------------------
    def _noise_scale(self, episode: int, episodes: int) -> float:
        if episodes <= 1:
            return self.noise_scale_initial
        frac = episode / (episodes - 1)
        return (self.noise_scale_initial
                + (self.noise_scale_final - self.noise_scale_initial) * frac)

    def train(self, env, episodes: int) -> TrainLog:
        """Run the training loop for ``episodes`` episodes on ``env``.

        Per slot: explore, step the environment, store the transition, and --
        once the buffer holds a full batch -- sample K transitions, compute
        Bellman targets, update critic, actor and both target networks.
        """
        if env.state_dim != self.state_dim or env.action_dim != self.action_dim:
            raise ValueError("environment dimensions do not match the agent")
        log = TrainLog()
        days = list(env.days)
        for ep in range(episodes):
            day = int(days[self.rng.integers(len(days))])
            state = env.reset(day)
            self.noise.reset()
            self.noise.scale = self._noise_scale(ep, episodes)
            ep_return = 0.0
            closses: list[float] = []
            gnorms: list[float] = []
            for _ in range(env.slots_per_episode):
                action = self.act(state, explore=True)
                next_state, reward, done, _ = env.step(action)
                self.buffer.push(Experience(state, action, reward, next_state))
                if len(self.buffer) >= self.warmup:
                    batch = self.buffer.sample(self.batch_size, self.rng)
                    closses.append(self.critic_update(batch))
                    gnorms.append(self.actor_update(batch))
                    self.update_targets()
                ep_return += reward
                state = next_state
                if done:
                    break
            log.episodes.append(ep)
            log.days.append(day)
            log.returns.append(ep_return)
            log.critic_losses.append(float(np.mean(closses)) if closses else 0.0)
            log.actor_grad_norms.append(float(np.mean(gnorms)) if gnorms else 0.0)
            log.noise_scales.append(self.noise.scale)
        self.trained = True
        return log

    def deploy(self, env, days) -> EvalLog:
        """Greedy (noiseless) evaluation over ``days``; parameters stay frozen."""
        if not self.trained:
            raise RuntimeError("agent is not trained; call train() or load a checkpoint")
        log = EvalLog()
        for day in days:
            state = env.reset(int(day))
            day_return = 0.0
            for _ in range(env.slots_per_episode):
                action = self.act(state, explore=False)
                next_state, reward, done, info = env.step(action)
                rec = dict(info)
                rec["reward"] = reward
                log.records.append(rec)
                day_return += reward
                state = next_state
                if done:
                    break
            log.day_returns.append(day_return)
        return log

    # ------------------------------------------------------------------
    def save(self, path) -> None:
        """Write a versioned checkpoint (parameters, statistics, Adam and RNG
        state); the replay buffer is intentionally not persisted."""
        meta = {
            "version": CHECKPOINT_VERSION,
            "state_dim": self.state_dim,
            "action_dim": self.action_dim,
            "hidden": list(self.hidden),
            "action_low": self.action_low.tolist(),
            "action_high": self.action_high.tolist(),
            "lr": self.adam_actor.lr,
            "tau": self.tau,
            "discount": self.discount,
            "batch_size": self.batch_size,
            "warmup": self.warmup,
            "buffer_capacity": self.buffer.capacity,
            "bn_momentum": self.actor.bn_momentum,
            "ou": {"mu": self.noise.mu, "theta": self.noise.theta,
                   "sigma": self.noise.sigma, "scale": self.noise.scale},
            "noise_scale_initial": self.noise_scale_initial,
            "noise_scale_final": self.noise_scale_final,
            "seed": self.seed,
            "trained": self.trained,
            "adam_steps": {"actor": self.adam_actor.step, "critic": self.adam_critic.step},
            "rng_state": self.rng.bit_generator.state,
        }
        arrays: dict[str, np.ndarray] = {"noise_state": self.noise.state}
        for prefix, net in (("actor", self.actor), ("critic", self.critic),
                            ("target_actor", self.target_actor),
                            ("target_critic", self.target_critic)):
            for k, v in net.state_dict().items():
                arrays[f"{prefix}.{k}"] = v
        for prefix, adam in (("adam_actor", self.adam_actor),
                             ("adam_critic", self.adam_critic)):
            for i, (m, v) in enumerate(zip(adam.m, adam.v)):
                arrays[f"{prefix}.m{i}"] = m
                arrays[f"{prefix}.v{i}"] = v
        np.savez(path, meta=json.dumps(meta), **arrays)

    @classmethod
    def load(cls, path) -> "DdpgAgent":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta["version"] != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta['version']}")
            agent = cls(meta["state_dim"], meta["action_dim"],
                        meta["action_low"], meta["action_high"],
                        hidden=meta["hidden"], lr=meta["lr"], tau=meta["tau"],
                        discount=meta["discount"], batch_size=meta["batch_size"],
                        warmup=meta["warmup"], buffer_capacity=meta["buffer_capacity"],
                        noise_scale_initial=meta["noise_scale_initial"],
                        noise_scale_final=meta["noise_scale_final"],
                        bn_momentum=meta["bn_momentum"], seed=meta["seed"])
            for prefix, net in (("actor", agent.actor), ("critic", agent.critic),
                                ("target_actor", agent.target_actor),
                                ("target_critic", agent.target_critic)):
                net.load_state_dict({k[len(prefix) + 1:]: data[k] for k in data.files
                                     if k.startswith(prefix + ".")})
            for prefix, adam, step in (("adam_actor", agent.adam_actor, "actor"),
                                       ("adam_critic", agent.adam_critic, "critic")):
                adam.step = meta["adam_steps"][step]
                for i in range(len(adam.m)):
                    adam.m[i] = np.array(data[f"{prefix}.m{i}"])
                    adam.v[i] = np.array(data[f"{prefix}.v{i}"])
            agent.noise.state = np.array(data["noise_state"])
            agent.noise.mu = meta["ou"]["mu"]
            agent.noise.theta = meta["ou"]["theta"]
            agent.noise.sigma = meta["ou"]["sigma"]
            agent.noise.scale = meta["ou"]["scale"]
            agent.rng.bit_generator.state = meta["rng_state"]
            agent.trained = meta["trained"]
        return agent
