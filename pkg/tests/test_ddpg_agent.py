import numpy as np
import pytest

from hvacgrid.ddpg import (DdpgAgent, Experience, MlpNet, OuNoise, ReplayBuffer,
                           soft_update)


class ToyEnv:
    """Deterministic 1-D regulation task: drive x toward 0, reward -x^2 - a^2/10."""

    state_dim = 2
    action_dim = 1
    action_low = np.array([-1.0])
    action_high = np.array([1.0])
    slots_per_episode = 20
    days = [0, 1, 2]

    def __init__(self):
        self.x = 0.0
        self.t = 0

    def reset(self, day):
        self.x = 1.0 + 0.1 * day
        self.t = 0
        return np.array([self.x, self.t / self.slots_per_episode])

    def step(self, action):
        a = float(np.clip(action[0], -1.0, 1.0))
        self.x = 0.9 * self.x + 0.3 * a
        self.t += 1
        reward = -(self.x ** 2) - 0.1 * a ** 2
        state = np.array([self.x, self.t / self.slots_per_episode])
        return state, reward, self.t >= self.slots_per_episode, {}


def small_agent(seed=0, **kw):
    defaults = dict(state_dim=2, action_dim=1, action_low=np.array([-1.0]),
                    action_high=np.array([1.0]), hidden=(16, 16), batch_size=16,
                    warmup=16, buffer_capacity=500, lr=1e-3, seed=seed)
    defaults.update(kw)
    return DdpgAgent(**defaults)


def fill_buffer(agent, n, rng):
    for _ in range(n):
        s = rng.normal(size=agent.state_dim)
        a = rng.uniform(agent.action_low, agent.action_high)
        s2 = rng.normal(size=agent.state_dim)
        agent.buffer.push(Experience(s, a, float(rng.normal()), s2))


class TestReplayBuffer:
    def test_fifo_eviction_exact(self):
        buf = ReplayBuffer(capacity=5, state_dim=1, action_dim=1)
        for i in range(8):
            buf.push(Experience([float(i)], [0.0], float(i), [float(i)]))
        assert len(buf) == 5
        kept = buf.as_arrays()["rewards"]
        assert np.array_equal(kept, np.array([3.0, 4.0, 5.0, 6.0, 7.0]))

    def test_sample_too_large_rejected(self):
        buf = ReplayBuffer(capacity=5, state_dim=1, action_dim=1)
        buf.push(Experience([0.0], [0.0], 0.0, [0.0]))
        with pytest.raises(ValueError):
            buf.sample(2, np.random.default_rng(0))

    def test_uniform_sampling_frequency(self):
        n_items, k, draws = 50, 5, 20_000
        buf = ReplayBuffer(capacity=n_items, state_dim=1, action_dim=1)
        for i in range(n_items):
            buf.push(Experience([float(i)], [0.0], float(i), [float(i)]))
        rng = np.random.default_rng(123)
        counts = np.zeros(n_items)
        for _ in range(draws):
            batch = buf.sample(k, rng)
            for r in batch["rewards"]:
                counts[int(r)] += 1
        total = draws * k
        p = 1.0 / n_items
        sigma = np.sqrt(total * p * (1 - p))
        assert np.all(np.abs(counts - total * p) <= 3 * sigma)

    def test_experience_validation(self):
        with pytest.raises(ValueError):
            Experience([0.0], [0.0], float("nan"), [0.0])
        with pytest.raises(ValueError):
            Experience([0.0, 1.0], [0.0], 0.0, [0.0])


class TestOuNoise:
    def test_zero_sigma_fixed_point(self):
        noise = OuNoise(1, mu=0.3, sigma=0.0, scale=1.0)
        noise.state = np.array([0.3])
        rng = np.random.default_rng(0)
        for _ in range(10):
            assert noise.sample(0.5, rng)[0] == pytest.approx(0.3, abs=1e-12)

    def test_zero_sigma_mean_reversion(self):
        noise = OuNoise(1, mu=0.0, theta=0.2, sigma=0.0, scale=1.0)
        noise.state = np.array([2.0])
        rng = np.random.default_rng(0)
        prev = 2.0
        for _ in range(20):
            cur = abs(noise.sample(0.5, rng)[0])
            assert cur < prev
            prev = cur

    def test_stationary_variance(self):
        theta, sigma, dt = 0.15, 0.2, 0.1
        noise = OuNoise(1, theta=theta, sigma=sigma, scale=1.0)
        rng = np.random.default_rng(7)
        n = 1_000_000
        burn = 20_000
        samples = np.empty(n)
        for i in range(n + burn):
            v = noise.sample(dt, rng)[0]
            if i >= burn:
                samples[i - burn] = v
        target = sigma ** 2 / (2 * theta)
        assert abs(np.var(samples) - target) / target < 0.05

    def test_scale_applied_to_sample_only(self):
        noise = OuNoise(2, sigma=0.0, scale=0.5)
        noise.state = np.array([1.0, -2.0])
        out = noise.sample(1.0, np.random.default_rng(0))
        assert np.allclose(out, 0.5 * noise.state)


class TestAgentOps:
    def test_act_deterministic_without_exploration(self):
        agent = small_agent()
        s = np.array([0.5, 0.1])
        assert np.array_equal(agent.act(s), agent.act(s))

    def test_act_within_bounds_under_noise(self):
        agent = small_agent()
        agent.noise.scale = 5.0
        for _ in range(50):
            a = agent.act(np.array([0.5, 0.1]), explore=True)
            assert np.all(a >= agent.action_low) and np.all(a <= agent.action_high)

    def test_zero_noise_scale_equals_greedy(self):
        agent = small_agent()
        agent.noise.scale = 0.0
        s = np.array([0.2, 0.4])
        assert np.allclose(agent.act(s, explore=True), agent.act(s, explore=False))

    def test_bellman_targets_zero_discount(self):
        agent = small_agent(discount=0.0)
        rng = np.random.default_rng(0)
        fill_buffer(agent, 40, rng)
        batch = agent.buffer.sample(16, rng)
        assert np.allclose(agent.bellman_targets(batch), batch["rewards"], atol=1e-12)

    def test_bellman_targets_zero_critic(self):
        agent = small_agent()
        for w in agent.target_critic.W:
            w[:] = 0.0
        for b in agent.target_critic.b:
            b[:] = 0.0
        rng = np.random.default_rng(1)
        fill_buffer(agent, 40, rng)
        batch = agent.buffer.sample(16, rng)
        assert np.allclose(agent.bellman_targets(batch), batch["rewards"], atol=1e-12)

    def test_bellman_targets_match_reference(self):
        agent = small_agent(discount=0.9)
        rng = np.random.default_rng(2)
        fill_buffer(agent, 40, rng)
        batch = agent.buffer.sample(16, rng)
        got = agent.bellman_targets(batch)
        a2 = agent.target_actor.forward(batch["next_states"], train=False)
        q2 = agent.target_critic.forward(
            np.concatenate([batch["next_states"], a2], axis=1), train=False)[:, 0]
        expect = batch["rewards"] + 0.9 * q2
        assert np.allclose(got, expect, atol=1e-12)

    def test_critic_loss_matches_hand_mse(self):
        agent = small_agent()
        rng = np.random.default_rng(3)
        fill_buffer(agent, 20, rng)
        batch = {k: v[:2] for k, v in agent.buffer.sample(16, rng).items()}
        y = np.array([1.0, -1.0])
        sa = np.concatenate([batch["states"], batch["actions"]], axis=1)
        q = agent.critic.forward(sa, train=True, update_stats=False)[:, 0]
        agent.critic._cache = None
        expected = float(np.mean((y - q) ** 2))
        assert agent.critic_update(batch, targets=y) == pytest.approx(expected, abs=1e-9)

    def test_perfect_critic_keeps_parameters(self):
        agent = small_agent()
        rng = np.random.default_rng(4)
        fill_buffer(agent, 40, rng)
        batch = agent.buffer.sample(16, rng)
        sa = np.concatenate([batch["states"], batch["actions"]], axis=1)
        y = agent.critic.forward(sa, train=True, update_stats=False)[:, 0]
        agent.critic._cache = None
        before = [p.copy() for p in agent.critic.params()]
        loss = agent.critic_update(batch, targets=y.copy())
        assert loss == pytest.approx(0.0, abs=1e-18)
        for p, b in zip(agent.critic.params(), before):
            assert np.array_equal(p, b)

    def test_critic_loss_decreases_on_frozen_batch(self):
        agent = small_agent(lr=3e-3)
        rng = np.random.default_rng(5)
        fill_buffer(agent, 40, rng)
        batch = agent.buffer.sample(16, rng)
        y = batch["rewards"].copy()
        first = agent.critic_update(batch, targets=y)
        last = first
        for _ in range(49):
            last = agent.critic_update(batch, targets=y)
        assert last < first

    def test_constant_critic_leaves_actor_unchanged(self):
        agent = small_agent()
        # zero first-layer weights make Q constant in (s, a)
        agent.critic.W[0][:] = 0.0
        rng = np.random.default_rng(6)
        fill_buffer(agent, 40, rng)
        batch = agent.buffer.sample(16, rng)
        before = [p.copy() for p in agent.actor.params()]
        agent.actor_update(batch)
        for p, b in zip(agent.actor.params(), before):
            assert np.array_equal(p, b)

    def test_actor_ascends_frozen_critic(self):
        agent = small_agent(lr=2e-3, seed=3)
        rng = np.random.default_rng(7)
        fill_buffer(agent, 60, rng)
        batch = agent.buffer.sample(16, rng)

        def mean_q():
            a = agent.actor.forward(batch["states"], train=True, update_stats=False)
            agent.actor._cache = None
            sa = np.concatenate([batch["states"], a], axis=1)
            return float(np.mean(agent.critic.forward(sa, train=False)[:, 0]))

        before = mean_q()
        for _ in range(50):
            agent.actor_update(batch)
        assert mean_q() > before

    def test_actor_gradient_matches_finite_differences(self):
        # chain rule through critic and actor vs FD over actor parameters
        agent = small_agent(seed=11, hidden=(8, 6))
        rng = np.random.default_rng(8)
        fill_buffer(agent, 30, rng)
        batch = {k: v[:6] for k, v in agent.buffer.sample(16, rng).items()}
        s = batch["states"]

        def mean_q():
            a = agent.actor.forward(s, train=True, update_stats=False)
            agent.actor._cache = None
            sa = np.concatenate([s, a], axis=1)
            return float(np.mean(agent.critic.forward(sa, train=False)[:, 0]))

        a = agent.actor.forward(s, train=True, update_stats=False)
        agent.critic.forward(np.concatenate([s, a], axis=1), train=False, cache=True)
        grad_q = np.full((s.shape[0], 1), 1.0 / s.shape[0])
        _, grad_sa = agent.critic.backward(grad_q)
        grads, _ = agent.actor.backward(grad_sa[:, agent.state_dim:])

        eps = 1e-5
        worst = 0.0
        for p, g in zip(agent.actor.params(), grads):
            fp, fg = p.ravel(), g.ravel()
            for i in range(fp.size):
                keep = fp[i]
                fp[i] = keep + eps
                hi = mean_q()
                fp[i] = keep - eps
                lo = mean_q()
                fp[i] = keep
                fd = (hi - lo) / (2 * eps)
                denom = max(abs(fd), abs(fg[i]), 1e-6)
                worst = max(worst, abs(fd - fg[i]) / denom)
        assert worst < 1e-3


class TestTrainDeploy:
    def test_warmup_boundary_no_update(self):
        env = ToyEnv()
        env.slots_per_episode = 1
        agent = small_agent(warmup=16)
        log = agent.train(env, episodes=1)
        assert len(agent.buffer) == 1
        assert agent.adam_critic.step == 0
        assert agent.adam_actor.step == 0
        assert log.critic_losses == [0.0]
        env.slots_per_episode = 20

    def test_training_deterministic(self):
        logs = []
        for _ in range(2):
            agent = small_agent(seed=42)
            logs.append(agent.train(ToyEnv(), episodes=3))
        assert logs[0].returns == logs[1].returns
        assert logs[0].days == logs[1].days

    def test_training_improves_toy_env(self):
        agent = small_agent(seed=1, lr=2e-3,
                            noise_scale_initial=0.4, noise_scale_final=0.05)
        log = agent.train(ToyEnv(), episodes=60)
        first = np.mean(log.returns[:10])
        last = np.mean(log.returns[-10:])
        assert last > first

    def test_noise_scale_decays_linearly(self):
        agent = small_agent()
        log = agent.train(ToyEnv(), episodes=5)
        assert log.noise_scales[0] == pytest.approx(agent.noise_scale_initial)
        assert log.noise_scales[-1] == pytest.approx(agent.noise_scale_final)
        diffs = np.diff(log.noise_scales)
        assert np.allclose(diffs, diffs[0])

    def test_dimension_mismatch_rejected(self):
        agent = small_agent()
        env = ToyEnv()
        env.state_dim = 5
        with pytest.raises(ValueError):
            agent.train(env, episodes=1)

    def test_deploy_requires_training(self):
        agent = small_agent()
        with pytest.raises(RuntimeError):
            agent.deploy(ToyEnv(), days=[0])

    def test_deploy_freezes_parameters_and_repeats(self):
        agent = small_agent(seed=2)
        agent.train(ToyEnv(), episodes=2)
        before = [p.copy() for net in (agent.actor, agent.critic)
                  for p in net.all_arrays()]
        log1 = agent.deploy(ToyEnv(), days=[0, 1])
        after = [p for net in (agent.actor, agent.critic) for p in net.all_arrays()]
        for a, b in zip(after, before):
            assert np.array_equal(a, b)
        log2 = agent.deploy(ToyEnv(), days=[0, 1])
        assert log1.day_returns == log2.day_returns

    def test_deploy_beats_exploring_policy_on_toy(self):
        agent = small_agent(seed=4, lr=2e-3)
        agent.train(ToyEnv(), episodes=60)
        greedy = agent.deploy(ToyEnv(), days=[0, 1, 2])
        noisy_total = []
        agent.noise.scale = 0.4
        env = ToyEnv()
        for day in (0, 1, 2):
            s = env.reset(day)
            total = 0.0
            agent.noise.reset()
            for _ in range(env.slots_per_episode):
                s, r, done, _ = env.step(agent.act(s, explore=True))
                total += r
            noisy_total.append(total)
        assert np.mean(greedy.day_returns) >= np.mean(noisy_total)


class TestCheckpoint:
    def test_roundtrip_bit_identical(self, tmp_path):
        agent = small_agent(seed=9)
        agent.train(ToyEnv(), episodes=2)
        path = tmp_path / "ckpt.npz"
        agent.save(path)
        clone = DdpgAgent.load(path)
        assert clone.trained
        for a, b in zip(agent.actor.all_arrays(), clone.actor.all_arrays()):
            assert np.array_equal(a, b)
        for a, b in zip(agent.target_critic.all_arrays(),
                        clone.target_critic.all_arrays()):
            assert np.array_equal(a, b)
        s = np.array([0.3, 0.2])
        assert np.array_equal(agent.act(s), clone.act(s))
        assert clone.adam_critic.step == agent.adam_critic.step
        assert clone.rng.bit_generator.state == agent.rng.bit_generator.state

    def test_untrained_flag_persisted(self, tmp_path):
        agent = small_agent()
        path = tmp_path / "ckpt.npz"
        agent.save(path)
        clone = DdpgAgent.load(path)
        assert not clone.trained
        with pytest.raises(RuntimeError):
            clone.deploy(ToyEnv(), days=[0])
