import numpy as np
import pytest

from hvacgrid.ddpg import AdamState, MlpNet, adam_step, soft_update


def reference_forward(net, x, train):
    """Straight-line reimplementation of the forward pass (test oracle)."""
    h = np.asarray(x, dtype=float)
    for l in range(net.n_hidden):
        z = h @ net.W[l] + net.b[l]
        if train:
            mu, var = z.mean(0), z.var(0)
        else:
            mu, var = net.run_mean[l], net.run_var[l]
        xhat = (z - mu) / np.sqrt(var + net.bn_eps)
        h = np.maximum(net.gamma[l] * xhat + net.beta[l], 0.0)
    z = h @ net.W[-1] + net.b[-1]
    if net.out_lo is not None:
        z = net.out_lo + (np.tanh(z) + 1.0) * 0.5 * (net.out_hi - net.out_lo)
    return z


def loss_and_grads(net, x, target):
    out = net.forward(x, train=True, update_stats=False)
    diff = out - target
    loss = float(np.sum(diff ** 2))
    grads, grad_in = net.backward(2.0 * diff)
    return loss, grads, grad_in


def loss_only(net, x, target):
    out = net.forward(x, train=True, update_stats=False)
    net._cache = None
    return float(np.sum((out - target) ** 2))


def fd_check(net, x, target, eps=1e-5):
    """Central finite differences over every parameter; returns max rel error."""
    _, grads, _ = loss_and_grads(net, x, target)
    worst = 0.0
    for p, g in zip(net.params(), grads):
        flat_p = p.ravel()
        flat_g = g.ravel()
        for i in range(flat_p.size):
            keep = flat_p[i]
            flat_p[i] = keep + eps
            f_hi = loss_only(net, x, target)
            flat_p[i] = keep - eps
            f_lo = loss_only(net, x, target)
            flat_p[i] = keep
            fd = (f_hi - f_lo) / (2 * eps)
            denom = max(abs(fd), abs(flat_g[i]), 1e-8)
            worst = max(worst, abs(fd - flat_g[i]) / denom)
    return worst


class TestForward:
    def test_zero_net_zero_output(self):
        net = MlpNet([3, 4, 2], rng=np.random.default_rng(0))
        for w in net.W:
            w[:] = 0.0
        for b in net.b:
            b[:] = 0.0
        out = net.forward(np.ones((3, 3)), train=False)
        assert np.array_equal(out, np.zeros((3, 2)))

    def test_eval_deterministic(self):
        net = MlpNet([4, 8, 8, 2], rng=np.random.default_rng(1))
        x = np.random.default_rng(2).normal(size=(5, 4))
        a = net.forward(x, train=False)
        b = net.forward(x, train=False)
        assert np.array_equal(a, b)

    def test_matches_reference_eval(self):
        rng = np.random.default_rng(3)
        net = MlpNet([5, 7, 6, 3], rng=rng)
        # non-trivial running stats
        net.forward(rng.normal(size=(32, 5)), train=True)
        x = rng.normal(size=(9, 5))
        assert np.allclose(net.forward(x, train=False), reference_forward(net, x, False),
                           atol=1e-12, rtol=0)

    def test_matches_reference_train(self):
        rng = np.random.default_rng(4)
        net = MlpNet([5, 7, 3], out_lo=np.array([-1.0, 0.0, 0.0]),
                     out_hi=np.array([1.0, 2.0, 0.5]), rng=rng)
        x = rng.normal(size=(6, 5))
        got = net.forward(x, train=True, update_stats=False)
        assert np.allclose(got, reference_forward(net, x, True), atol=1e-12, rtol=0)

    def test_width_mismatch_rejected(self):
        net = MlpNet([3, 4, 2], rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            net.forward(np.ones((2, 5)))

    def test_train_batch_of_one_rejected(self):
        net = MlpNet([3, 4, 2], rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            net.forward(np.ones((1, 3)), train=True)

    def test_eval_rows_independent(self):
        # eval-mode output of row i depends only on row i of the input
        rng = np.random.default_rng(5)
        net = MlpNet([4, 6, 2], rng=rng)
        net.forward(rng.normal(size=(16, 4)), train=True)
        x = rng.normal(size=(8, 4))
        full = net.forward(x, train=False)
        for i in range(8):
            row = net.forward(x[i: i + 1], train=False)
            # BLAS may reorder the sum for different batch shapes (ulp wiggle)
            assert np.allclose(full[i], row[0], atol=1e-12, rtol=0)

    def test_squashed_output_in_bounds(self):
        rng = np.random.default_rng(6)
        lo, hi = np.array([-2.0, 0.0]), np.array([1.0, 0.3])
        net = MlpNet([3, 5, 2], out_lo=lo, out_hi=hi, rng=rng)
        out = net.forward(rng.normal(size=(20, 3)) * 10, train=False)
        assert np.all(out >= lo) and np.all(out <= hi)


class TestBackward:
    def test_requires_train_forward(self):
        net = MlpNet([3, 4, 2], rng=np.random.default_rng(0))
        net.forward(np.ones((4, 3)), train=False)
        with pytest.raises(RuntimeError):
            net.backward(np.ones((4, 2)))

    def test_zero_output_gradient_gives_zero_grads(self):
        rng = np.random.default_rng(7)
        net = MlpNet([3, 4, 2], rng=rng)
        net.forward(rng.normal(size=(5, 3)), train=True)
        grads, grad_in = net.backward(np.zeros((5, 2)))
        assert all(np.all(g == 0.0) for g in grads)
        assert np.all(grad_in == 0.0)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(8)
        for trial in range(4):
            sizes = [3, 5, 4, 2] if trial % 2 else [4, 6, 1]
            bounded = trial >= 2
            net = MlpNet(sizes,
                         out_lo=np.full(sizes[-1], -1.5) if bounded else None,
                         out_hi=np.full(sizes[-1], 2.0) if bounded else None,
                         rng=rng)
            x = rng.normal(size=(6, sizes[0]))
            target = rng.normal(size=(6, sizes[-1]))
            assert fd_check(net, x, target) < 1e-4

    def test_batch_gradient_is_sum_of_per_sample_gradients(self):
        # linear-in-grad_out property through the whole cache
        rng = np.random.default_rng(9)
        net = MlpNet([4, 5, 2], rng=rng)
        x = rng.normal(size=(6, 4))
        g_out = rng.normal(size=(6, 2))
        net.forward(x, train=True, update_stats=False)
        full, _ = net.backward(g_out)
        parts = None
        for i in range(6):
            mask = np.zeros_like(g_out)
            mask[i] = g_out[i]
            net.forward(x, train=True, update_stats=False)
            g_i, _ = net.backward(mask)
            parts = g_i if parts is None else [a + b for a, b in zip(parts, g_i)]
        for a, b in zip(full, parts):
            assert np.allclose(a, b, atol=1e-10)

    def test_input_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(10)
        net = MlpNet([3, 6, 1], rng=rng)
        x = rng.normal(size=(4, 3))
        target = rng.normal(size=(4, 1))
        _, _, grad_in = loss_and_grads(net, x, target)
        eps = 1e-6
        for r in range(4):
            for c in range(3):
                xp = x.copy(); xp[r, c] += eps
                xm = x.copy(); xm[r, c] -= eps
                fd = (loss_only(net, xp, target) - loss_only(net, xm, target)) / (2 * eps)
                assert abs(fd - grad_in[r, c]) < 1e-4 * max(1.0, abs(fd))


class TestStatistics:
    def test_running_stats_updated_only_when_asked(self):
        rng = np.random.default_rng(11)
        net = MlpNet([3, 4, 2], rng=rng)
        before = [m.copy() for m in net.run_mean]
        net.forward(rng.normal(size=(8, 3)), train=True, update_stats=False)
        assert all(np.array_equal(a, b) for a, b in zip(before, net.run_mean))
        net.forward(rng.normal(size=(8, 3)), train=True)
        assert not all(np.array_equal(a, b) for a, b in zip(before, net.run_mean))

    def test_state_dict_roundtrip(self):
        rng = np.random.default_rng(12)
        net = MlpNet([3, 4, 2], rng=rng)
        twin = net.clone()
        x = rng.normal(size=(5, 3))
        assert np.array_equal(net.forward(x), twin.forward(x))


class TestSoftUpdate:
    def test_tau_one_copies(self):
        rng = np.random.default_rng(13)
        online = MlpNet([3, 4, 2], rng=rng)
        target = MlpNet([3, 4, 2], rng=rng)
        soft_update(target, online, 1.0)
        for a, b in zip(target.all_arrays(), online.all_arrays()):
            assert np.allclose(a, b, atol=1e-15)

    def test_tau_zero_is_identity(self):
        rng = np.random.default_rng(14)
        online = MlpNet([3, 4, 2], rng=rng)
        target = MlpNet([3, 4, 2], rng=rng)
        before = [a.copy() for a in target.all_arrays()]
        soft_update(target, online, 0.0)
        for a, b in zip(target.all_arrays(), before):
            assert np.array_equal(a, b)

    def test_hand_value(self):
        online = MlpNet([2, 2, 1], rng=np.random.default_rng(15))
        target = online.clone()
        for a in online.all_arrays():
            a[:] = 2.0
        for a in target.all_arrays():
            a[:] = 0.0
        soft_update(target, online, 0.5)
        for a in target.all_arrays():
            assert np.allclose(a, 1.0, atol=1e-9)

    def test_elementwise_contraction(self):
        rng = np.random.default_rng(16)
        online = MlpNet([3, 4, 2], rng=rng)
        target = MlpNet([3, 4, 2], rng=rng)
        tau = 0.25
        gaps_before = [t - o for t, o in zip(target.all_arrays(),
                                             [a.copy() for a in online.all_arrays()])]
        soft_update(target, online, tau)
        for gap, t, o in zip(gaps_before, target.all_arrays(), online.all_arrays()):
            assert np.allclose(t - o, (1 - tau) * gap, atol=1e-12)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            soft_update(MlpNet([3, 4, 2], rng=np.random.default_rng(0)),
                        MlpNet([3, 5, 2], rng=np.random.default_rng(0)), 0.5)


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        rng = np.random.default_rng(17)
        params = [rng.normal(size=(3, 2)), rng.normal(size=2)]
        before = [p.copy() for p in params]
        adam = AdamState.for_params(params)
        adam_step(adam, params, [np.zeros_like(p) for p in params])
        for p, b in zip(params, before):
            assert np.array_equal(p, b)

    def test_degenerate_betas_hand_value(self):
        # beta1 = beta2 = 0: step is lr * g / (|g| + eps) elementwise
        params = [np.array([1.0, -2.0])]
        g = np.array([0.5, -3.0])
        adam = AdamState.for_params(params, lr=0.1)
        adam.beta1 = 0.0
        adam.beta2 = 0.0
        adam_step(adam, params, [g.copy()])
        expected = np.array([1.0, -2.0]) - 0.1 * g / (np.abs(g) + adam.eps)
        assert np.allclose(params[0], expected, atol=1e-9)

    def test_optimises_quadratic(self):
        x = [np.array([1.0])]
        adam = AdamState.for_params(x, lr=0.05)
        for _ in range(200):
            adam_step(adam, x, [2.0 * x[0]])
        assert abs(x[0][0]) < 0.1

    def test_shape_mismatch_rejected(self):
        params = [np.zeros((2, 2))]
        adam = AdamState.for_params(params)
        with pytest.raises(ValueError):
            adam_step(adam, params, [np.zeros(3)])
