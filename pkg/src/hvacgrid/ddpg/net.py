"""Multilayer perceptron with batch normalisation, written on plain numpy.

Layout per hidden layer: linear -> batch norm -> ReLU.  The output layer is
linear, optionally squashed onto a per-dimension box via tanh (actor nets).
Train-mode forward uses batch statistics (batch size >= 2) and caches every
intermediate needed by backward(); eval-mode forward uses the running
statistics, is row-independent and deterministic.
"""

from __future__ import annotations

import numpy as np

N_STAT_ARRAYS = 2  # running mean + running variance per hidden layer


class MlpNet:
    def __init__(self, sizes, out_lo=None, out_hi=None, bn_momentum: float = 0.01,
                 bn_eps: float = 1e-5, rng: np.random.Generator | None = None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        rng = rng if rng is not None else np.random.default_rng()
        self.sizes = [int(s) for s in sizes]
        self.bn_momentum = bn_momentum
        self.bn_eps = bn_eps
        self.n_hidden = len(self.sizes) - 2

        self.W: list[np.ndarray] = []
        self.b: list[np.ndarray] = []
        for i in range(len(self.sizes) - 1):
            fan_in, fan_out = self.sizes[i], self.sizes[i + 1]
            # fan-in scaled uniform init; small final layer for near-zero outputs
            limit = 3e-3 if i == len(self.sizes) - 2 else 1.0 / np.sqrt(fan_in)
            self.W.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.b.append(rng.uniform(-limit, limit, size=fan_out))

        self.gamma = [np.ones(self.sizes[i + 1]) for i in range(self.n_hidden)]
        self.beta = [np.zeros(self.sizes[i + 1]) for i in range(self.n_hidden)]
        self.run_mean = [np.zeros(self.sizes[i + 1]) for i in range(self.n_hidden)]
        self.run_var = [np.ones(self.sizes[i + 1]) for i in range(self.n_hidden)]

        if (out_lo is None) != (out_hi is None):
            raise ValueError("output bounds must be given together")
        if out_lo is not None:
            self.out_lo = np.asarray(out_lo, dtype=float)
            self.out_hi = np.asarray(out_hi, dtype=float)
            if self.out_lo.shape != (self.sizes[-1],) or np.any(self.out_lo >= self.out_hi):
                raise ValueError("bad output bounds")
        else:
            self.out_lo = None
            self.out_hi = None
        self._cache = None

    # ------------------------------------------------------------------
    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def forward(self, x, train: bool = False, update_stats: bool | None = None,
                cache: bool | None = None) -> np.ndarray:
        """Run the net, caching activations for backward() when asked.

        Train mode normalises with batch statistics (batch size >= 2) and by
        default folds them into the running statistics (``update_stats``);
        eval mode uses the running statistics.  ``cache`` defaults to
        ``train``; an eval-mode forward can also be cached, in which case
        backward() differentiates through the frozen normalisation.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(f"input of shape {x.shape} does not match width {self.in_dim}")
        if x.shape[0] == 0:
            raise ValueError("empty batch")
        if train and x.shape[0] < 2:
            raise ValueError("train-mode forward needs batch size >= 2 for batch statistics")
        if update_stats is None:
            update_stats = train
        if cache is None:
            cache = train

        h = x
        layers = []
        for l in range(self.n_hidden):
            z = h @ self.W[l] + self.b[l]
            if train:
                mu = z.mean(axis=0)
                var = z.var(axis=0)
                if update_stats:
                    m = self.bn_momentum
                    self.run_mean[l] = (1.0 - m) * self.run_mean[l] + m * mu
                    self.run_var[l] = (1.0 - m) * self.run_var[l] + m * var
            else:
                mu = self.run_mean[l]
                var = self.run_var[l]
            std = np.sqrt(var + self.bn_eps)
            xhat = (z - mu) / std
            u = self.gamma[l] * xhat + self.beta[l]
            a = np.maximum(u, 0.0)
            layers.append((h, xhat, std, u))
            h = a
        z_out = h @ self.W[-1] + self.b[-1]
        if self.out_lo is not None:
            th = np.tanh(z_out)
            out = self.out_lo + (th + 1.0) * 0.5 * (self.out_hi - self.out_lo)
        else:
            th = None
            out = z_out
        self._cache = (x, layers, h, th, train) if cache else None
        return out

    def backward(self, grad_out) -> tuple[list[np.ndarray], np.ndarray]:
        """Backprop through the cached forward pass.

        A train-mode cache differentiates through the batch statistics; an
        eval-mode cache treats the normalisation as a fixed affine map.
        Returns (parameter gradients aligned with params(), input gradient).
        """
        if self._cache is None:
            raise RuntimeError("backward() needs a preceding cached forward()")
        x, layers, h_last, th, trained = self._cache
        grad_out = np.asarray(grad_out, dtype=float)

        if th is not None:
            dz = grad_out * 0.5 * (self.out_hi - self.out_lo) * (1.0 - th ** 2)
        else:
            dz = grad_out
        gW = [None] * len(self.W)
        gb = [None] * len(self.b)
        ggamma = [None] * self.n_hidden
        gbeta = [None] * self.n_hidden

        gW[-1] = h_last.T @ dz
        gb[-1] = dz.sum(axis=0)
        da = dz @ self.W[-1].T
        for l in range(self.n_hidden - 1, -1, -1):
            h_in, xhat, std, u = layers[l]
            du = da * (u > 0.0)
            ggamma[l] = (du * xhat).sum(axis=0)
            gbeta[l] = du.sum(axis=0)
            dxhat = du * self.gamma[l]
            if trained:
                # batch-norm backward (batch statistics; biased variance)
                dz_l = (dxhat - dxhat.mean(axis=0)
                        - xhat * (dxhat * xhat).mean(axis=0)) / std
            else:
                dz_l = dxhat / std
            gW[l] = h_in.T @ dz_l
            gb[l] = dz_l.sum(axis=0)
            da = dz_l @ self.W[l].T
        grads: list[np.ndarray] = []
        for l in range(self.n_hidden):
            grads.extend([gW[l], gb[l], ggamma[l], gbeta[l]])
        grads.extend([gW[-1], gb[-1]])
        return grads, da

    # ------------------------------------------------------------------
    def params(self) -> list[np.ndarray]:
        """Trainable arrays, in the same order backward() emits gradients."""
        out: list[np.ndarray] = []
        for l in range(self.n_hidden):
            out.extend([self.W[l], self.b[l], self.gamma[l], self.beta[l]])
        out.extend([self.W[-1], self.b[-1]])
        return out

    def all_arrays(self) -> list[np.ndarray]:
        """Trainable parameters plus batch-norm running statistics."""
        return self.params() + self.run_mean + self.run_var

    def state_dict(self) -> dict[str, np.ndarray]:
        d: dict[str, np.ndarray] = {}
        for i, (w, b) in enumerate(zip(self.W, self.b)):
            d[f"W{i}"] = w
            d[f"b{i}"] = b
        for i in range(self.n_hidden):
            d[f"gamma{i}"] = self.gamma[i]
            d[f"beta{i}"] = self.beta[i]
            d[f"run_mean{i}"] = self.run_mean[i]
            d[f"run_var{i}"] = self.run_var[i]
        return d

    def load_state_dict(self, d: dict[str, np.ndarray]) -> None:
        for i in range(len(self.W)):
            self.W[i] = np.array(d[f"W{i}"], dtype=float)
            self.b[i] = np.array(d[f"b{i}"], dtype=float)
        for i in range(self.n_hidden):
            self.gamma[i] = np.array(d[f"gamma{i}"], dtype=float)
            self.beta[i] = np.array(d[f"beta{i}"], dtype=float)
            self.run_mean[i] = np.array(d[f"run_mean{i}"], dtype=float)
            self.run_var[i] = np.array(d[f"run_var{i}"], dtype=float)
        self._cache = None

    def clone(self) -> "MlpNet":
        twin = MlpNet(self.sizes,
                      out_lo=None if self.out_lo is None else self.out_lo.copy(),
                      out_hi=None if self.out_hi is None else self.out_hi.copy(),
                      bn_momentum=self.bn_momentum, bn_eps=self.bn_eps,
                      rng=np.random.default_rng(0))
        twin.load_state_dict({k: v.copy() for k, v in self.state_dict().items()})
        return twin


def soft_update(target: MlpNet, online: MlpNet, tau: float) -> None:
    """Blend every array of ``online`` into ``target``: t <- tau*o + (1-tau)*t.

    Includes batch-norm running statistics so eval-mode target outputs track
    the online network.
    """
    src = online.all_arrays()
    dst = target.all_arrays()
    if len(src) != len(dst):
        raise ValueError("network shapes do not match")
    for s, t in zip(src, dst):
        if s.shape != t.shape:
            raise ValueError("network shapes do not match")
        t *= (1.0 - tau)
        t += tau * s
