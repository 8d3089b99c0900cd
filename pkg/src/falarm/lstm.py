"""Two-layer LSTM binary classifier over padded index sequences, implemented
in numpy with full analytic backpropagation through time.

Double precision throughout so gradient checking against central finite
differences is meaningful. The padding embedding (row 0) is pinned to zero
and excluded from updates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ModelConfig", "EstimatorModel", "AdamOptimizer", "bce_loss"]


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int  # number of real words V; rows are V + 2 (padding + OOV)
    embed_dim: int
    hidden_dim: int
    max_len: int

    @property
    def embedding_rows(self) -> int:
        return self.vocab_size + 2

    @property
    def oov_index(self) -> int:
        return self.vocab_size + 1


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy."""
    p = np.clip(probs, 1e-15, 1.0 - 1e-15)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


# parameter names in canonical flatten order
_PARAM_ORDER = (
    "embedding",
    "wx1", "wh1", "b1",
    "wx2", "wh2", "b2",
    "head_w", "head_b",
)


class EstimatorModel:
    """Embedding + two LSTM layers + logistic output head."""

    def __init__(self, config: ModelConfig, params: dict[str, np.ndarray]):
        self.config = config
        expected = self._shapes(config)
        if set(params) != set(expected):
            raise ValueError(f"parameter names {sorted(params)} != {sorted(expected)}")
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise ValueError(
                    f"parameter {name}: shape {params[name].shape} != {shape}"
                )
        self.params = {
            k: np.array(v, dtype=np.float64, copy=True) for k, v in params.items()
        }
        self.params["embedding"][0, :] = 0.0

    @staticmethod
    def _shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
        e, h = cfg.embed_dim, cfg.hidden_dim
        return {
            "embedding": (cfg.embedding_rows, e),
            "wx1": (e, 4 * h),
            "wh1": (h, 4 * h),
            "b1": (4 * h,),
            "wx2": (h, 4 * h),
            "wh2": (h, 4 * h),
            "b2": (4 * h,),
            "head_w": (h,),
            "head_b": (1,),
        }

    @classmethod
    def initialize(cls, config: ModelConfig, seed: int) -> "EstimatorModel":
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in cls._shapes(config).items():
            if name in ("b1", "b2", "head_b"):
                params[name] = np.zeros(shape)
            else:
                fan_in = shape[0]
                params[name] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)
        # standard trick: forget-gate bias starts positive so early cells
        # retain state
        h = config.hidden_dim
        for b in ("b1", "b2"):
            params[b][h : 2 * h] = 1.0
        return cls(config, params)

    # --- forward / backward ------------------------------------------------

    def _check_indices(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if x.ndim == 1:
            x = x[None, :]
        if x.min(initial=0) < 0 or x.max(initial=0) > self.config.oov_index:
            raise ValueError(
                f"index out of range [0, {self.config.oov_index}]"
            )
        return x

    def _layer_forward(self, x_seq, wx, wh, b):
        """x_seq: (T, B, in); returns h_seq (T, B, H) and caches."""
        t_steps, batch, _ = x_seq.shape
        h_dim = self.config.hidden_dim
        h = np.zeros((batch, h_dim))
        c = np.zeros((batch, h_dim))
        h_seq = np.empty((t_steps, batch, h_dim))
        caches = []
        for t in range(t_steps):
            z = x_seq[t] @ wx + h @ wh + b
            i = _sigmoid(z[:, :h_dim])
            f = _sigmoid(z[:, h_dim : 2 * h_dim])
            g = np.tanh(z[:, 2 * h_dim : 3 * h_dim])
            o = _sigmoid(z[:, 3 * h_dim :])
            c_prev = c
            c = f * c + i * g
            tanh_c = np.tanh(c)
            h = o * tanh_c
            h_seq[t] = h
            caches.append((x_seq[t], i, f, g, o, c_prev, tanh_c))
        return h_seq, caches

    def _layer_backward(self, dh_seq, caches, wx, wh):
        """dh_seq: (T, B, H) external gradient per step; returns
        (dwx, dwh, db, dx_seq)."""
        t_steps, batch, h_dim = dh_seq.shape
        dwx = np.zeros_like(wx)
        dwh = np.zeros_like(wh)
        db = np.zeros(4 * h_dim)
        dx_seq = np.empty((t_steps, batch, wx.shape[0]))
        dh = np.zeros((batch, h_dim))
        dc = np.zeros((batch, h_dim))
        for t in range(t_steps - 1, -1, -1):
            x_t, i, f, g, o, c_prev, tanh_c = caches[t]
            dh = dh + dh_seq[t]
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c ** 2)
            di = dc * g
            dg = dc * i
            df = dc * c_prev
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g ** 2),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            dwx += x_t.T @ dz
            if t > 0:
                h_prev = caches[t - 1][6] * caches[t - 1][4]  # o * tanh(c)
                dwh += h_prev.T @ dz
            db += dz.sum(axis=0)
            dx_seq[t] = dz @ wx.T
            dh = dz @ wh.T
            dc = dc * f
        return dwx, dwh, db, dx_seq

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Probabilities in (0, 1) for a batch of padded index sequences."""
        probs, _ = self._forward_cached(x)
        return probs

    def _forward_cached(self, x: np.ndarray):
        x = self._check_indices(x)
        p = self.params
        emb = p["embedding"][x]  # (B, T, E)
        x_seq = emb.transpose(1, 0, 2)  # (T, B, E)
        h1_seq, cache1 = self._layer_forward(x_seq, p["wx1"], p["wh1"], p["b1"])
        h2_seq, cache2 = self._layer_forward(h1_seq, p["wx2"], p["wh2"], p["b2"])
        last_h = h2_seq[-1]  # (B, H)
        logit = last_h @ p["head_w"] + p["head_b"][0]
        probs = _sigmoid(logit)
        return probs, (x, x_seq, h1_seq, cache1, h2_seq, cache2, last_h)

    def loss_and_grads(
        self, x: np.ndarray, labels: np.ndarray
    ) -> tuple[float, dict[str, np.ndarray]]:
        """Mean BCE loss and analytic gradients for every parameter."""
        probs, cache = self._forward_cached(x)
        x_idx, x_seq, h1_seq, cache1, h2_seq, cache2, last_h = cache
        labels = np.asarray(labels, dtype=np.float64)
        batch = x_idx.shape[0]
        loss = bce_loss(probs, labels)

        p = self.params
        dlogit = (probs - labels) / batch  # BCE through the sigmoid
        grads: dict[str, np.ndarray] = {}
        grads["head_w"] = last_h.T @ dlogit
        grads["head_b"] = np.array([dlogit.sum()])

        dh2 = np.zeros_like(h2_seq)
        dh2[-1] = np.outer(dlogit, p["head_w"])
        grads["wx2"], grads["wh2"], grads["b2"], dh1_seq = self._layer_backward(
            dh2, cache2, p["wx2"], p["wh2"]
        )
        grads["wx1"], grads["wh1"], grads["b1"], dx_seq = self._layer_backward(
            dh1_seq, cache1, p["wx1"], p["wh1"]
        )

        demb = np.zeros_like(p["embedding"])
        flat_idx = x_idx.T.reshape(-1)  # (T*B,) matching dx_seq layout
        np.add.at(demb, flat_idx, dx_seq.reshape(-1, self.config.embed_dim))
        demb[0, :] = 0.0  # padding row stays frozen
        grads["embedding"] = demb
        return loss, grads

    # --- parameter vector --------------------------------------------------

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.params[name].ravel() for name in _PARAM_ORDER])

    def unflatten(self, vector: np.ndarray) -> None:
        """Load parameters from a flat vector (exact inverse of flatten)."""
        offset = 0
        for name in _PARAM_ORDER:
            size = self.params[name].size
            self.params[name] = (
                vector[offset : offset + size].reshape(self.params[name].shape).copy()
            )
            offset += size
        if offset != vector.size:
            raise ValueError(f"vector size {vector.size} != expected {offset}")
        self.params["embedding"][0, :] = 0.0

    def flatten_grads(self, grads: dict[str, np.ndarray]) -> np.ndarray:
        return np.concatenate([grads[name].ravel() for name in _PARAM_ORDER])

    def copy(self) -> "EstimatorModel":
        return EstimatorModel(
            self.config, {k: v.copy() for k, v in self.params.items()}
        )


class AdamOptimizer:
    """Adaptive-moment gradient descent (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(
        self,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, model: EstimatorModel, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for name, grad in grads.items():
            if name not in self._m:
                self._m[name] = np.zeros_like(grad)
                self._v[name] = np.zeros_like(grad)
            m = self._m[name] = self.beta1 * self._m[name] + (1 - self.beta1) * grad
            v = self._v[name] = self.beta2 * self._v[name] + (1 - self.beta2) * grad ** 2
            m_hat = m / (1 - self.beta1 ** self.t)
            v_hat = v / (1 - self.beta2 ** self.t)
            model.params[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
        model.params["embedding"][0, :] = 0.0
