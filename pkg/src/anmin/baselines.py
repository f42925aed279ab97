"""Minibatch SGD and Adam baselines on the same two-layer architecture,
with hand-derived analytic gradients and the step-decay schedule.
"""

import time
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import DimensionMismatch, DivergenceDetected
from .model import ActivationConfig, Dataset, NetworkParams, loss, mse

BLOWUP_THRESHOLD = 1e12


@dataclass
class GdConfig:
    optimizer: str = "adam"  # 'sgd' or 'adam'
    lr0: float = 0.03
    epochs: int = 300
    batch: int = 256
    decay_every: int = 100
    decay_factor: float = 10.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.lr0 < 0 or self.epochs < 1 or self.batch < 1:
            raise ValueError("invalid GdConfig")
        if self.decay_every < 1 or self.decay_factor <= 0:
            raise ValueError("invalid decay schedule")


def gradients(params: NetworkParams, act: ActivationConfig, batch_X, batch_Y, lam):
    """Exact gradient of the batch square loss w.r.t. (A, B, b0).

    The ReLU subgradient at a kink is taken as 0, matching the strict
    inequality of the firing-pattern convention.
    """
    X = np.asarray(batch_X, dtype=np.float64)
    Y = np.asarray(batch_Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[1] != params.A.shape[0] or Y.shape[1] != params.b0.shape[0]:
        raise DimensionMismatch("batch shapes inconsistent with parameters")
    n = X.shape[0]
    Z = X @ params.A
    H = act.apply(Z)
    R = H @ params.B + params.b0 - Y
    scale = 2.0 / n
    grad_b0 = scale * R.sum(axis=0) + 2.0 * lam * params.b0
    grad_B = scale * (H.T @ R) + 2.0 * lam * params.B
    # sigma'(z) = alpha + (1 - alpha) * I(z > 0), strict at the kink
    dZ = (R @ params.B.T) * (act.alpha + (1.0 - act.alpha) * (Z > 0.0))
    grad_A = scale * (X.T @ dZ) + 2.0 * lam * params.A
    return grad_A, grad_B, grad_b0


class _AdamState:
    def __init__(self, shapes):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0


def _adam_step(state, grads, lr, cfg):
    state.t += 1
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    out = []
    for i, g in enumerate(grads):
        state.m[i] = b1 * state.m[i] + (1 - b1) * g
        state.v[i] = b2 * state.v[i] + (1 - b2) * g * g
        mhat = state.m[i] / (1 - b1**state.t)
        vhat = state.v[i] / (1 - b2**state.t)
        out.append(lr * mhat / (np.sqrt(vhat) + cfg.adam_eps))
    return out


@dataclass
class GdTraceRow:
    epoch: int
    train_loss: float
    train_mse: float
    wall_seconds: float


def train_gd(
    data: Dataset,
    act: ActivationConfig,
    cfg: GdConfig,
    hidden_units: int,
    lam: float = 0.0,
    seed: int = 0,
) -> Tuple[NetworkParams, List[GdTraceRow]]:
    """Run minibatch SGD or Adam with step decay; returns (params, trace).

    The trace records the full-train loss after every epoch. Raises
    DivergenceDetected if the loss exceeds 1e12.
    """
    rng = np.random.default_rng(seed)
    d = data.n_features
    bound = 1.0 / np.sqrt(d + 1)
    params = NetworkParams(
        rng.uniform(-bound, bound, size=(d + 1, hidden_units)),
        rng.uniform(-1.0 / np.sqrt(hidden_units), 1.0 / np.sqrt(hidden_units),
                    size=(hidden_units, data.n_outputs)),
        np.zeros(data.n_outputs),
    )
    adam = _AdamState([params.A.shape, params.B.shape, params.b0.shape])
    trace: List[GdTraceRow] = []
    start = time.perf_counter()

    for epoch in range(cfg.epochs):
        lr = cfg.lr0 / cfg.decay_factor ** (epoch // cfg.decay_every)
        order = rng.permutation(data.n)
        for s in range(0, data.n, cfg.batch):
            idx = order[s : s + cfg.batch]
            grads = gradients(params, act, data.X[idx], data.Y[idx], lam)
            if cfg.optimizer == "adam":
                steps = _adam_step(adam, grads, lr, cfg)
            else:
                steps = [lr * g for g in grads]
            new = [params.A - steps[0], params.B - steps[1], params.b0 - steps[2]]
            if not all(np.all(np.isfinite(p)) for p in new):
                raise DivergenceDetected(f"non-finite parameters at epoch {epoch}")
            params = NetworkParams(*new)
        l = loss(params, act, data, lam)
        if not np.isfinite(l) or l > BLOWUP_THRESHOLD:
            raise DivergenceDetected(f"loss {l} at epoch {epoch}")
        trace.append(
            GdTraceRow(epoch + 1, l, mse(params, act, data), time.perf_counter() - start)
        )
    return params, trace
