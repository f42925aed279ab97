"""End-to-end alternating analytic trainer.

Each iteration freezes the neuron firing pattern of the current hidden
weights, solves the guarded critical-point system for the hidden layer,
refits the output layer by ridge OLS, and tracks the best model seen by
training loss (per-iteration loss can jump when the pattern changes).
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import NumericalFailure
from .firing import compute_pattern, hidden_features
from .model import ActivationConfig, Dataset, HyperParams, NetworkParams, loss, mse
from .solvers import accumulate_gram, assemble_system, fit_output_layer, solve_hidden_layer

DEGENERATE_POLICIES = ("pseudo_solve", "random_restart", "stop")


@dataclass(frozen=True)
class AblationConfig:
    """Variants of the trainer for the ablation study.

    The default (track_min=True, pseudo_solve) is the full algorithm.
    """

    track_min: bool = True
    degenerate_policy: str = "pseudo_solve"

    def __post_init__(self):
        if self.degenerate_policy not in DEGENERATE_POLICIES:
            raise ValueError(f"unknown degenerate_policy {self.degenerate_policy!r}")


@dataclass
class TraceRow:
    iteration: int
    train_loss: float
    train_mse: float
    logdet: Optional[float]  # None for the initialization row
    path: str  # 'init', 'direct', 'svd-clamped' or 'restart'
    wall_seconds: float  # cumulative


@dataclass
class AnminTrace:
    rows: List[TraceRow] = field(default_factory=list)
    best_loss: float = np.inf
    best_iteration: int = 0
    best_params: Optional[NetworkParams] = None
    stopped_early: bool = False


def _draw_hidden(rng, d, h):
    bound = 1.0 / np.sqrt(d + 1)
    return rng.uniform(-bound, bound, size=(d + 1, h))


def init_hidden(seed, d, h):
    """Scaled-uniform random hidden weights on (-1/sqrt(d+1), 1/sqrt(d+1))."""
    if h < 1:
        raise ValueError("h must be >= 1")
    return _draw_hidden(np.random.default_rng(seed), d, h)


def train(
    data: Dataset,
    act: ActivationConfig,
    hp: HyperParams,
    hidden_units: int,
    ab: AblationConfig = AblationConfig(),
    seed: int = 0,
):
    """Run the alternating trainer; returns (params, trace).

    The returned params are the best-by-training-loss model when
    ab.track_min is set, otherwise the final model.
    """
    rng = np.random.default_rng(seed)
    d = data.n_features
    start = time.perf_counter()

    A = _draw_hidden(rng, d, hidden_units)
    B, b0 = fit_output_layer(hidden_features(data.X, A, act), data.Y, hp.lam)
    params = NetworkParams(A, B, b0)
    l0 = loss(params, act, data, hp.lam)
    if not np.isfinite(l0):
        raise NumericalFailure("non-finite loss after initialization")

    trace = AnminTrace()
    trace.rows.append(
        TraceRow(0, l0, mse(params, act, data), None, "init", time.perf_counter() - start)
    )
    trace.best_loss = l0
    trace.best_iteration = 0
    trace.best_params = params.copy()

    for i in range(1, hp.iterations + 1):
        pattern = compute_pattern(data.X, A, act)
        blocks = accumulate_gram(data.X, pattern, hp.accumulation_batch)
        system = assemble_system(blocks, B, b0, data.Y, data.X, pattern, hp.lam)

        if system.logdet > hp.tau:
            A, path = solve_hidden_layer(system, hp.tau, hp.clamp)
        elif ab.degenerate_policy == "pseudo_solve":
            A, path = solve_hidden_layer(system, hp.tau, hp.clamp)
        elif ab.degenerate_policy == "random_restart":
            A = _draw_hidden(rng, d, hidden_units)
            path = "restart"
        else:  # stop
            trace.stopped_early = True
            break

        B, b0 = fit_output_layer(hidden_features(data.X, A, act), data.Y, hp.lam)
        params = NetworkParams(A, B, b0)
        l_i = loss(params, act, data, hp.lam)
        if not np.isfinite(l_i):
            raise NumericalFailure(f"non-finite loss at iteration {i}")
        trace.rows.append(
            TraceRow(
                i, l_i, mse(params, act, data), system.logdet, path,
                time.perf_counter() - start,
            )
        )
        if l_i < trace.best_loss:
            trace.best_loss = l_i
            trace.best_iteration = i
            trace.best_params = params.copy()

    final = trace.best_params if ab.track_min else params
    return final.copy(), trace


def diagnose(trace: AnminTrace) -> dict:
    """Summary of the log-determinant trajectory and solver paths."""
    if not trace.rows:
        raise ValueError("empty trace")
    logdets = [r.logdet for r in trace.rows if r.logdet is not None]
    return {
        "iterations": trace.rows[-1].iteration,
        "min_logdet": min(logdets) if logdets else None,
        "max_logdet": max(logdets) if logdets else None,
        "final_logdet": logdets[-1] if logdets else None,
        "neg_inf_logdets": sum(1 for v in logdets if v == -np.inf),
        "svd_clamped_solves": sum(1 for r in trace.rows if r.path == "svd-clamped"),
        "restarts": sum(1 for r in trace.rows if r.path == "restart"),
        "best_iteration": trace.best_iteration,
        "best_loss": trace.best_loss,
        "stopped_early": trace.stopped_early,
    }
