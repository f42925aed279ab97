"""Network parameter container, leaky-ReLU forward pass, the regularized
square loss and evaluation metrics (MSE, R^2).

Conventions:
  - the design matrix X is N x (d+1) with a leading all-ones column;
  - A is (d+1) x h, B is h x c, b0 has length c;
  - reported MSE is SSE / (N*c), i.e. averaged over observations and outputs;
  - R^2 is 1 - SSE_k/SST_k per output, averaged over the c outputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateTargets, DimensionMismatch


@dataclass(frozen=True)
class ActivationConfig:
    """Leaky-ReLU slope: sigma(x) = alpha*x + (1-alpha)*max(0, x)."""

    alpha: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")

    def apply(self, z):
        return self.alpha * z + (1.0 - self.alpha) * np.maximum(z, 0.0)


@dataclass
class NetworkParams:
    """The triple (A, B, b0): hidden weights, output weights, output biases."""

    A: np.ndarray  # (d+1) x h
    B: np.ndarray  # h x c
    b0: np.ndarray  # length c

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.float64)
        self.B = np.asarray(self.B, dtype=np.float64)
        self.b0 = np.asarray(self.b0, dtype=np.float64)
        if self.A.ndim != 2 or self.B.ndim != 2 or self.b0.ndim != 1:
            raise DimensionMismatch("A, B must be matrices and b0 a vector")
        if self.A.shape[1] != self.B.shape[0] or self.B.shape[1] != self.b0.shape[0]:
            raise DimensionMismatch(
                f"inconsistent shapes A{self.A.shape}, B{self.B.shape}, b0{self.b0.shape}"
            )
        for arr in (self.A, self.B, self.b0):
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")

    @property
    def hidden_units(self):
        return self.A.shape[1]

    @property
    def outputs(self):
        return self.B.shape[1]

    def copy(self):
        return NetworkParams(self.A.copy(), self.B.copy(), self.b0.copy())


@dataclass
class Dataset:
    """Design matrix with a leading ones column and a multi-output target matrix."""

    X: np.ndarray  # N x (d+1), X[:, 0] == 1
    Y: np.ndarray  # N x c

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.Y = np.asarray(self.Y, dtype=np.float64)
        if self.Y.ndim == 1:
            self.Y = self.Y[:, None]
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise DataError("X and Y must be matrices")
        if self.X.shape[0] != self.Y.shape[0] or self.X.shape[0] < 1:
            raise DataError(
                f"X has {self.X.shape[0]} rows but Y has {self.Y.shape[0]}"
            )
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Y))):
            raise DataError("dataset contains non-finite entries")
        if not np.all(self.X[:, 0] == 1.0):
            raise DataError("first column of the design matrix must be all ones")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        """Feature count d, excluding the ones column."""
        return self.X.shape[1] - 1

    @property
    def n_outputs(self):
        return self.Y.shape[1]


def make_dataset(features, targets) -> Dataset:
    """Build a Dataset by prepending the ones column to a raw feature matrix."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    X = np.hstack([np.ones((features.shape[0], 1)), features])
    return Dataset(X, np.asarray(targets, dtype=np.float64))


@dataclass
class HyperParams:
    """Hyperparameters of the alternating analytic trainer."""

    lam: float = 0.001
    tau: float = -10000.0
    iterations: int = 30
    clamp: float = 0.0001
    accumulation_batch: int = 256

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.clamp <= 0:
            raise ValueError("clamp must be > 0")
        if self.accumulation_batch < 1:
            raise ValueError("accumulation_batch must be >= 1")


def forward(params: NetworkParams, act: ActivationConfig, X) -> np.ndarray:
    """Predictions sigma(X @ A) @ B + b0, bias broadcast across rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != params.A.shape[0]:
        raise DimensionMismatch(
            f"design width {X.shape[1]} != hidden weight rows {params.A.shape[0]}"
        )
    return act.apply(X @ params.A) @ params.B + params.b0


def loss(params: NetworkParams, act: ActivationConfig, data: Dataset, lam: float) -> float:
    """Regularized square loss: SSE/N + lam*(|b0|^2 + |B|_F^2 + |A|_F^2)."""
    resid = forward(params, act, data.X) - data.Y
    sse = float(np.sum(resid * resid))
    reg = float(
        np.sum(params.b0**2) + np.sum(params.B**2) + np.sum(params.A**2)
    )
    return sse / data.n + lam * reg


def mse(params: NetworkParams, act: ActivationConfig, data: Dataset) -> float:
    """Mean squared error averaged over observations and outputs: SSE/(N*c)."""
    resid = forward(params, act, data.X) - data.Y
    return float(np.sum(resid * resid)) / (data.n * data.n_outputs)


def r_squared(params: NetworkParams, act: ActivationConfig, data: Dataset) -> float:
    """Coefficient of determination per output, averaged over outputs.

    SST uses the evaluated split's own target means. Raises DegenerateTargets
    if some output column is constant.
    """
    if data.n < 2:
        raise DataError("R^2 needs at least 2 observations")
    resid = forward(params, act, data.X) - data.Y
    sse = np.sum(resid * resid, axis=0)
    centered = data.Y - data.Y.mean(axis=0)
    sst = np.sum(centered * centered, axis=0)
    if np.any(sst == 0.0):
        cols = np.nonzero(sst == 0.0)[0].tolist()
        raise DegenerateTargets(f"constant target column(s) {cols}: R^2 undefined")
    return float(np.mean(1.0 - sse / sst))
