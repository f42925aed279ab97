"""Neuron firing pattern F = I(XA > 0), its blended form G = (1-alpha)F + alpha,
and the hidden feature matrix S = (sigma(XA), 1) used by the output-layer fit.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .model import ActivationConfig


@dataclass
class FiringPattern:
    """Binary firing matrix and its blend for one (X, A) pair.

    G entries are alpha where the unit is off and 1 where it fires, so that
    sigma(XA) == G * (XA) elementwise for the A that produced the pattern.
    """

    F: np.ndarray  # N x h, {0, 1}
    G: np.ndarray  # N x h, {alpha, 1}
    alpha: float


def _check_dims(X, A):
    if X.shape[1] != A.shape[0]:
        raise DimensionMismatch(
            f"design width {X.shape[1]} != hidden weight rows {A.shape[0]}"
        )


def compute_pattern(X, A, act: ActivationConfig) -> FiringPattern:
    """F_ij = 1 iff (XA)_ij > 0 (strict inequality at the boundary)."""
    X = np.asarray(X, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    _check_dims(X, A)
    F = (X @ A > 0.0).astype(np.float64)
    G = (1.0 - act.alpha) * F + act.alpha
    return FiringPattern(F=F, G=G, alpha=act.alpha)


def hidden_features(X, A, act: ActivationConfig) -> np.ndarray:
    """S = (sigma(XA), 1): activations followed by a bias column of ones."""
    X = np.asarray(X, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    _check_dims(X, A)
    H = act.apply(X @ A)
    return np.hstack([H, np.ones((X.shape[0], 1))])
