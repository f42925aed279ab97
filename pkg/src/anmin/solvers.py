"""The two analytic layer fits.

Output layer: ridge OLS for (B, b0) per output on the hidden features S.

Hidden layer: with the firing pattern frozen, the loss is quadratic in the
unraveled hidden weights a = (a_1^T, ..., a_h^T)^T, so its critical point is
the solution of a symmetric linear system. The system matrix is assembled
from batched Gram blocks

    U_jl = (1/N) sum_i G_ij G_il x_i x_i^T      (x_i the augmented row)

as M_jl = sum_k b_jk b_lk U_jl, shifted by lam*I, with a log-determinant
guard deciding between a direct solve and a clamped SVD pseudo-solve.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .errors import DimensionMismatch, SingularMatrix, SingularSystem
from .firing import FiringPattern


@dataclass
class GramBlocks:
    """h x h grid of (d+1) x (d+1) Gram blocks, stored as u[j, l, :, :]."""

    u: np.ndarray

    @property
    def hidden_units(self):
        return self.u.shape[0]

    @property
    def block_order(self):
        return self.u.shape[2]


@dataclass
class NormalSystem:
    """Assembled hidden-layer system: m = M + lam*I, its rhs and log-det.

    The SVD of m is kept when available so the pseudo-solve path can reuse
    the factorization already paid for by the log-determinant.
    """

    m: np.ndarray
    rhs: np.ndarray
    logdet: float
    hidden_units: int
    factors: Optional[linalg.SvdFactors] = field(default=None, repr=False)


def fit_output_layer(S, Y, lam):
    """Ridge OLS of the targets on the hidden features.

    Solves ((1/N) S^T S + lam*I) w_k = (1/N) S^T y_k for every output k;
    returns (B, b0) with B the first h rows and b0 the last row of the
    stacked solution. This is the exact minimizer of the regularized square
    loss for fixed hidden weights.
    """
    S = np.asarray(S, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if S.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"S has {S.shape[0]} rows but Y has {Y.shape[0]}")
    n = S.shape[0]
    gram = S.T @ S / n + lam * np.eye(S.shape[1])
    try:
        W = np.linalg.solve(gram, S.T @ Y / n)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(W)):
        raise SingularSystem("non-finite output-layer solution")
    return W[:-1, :], W[-1, :]


def _pattern_features(X, G):
    """N x h(d+1) matrix with row i the per-unit gated copies G_ij * x_i."""
    # (N, h, d+1) -> flatten unit-major so block j of a column index is unit j
    return (G[:, :, None] * X[:, None, :]).reshape(X.shape[0], -1)


def accumulate_gram(X, pattern: FiringPattern, batch: int) -> GramBlocks:
    """Accumulate the Gram blocks over row-batches of the stated size.

    Batches are combined in a fixed order, so the result is independent of
    the batch size and bitwise reproducible.
    """
    if batch < 1:
        raise ValueError("batch must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    n, dp1 = X.shape
    h = pattern.G.shape[1]
    total = np.zeros((h * dp1, h * dp1))
    for start in range(0, n, batch):
        P = _pattern_features(X[start : start + batch], pattern.G[start : start + batch])
        total += P.T @ P
    total /= n
    u = total.reshape(h, dp1, h, dp1).transpose(0, 2, 1, 3)
    return GramBlocks(u=np.ascontiguousarray(u))


def assemble_system(
    blocks: GramBlocks, B, b0, Y, X, pattern: FiringPattern, lam
) -> NormalSystem:
    """Assemble m = M + lam*I and the right-hand side of the critical-point
    system, with the log-determinant evaluated from a single SVD of m."""
    B = np.asarray(B, dtype=np.float64)
    b0 = np.asarray(b0, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    h = blocks.hidden_units
    dp1 = blocks.block_order
    n = X.shape[0]

    bbt = B @ B.T  # (BB^T)_jl multiplies block (j, l)
    m4 = bbt[:, :, None, None] * blocks.u
    m = m4.transpose(0, 2, 1, 3).reshape(h * dp1, h * dp1)
    m = 0.5 * (m + m.T) + lam * np.eye(h * dp1)

    # rhs block j = (1/N) sum_i [ (Y - b0) B^T ]_ij G_ij x_i
    W = (Y - b0) @ B.T
    rhs = ((W * pattern.G).T @ X / n).reshape(h * dp1)

    factors = linalg.svd(m)
    if np.any(factors.d == 0.0):
        logdet = -np.inf
    else:
        logdet = float(np.sum(np.log(factors.d)))
    return NormalSystem(m=m, rhs=rhs, logdet=logdet, hidden_units=h, factors=factors)


def solve_hidden_layer(sys: NormalSystem, tau, clamp):
    """Guarded solve of the hidden-layer system.

    Uses the direct symmetric solve when the log-determinant clears tau,
    falling back (and defaulting, below tau) to the clamped SVD pseudo-solve.
    Returns the (d+1) x h weight matrix and the path taken, 'direct' or
    'svd-clamped'.
    """
    path = "svd-clamped"
    a = None
    if sys.logdet > tau:
        try:
            a = linalg.solve_symmetric(linalg.SymmetricSystem(sys.m, sys.rhs))
            path = "direct"
        except SingularMatrix:
            a = None
    if a is None:
        factors = sys.factors if sys.factors is not None else linalg.svd(sys.m)
        a = linalg.pseudo_solve(factors, sys.rhs, clamp)
    h = sys.hidden_units
    return a.reshape(h, -1).T, path
