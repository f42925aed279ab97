"""Dense linear-algebra kernel: symmetric solves, clamped SVD pseudo-solves
and log-determinants, all in double precision.
"""

import numpy as np

from .errors import DimensionMismatch, NoConvergence, SingularMatrix

# Default singular-value clamp used by the pseudo-solve.
DEFAULT_CLAMP = 1e-4


class SymmetricSystem:
    """A symmetric linear system (matrix, rhs).

    The matrix is symmetrized on construction, (M + M^T)/2, since
    floating-point accumulation breaks exact symmetry.
    """

    def __init__(self, matrix, rhs):
        matrix = np.asarray(matrix, dtype=np.float64)
        rhs = np.asarray(rhs, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got {matrix.shape}")
        if rhs.shape != (matrix.shape[0],):
            raise DimensionMismatch(
                f"rhs length {rhs.shape} does not match matrix order {matrix.shape[0]}"
            )
        self.matrix = 0.5 * (matrix + matrix.T)
        self.rhs = rhs

    @property
    def order(self):
        return self.matrix.shape[0]


class SvdFactors:
    """SVD factors (u, d, v) with matrix = u @ diag(d) @ v.T."""

    def __init__(self, u, d, v):
        self.u = u
        self.d = d
        self.v = v


def solve_symmetric(sys: SymmetricSystem) -> np.ndarray:
    """Solve matrix @ x = rhs by a direct factorization.

    Raises SingularMatrix if the factorization fails or the residual is
    unacceptable; the caller is expected to fall back to pseudo_solve.
    """
    try:
        x = np.linalg.solve(sys.matrix, sys.rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrix("non-finite solution")
    resid = np.linalg.norm(sys.matrix @ x - sys.rhs)
    bound = 1e-8 * (
        np.linalg.norm(sys.matrix) * np.linalg.norm(x) + np.linalg.norm(sys.rhs)
    )
    if resid > bound:
        raise SingularMatrix(f"residual {resid:.3e} exceeds bound {bound:.3e}")
    return x


def svd(matrix) -> SvdFactors:
    """Full SVD of a square matrix, u @ diag(d) @ v.T with d non-increasing."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {matrix.shape}")
    try:
        u, d, vt = np.linalg.svd(matrix)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return SvdFactors(u, d, vt.T)


def pseudo_solve(factors: SvdFactors, rhs, clamp: float = DEFAULT_CLAMP) -> np.ndarray:
    """Solve via the SVD with singular values clamped from below.

    Returns v @ diag(max(d, clamp))^-1 @ u.T @ rhs.
    """
    if clamp <= 0:
        raise ValueError("clamp must be positive")
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (factors.u.shape[0],):
        raise DimensionMismatch(
            f"rhs length {rhs.shape} does not match factor order {factors.u.shape[0]}"
        )
    d = np.maximum(factors.d, clamp)
    return factors.v @ ((factors.u.T @ rhs) / d)


def log_determinant(matrix) -> float:
    """Sum of log singular values; -inf if any singular value is zero."""
    d = svd(matrix).d
    if np.any(d == 0.0):
        return -np.inf
    return float(np.sum(np.log(d)))
