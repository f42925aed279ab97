"""Independent oracle routines shared by the test modules.

Everything here is written naively (explicit loops, finite differences)
and never calls the production solve paths it is used to check.
"""

import numpy as np


def frozen_loss(a_vec, G, B, b0, X, Y, lam):
    """Square loss with the firing pattern held fixed, as a function of the
    unraveled hidden weights a (block j = weight vector of unit j)."""
    n, c = Y.shape
    h = G.shape[1]
    dp1 = X.shape[1]
    A = a_vec.reshape(h, dp1).T
    total = 0.0
    for k in range(c):
        for i in range(n):
            pred = b0[k]
            for j in range(h):
                pred += B[j, k] * G[i, j] * float(X[i] @ A[:, j])
            total += (pred - Y[i, k]) ** 2
    total /= n
    total += lam * (np.sum(b0**2) + np.sum(B**2) + np.sum(a_vec**2))
    return total


def frozen_loss_fast(a_vec, G, B, b0, X, Y, lam):
    """Same quantity as frozen_loss, vectorized for finite-difference use;
    still evaluates the prediction formula directly, never the assembled
    normal system."""
    h = G.shape[1]
    A = a_vec.reshape(h, X.shape[1]).T
    pred = (G * (X @ A)) @ B + b0
    total = float(np.sum((pred - Y) ** 2)) / X.shape[0]
    return total + lam * (np.sum(b0**2) + np.sum(B**2) + np.sum(a_vec**2))


def fd_gradient(fn, x, h=1e-6):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.ravel()
    gf = g.ravel()
    for i in range(flat.size):
        step = h * max(1.0, abs(flat[i]))
        orig = flat[i]
        flat[i] = orig + step
        fp = fn(x)
        flat[i] = orig - step
        fm = fn(x)
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * step)
    return g


def gram_blocks_loops(X, G):
    """Triple-loop U_jl = (1/N) sum_i G_ij G_il x_i x_i^T."""
    n, dp1 = X.shape
    h = G.shape[1]
    u = np.zeros((h, h, dp1, dp1))
    for j in range(h):
        for l in range(h):
            for i in range(n):
                u[j, l] += G[i, j] * G[i, l] * np.outer(X[i], X[i])
    return u / n


def normal_system_loops(X, G, B, b0, Y, lam):
    """Quadruple-loop assembly of (M + lam*I, rhs)."""
    n, dp1 = X.shape
    h = G.shape[1]
    c = Y.shape[1]
    u = gram_blocks_loops(X, G)
    m = np.zeros((h * dp1, h * dp1))
    for j in range(h):
        for l in range(h):
            block = np.zeros((dp1, dp1))
            for k in range(c):
                block += B[j, k] * B[l, k] * u[j, l]
            m[j * dp1 : (j + 1) * dp1, l * dp1 : (l + 1) * dp1] = block
    m += lam * np.eye(h * dp1)
    rhs = np.zeros(h * dp1)
    for j in range(h):
        v = np.zeros(dp1)
        for k in range(c):
            for i in range(n):
                v += B[j, k] * (Y[i, k] - b0[k]) * G[i, j] * X[i]
        rhs[j * dp1 : (j + 1) * dp1] = v / n
    return m, rhs


def output_layer_loss(S, Y, W, lam):
    """Regularized square loss as a function of the stacked (B; b0) matrix W,
    given fixed hidden features S."""
    n = S.shape[0]
    resid = S @ W - Y
    return float(np.sum(resid * resid)) / n + lam * float(np.sum(W * W))


def paired_t(diff):
    """Textbook paired t statistic on a vector of differences."""
    n = len(diff)
    mean = sum(diff) / n
    var = sum((x - mean) ** 2 for x in diff) / (n - 1)
    return mean / np.sqrt(var / n)
