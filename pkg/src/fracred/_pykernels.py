"""Pure Python/numpy implementations of the O(n^2) history kernels.

These are the reference twins of ``_ckernels.pyx``; both modules expose the
same functions with the same semantics and are checked against each other
in the test suite.
"""

from __future__ import annotations

import math

import numpy as np


def product_trapezoid(values, alpha: float, h: float) -> np.ndarray:
    """Product-trapezoidal Riemann-Liouville integral of order alpha at every node."""
    f = np.ascontiguousarray(values, dtype=np.float64)
    n = f.shape[0]
    out = np.zeros(n)
    if n < 2:
        return out
    l = np.arange(n + 1, dtype=np.float64)
    p1 = l ** (alpha + 1)
    # interior weight for lag l = n - j >= 1
    w = np.empty(n)
    w[0] = 1.0
    w[1:] = p1[2:n + 1] - 2.0 * p1[1:n] + p1[0:n - 1]
    scale = h**alpha / math.gamma(alpha + 2)
    for k in range(1, n):
        s = f[k] + np.dot(w[1:k][::-1], f[1:k]) if k > 1 else f[k]
        a0 = (k - 1) ** (alpha + 1) - (k - 1 - alpha) * k**alpha
        out[k] = scale * (s + a0 * f[0])
    return out


def l1_caputo(values, alpha: float, h: float) -> np.ndarray:
    """L1 finite-difference Caputo derivative of order 0 < alpha < 1; node 0 left as 0."""
    f = np.ascontiguousarray(values, dtype=np.float64)
    n = f.shape[0]
    out = np.zeros(n)
    j = np.arange(n, dtype=np.float64)
    b = (j + 1) ** (1 - alpha) - j ** (1 - alpha)
    df = np.diff(f)
    scale = h ** (-alpha) / math.gamma(2 - alpha)
    for k in range(1, n):
        out[k] = scale * np.dot(b[:k], df[k - 1::-1])
    return out


def _weights(orders, nsteps):
    """Predictor and corrector lag weights for each distinct order."""
    table = {}
    l = np.arange(nsteps + 2, dtype=np.float64)
    for b in set(orders):
        pw = l**b
        cw = l ** (b + 1)
        pred = pw[1:nsteps + 1] - pw[0:nsteps]
        corr = np.empty(nsteps + 1)
        corr[0] = 1.0
        corr[1:] = cw[0:nsteps] + cw[2:nsteps + 2] - 2.0 * cw[1:nsteps + 1]
        table[b] = (pred, corr)
    return table


def abm_solve(rhs, orders, x0, t0: float, h: float, nsteps: int, corrector_iterations: int = 1,
              forcing=None, matrix=None):
    """Fractional Adams-Bashforth-Moulton (PECE) for per-component orders in (0, 1].

    Either ``rhs(t, x) -> array`` is given, or ``matrix`` (and optionally a
    precomputed ``forcing`` array of shape (nsteps+1, d)) for linear systems.
    Returns ``(X, bad)`` where ``bad`` is the first node with a non-finite
    state, or -1.
    """
    orders = [float(b) for b in orders]
    x0 = np.asarray(x0, dtype=np.float64)
    d = x0.shape[0]
    X = np.zeros((nsteps + 1, d))
    F = np.zeros((nsteps + 1, d))
    X[0] = x0
    if matrix is not None:
        A = np.asarray(matrix, dtype=np.float64)
        G = None if forcing is None else np.asarray(forcing, dtype=np.float64)

        def evaluate(m, x):
            y = A @ x
            return y if G is None else y + G[m]
    else:
        def evaluate(m, x):
            return np.asarray(rhs(t0 + m * h, x), dtype=np.float64)

    F[0] = evaluate(0, x0)
    if not np.all(np.isfinite(F[0])):
        return X, 0
    table = _weights(orders, nsteps)
    groups = {}
    for i, b in enumerate(orders):
        groups.setdefault(b, []).append(i)
    groups = {b: np.array(ix) for b, ix in groups.items()}
    pscale = {b: h**b / math.gamma(b + 1) for b in groups}
    cscale = {b: h**b / math.gamma(b + 2) for b in groups}

    xp = np.empty(d)
    hist = np.empty(d)
    for m in range(nsteps):
        for b, ix in groups.items():
            pred, corr = table[b]
            Fi = F[:m + 1][:, ix]
            xp[ix] = x0[ix] + pscale[b] * (pred[m::-1] @ Fi)
            a0 = m ** (b + 1) - (m - b) * (m + 1) ** b
            tail = corr[m:0:-1] @ Fi[1:] if m > 0 else 0.0
            hist[ix] = a0 * Fi[0] + tail
        x = xp
        for _ in range(corrector_iterations):
            fx = evaluate(m + 1, x)
            xc = np.empty(d)
            for b, ix in groups.items():
                xc[ix] = x0[ix] + cscale[b] * (fx[ix] + hist[ix])
            x = xc
        X[m + 1] = x
        F[m + 1] = evaluate(m + 1, x)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(F[m + 1]))):
            return X, m + 1
    return X, -1
