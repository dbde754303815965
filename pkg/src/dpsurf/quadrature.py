"""Vectorised adaptive Gauss-Legendre quadrature along straight segments."""
from __future__ import annotations

import numpy as np

from .errors import QuadratureError

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (10, 20)}


def _rule(f, w0, w1, n):
    x, wt = _GL[n]
    mid = 0.5 * (w0 + w1)
    half = 0.5 * (w1 - w0)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = f(nodes)  # (..., S, n)
    return np.sum(vals * wt, axis=-1) * half


def segment_integrals(f, w0, w1, rtol=1e-13, atol=0.0, max_depth=12):
    """Integrate ``f`` over every segment ``[w0[s], w1[s]]`` of the complex plane.

    Parameters
    ----------
    f : callable
        Maps an array of nodes of shape ``(S, q)`` to values of shape
        ``(c, S, q)`` for ``c`` simultaneous integrands.
    w0, w1 : array_like of complex, shape (S,)
    rtol, atol : float
        A segment is accepted once the 10- and 20-point rules agree to
        ``atol + rtol * scale``, where ``scale`` is the 20-point estimate of
        ``∫|f||dw|`` for that segment.
    max_depth : int
        Maximum number of bisections.

    Returns
    -------
    ndarray, shape (c, S)
    """
    w0 = np.asarray(w0, dtype=complex).ravel()
    w1 = np.asarray(w1, dtype=complex).ravel()
    S = len(w0)
    probe = f(np.zeros((1, 1), dtype=complex) + w0[:1, None]) if S else None
    c = probe.shape[0] if S else 1
    total = np.zeros((c, S), dtype=complex)
    owner = np.arange(S)
    a, b = w0, w1
    for _ in range(max_depth + 1):
        if len(a) == 0:
            return total
        g10 = _rule(f, a, b, 10)
        g20 = _rule(f, a, b, 20)
        mag = _rule(lambda z: np.abs(f(z)), a, b, 20)
        scale = np.max(np.abs(mag), axis=0)
        err = np.max(np.abs(g20 - g10), axis=0)
        ok = err <= atol + rtol * scale
        np.add.at(total.T, owner[ok], g20[:, ok].T)
        mid = 0.5 * (a[~ok] + b[~ok])
        owner = np.concatenate([owner[~ok], owner[~ok]])
        a, b = np.concatenate([a[~ok], mid]), np.concatenate([mid, b[~ok]])
    if len(a):
        raise QuadratureError(f"{len(a)} sub-segments unresolved after {max_depth} bisections")
    return total
