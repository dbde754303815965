"""Jacobian, non-degeneracy rank and a gauge-fixed Newton solver for the forces.

The force map ``p -> F`` is holomorphic in the points, so we work with the
``m x m`` complex Jacobian.  Its real rank is twice its complex rank.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import (Configuration, canonical_level, force_vector,
                     level_points)
from .errors import DegenerateConfigurationError

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class JacobianReport:
    """Complex derivative of ``p -> F`` and its spectrum.

    Attributes
    ----------
    m : int
        Number of points.
    matrix : ndarray, shape (m, m)
        ``matrix[a, b] = dF_a / dp_b`` in flat ordering.
    singular_values : ndarray
        Descending singular values of ``matrix``.
    rank : int
        Count of singular values above ``tol * singular_values[0]``.
    nondegenerate : bool
        ``rank == m - 1``.
    tol : float
    """

    m: int
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    nondegenerate: bool
    tol: float

    @property
    def gap(self) -> float:
        """Ratio of the last retained singular value to the first dropped one."""
        s = self.singular_values
        if self.rank == 0 or self.rank >= len(s):
            return np.inf
        return float(s[self.rank - 1] / s[self.rank]) if s[self.rank] > 0 else np.inf


def _jacobian_matrix(config: Configuration) -> np.ndarray:
    m = config.m
    off = config.offsets()
    J = np.zeros((m, m), dtype=complex)
    N = config.N
    for k in range(1, N + 1):
        s = 1 if k % 2 == 0 else -1
        P = level_points(config, k)
        rows = slice(off[k - 1], off[k])
        n = len(P)
        blk = np.zeros((n, n), dtype=complex)

        if n > 1:
            D = P[:, None] - P[None, :]
            np.fill_diagonal(D, 1.0)
            D2 = D**2 * n**2
            # d/dP_j of (P_i + P_j)/(P_i - P_j) and d/dP_i respectively
            off_diag = 2 * P[:, None] / D2
            self_terms = -2 * P[None, :] / D2
            np.fill_diagonal(off_diag, 0.0)
            np.fill_diagonal(self_terms, 0.0)
            blk += off_diag
            blk[np.diag_indices(n)] += self_terms.sum(axis=1)

        y = P**s
        for dk in (1, -1):
            kn = k + dk
            kc, _ = canonical_level(config, kn)
            Q = level_points(config, kn)
            x = Q**s
            nq = len(Q)
            W = x[None, :] * y[:, None] / ((x[None, :] - y[:, None])**2 * n * nq)
            # Plus and minus terms share this form.  The neighbour derivative
            # is taken in the stored coordinate, which absorbs the period shift.
            blk[np.diag_indices(n)] += W.sum(axis=1) / P
            J[rows, off[kc - 1]:off[kc]] -= W / config.levels[kc - 1][None, :]
        J[rows, rows] += blk
    return J


def force_jacobian(config: Configuration, tol: float = DEFAULT_RANK_TOL,
                   method: str = "analytic") -> JacobianReport:
    """Complex Jacobian of the forces with its singular values and rank.

    Parameters
    ----------
    config : Configuration
    tol : float
        Relative singular value threshold for the rank.
    method : {"analytic", "fd"}
        ``"fd"`` uses central differences and exists as a debugging aid.
    """
    if method == "analytic":
        J = _jacobian_matrix(config)
    elif method == "fd":
        J = jacobian_fd(config)
    else:
        raise ValueError(f"unknown method {method!r}")
    sv = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0
    J.flags.writeable = False
    return JacobianReport(config.m, J, sv, rank, rank == config.m - 1, tol)


def jacobian_fd(config: Configuration, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian with relative step ``h``.

    Holomorphy lets a single real-direction difference give the full
    complex derivative.
    """
    p = config.flat()
    m = len(p)
    J = np.empty((m, m), dtype=complex)
    for j in range(m):
        step = h * max(1.0, abs(p[j]))
        dp = np.zeros(m, dtype=complex)
        dp[j] = step
        fp = force_vector(config.with_flat(p + dp))
        fm = force_vector(config.with_flat(p - dp))
        J[:, j] = (fp - fm) / (2 * step)
    return J


def nondegeneracy_rank(config: Configuration, tol: float = DEFAULT_RANK_TOL) -> int:
    return force_jacobian(config, tol).rank


@dataclass(frozen=True)
class SolveOutcome:
    config: Configuration
    iterations: int
    residual: float
    converged: bool
    gauge: str
    history: tuple = ()


def _residual(config):
    return float(np.max(np.abs(force_vector(config))))


def _check_spread(config, limit):
    mags = np.abs(config.flat())
    if mags.max() > limit * mags.min():
        raise DegenerateConfigurationError(
            f"points escaped toward 0 or infinity (modulus ratio {mags.max() / mags.min():.3e})")


def solve_balance(init: Configuration, tol: float = 1e-12, max_iter: int = 50,
                  max_halvings: int = 30, spread_limit: float = 1e10) -> SolveOutcome:
    """Newton iteration for ``F = 0`` with ``p[1, 1]`` held fixed.

    Each step solves the ``m x (m - 1)`` least-squares system on the remaining
    coordinates.  A step that raises the residual, or that makes two points
    collide, is halved up to ``max_halvings`` times.

    If the line search stalls (every halved step fails to decrease the
    residual) the current iterate is returned with ``converged=False``.

    Raises
    ------
    DegenerateConfigurationError
        If every trial step makes points collide, or if the ratio of the
        largest to the smallest point modulus exceeds ``spread_limit`` (the
        iterate is running into a configuration with a point at 0 or infinity).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    gauge = f"p[1,1] fixed at {complex(init.levels[0][0])!r}"
    cfg = init
    res = _residual(cfg)
    history = [res]
    it = 0
    while res > tol and it < max_iter:
        it += 1
        F = force_vector(cfg)
        J = _jacobian_matrix(cfg)
        dp, *_ = np.linalg.lstsq(J[:, 1:], -F, rcond=None)
        p = cfg.flat()
        lam = 1.0
        admissible = False
        for _ in range(max_halvings + 1):
            trial = p.copy()
            trial[1:] += lam * dp
            try:
                cand = cfg.with_flat(trial)
                cres = _residual(cand)
                admissible = True
            except (DegenerateConfigurationError, FloatingPointError):
                cres = np.inf
            if cres < res:
                break
            lam *= 0.5
        else:
            if not admissible:
                raise DegenerateConfigurationError(
                    f"every Newton trial step at iteration {it} collides points")
            return SolveOutcome(cfg, it, res, False, gauge + "; line search stalled",
                                tuple(history))
        cfg, res = cand, cres
        history.append(res)
        _check_spread(cfg, spread_limit)
    return SolveOutcome(cfg, it, res, res <= tol, gauge, tuple(history))


def canonicalize(config: Configuration) -> Configuration:
    """Divide by ``p[1, 1]`` and sort each level by argument."""
    c = config.levels[0][0]
    levels = []
    for lvl in config.levels:
        q = np.asarray(lvl) / c
        levels.append(q[np.lexsort((np.abs(q), np.round(np.angle(q), 12)))])
    return Configuration(levels, config.T, config.separation_tol, config.name)


def _same_set(a, b, tol):
    if len(a) != len(b):
        return False
    used = np.zeros(len(b), bool)
    for z in a:
        d = np.where(used, np.inf, np.abs(b - z))
        j = int(np.argmin(d))
        if d[j] > tol:
            return False
        used[j] = True
    return True


def is_roots_of_unity_class(config: Configuration, tol: float = 1e-8) -> bool:
    """True if ``config`` is a scaled relabelling of ``{1, -1} / {i, -i}``."""
    if config.counts != (2, 2) or abs(config.T) > tol:
        return False
    c = canonicalize(config)
    return (_same_set(c.levels[0], np.array([1, -1]), tol)
            and _same_set(c.levels[1], np.array([1j, -1j]), tol))
