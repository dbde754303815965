"""Periodic point configurations on copies of C* and their forces.

A configuration places ``n_k`` nonzero points on each of ``N`` copies of the
punctured plane.  The point set is extended to every integer level by the
multiplicative period ``p[k + N, i] = p[k, i] * exp(T)``.  Levels are numbered
``1..N`` throughout; every access to a neighbouring level goes through
:func:`level_points`, which is the only place the period shift is applied.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateConfigurationError

DEFAULT_SEPARATION_TOL = 1e-12


def _frozen(arr):
    arr = np.array(arr, dtype=complex).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Configuration:
    """A ``T``-periodic point set ``{p[k, i]}`` with ``N`` (even) levels.

    Parameters
    ----------
    levels : sequence of sequences of complex
        ``levels[k - 1]`` holds ``p[k, 1], ..., p[k, n_k]``.
    T : complex
        Multiplicative period exponent.
    separation_tol : float
        Relative distance below which two points in a force denominator are
        treated as coincident.
    """

    levels: tuple
    T: complex = 0j
    separation_tol: float = DEFAULT_SEPARATION_TOL
    name: str | None = field(default=None, compare=False)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (self.T == other.T and self.counts == other.counts
                and all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels)))

    __hash__ = None

    def __post_init__(self):
        levels = tuple(_frozen(lvl) for lvl in self.levels)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "T", complex(self.T))
        N = len(levels)
        if N < 2 or N % 2:
            raise ValueError(f"number of levels must be a positive even integer, got {N}")
        if any(len(lvl) == 0 for lvl in levels):
            raise ValueError("every level needs at least one point")
        if not np.all(np.isfinite(np.concatenate(levels))) or not np.isfinite(self.T):
            raise ValueError("points and T must be finite")
        self._check_separation()

    def _check_separation(self):
        tol = self.separation_tol
        for k in range(1, self.N + 1):
            P = self.levels[k - 1]
            if np.any(np.abs(P) == 0):
                raise DegenerateConfigurationError(f"level {k} contains the point 0")
            if len(P) > 1:
                d = np.abs(P[:, None] - P[None, :])
                scale = np.maximum(np.abs(P)[:, None], np.abs(P)[None, :])
                np.fill_diagonal(d, np.inf)
                if np.any(d <= tol * scale):
                    raise DegenerateConfigurationError(f"coincident points on level {k}")
            Q = level_points(self, k + 1)
            d = np.abs(P[:, None] - Q[None, :])
            scale = np.maximum(np.abs(P)[:, None], np.abs(Q)[None, :])
            if np.any(d <= tol * scale):
                raise DegenerateConfigurationError(
                    f"a point on level {k} coincides with a point on level {k + 1}")

    @property
    def N(self) -> int:
        return len(self.levels)

    @property
    def counts(self) -> tuple:
        return tuple(len(lvl) for lvl in self.levels)

    @property
    def m(self) -> int:
        return sum(self.counts)

    def flat(self) -> np.ndarray:
        """All points as one vector, level by level."""
        return np.concatenate(self.levels)

    def offsets(self) -> np.ndarray:
        """Start index of each level inside :meth:`flat`."""
        return np.concatenate([[0], np.cumsum(self.counts)])

    def with_flat(self, p: np.ndarray) -> "Configuration":
        """Same shape and period, new points taken from a flat vector."""
        off = self.offsets()
        levels = [p[off[k]:off[k + 1]] for k in range(self.N)]
        return Configuration(levels, self.T, self.separation_tol, self.name)

    def index(self, k: int, i: int) -> int:
        """Flat index of ``p[k, i]`` (1-based level and point index)."""
        n = self.counts[k - 1]
        if not 1 <= i <= n:
            raise IndexError(f"point index {i} out of range 1..{n} on level {k}")
        return int(self.offsets()[k - 1]) + i - 1


@dataclass(frozen=True)
class ForceReport:
    forces: tuple
    plus_parts: tuple
    minus_parts: tuple
    mutual_parts: tuple
    total: complex
    residual_norm: float

    def flat(self) -> np.ndarray:
        return np.concatenate(self.forces)


def canonical_level(config: Configuration, k: int) -> tuple[int, int]:
    """Split an integer level ``k`` into ``(k', m)`` with ``k = k' + m N``, ``1 <= k' <= N``."""
    N = config.N
    kc = (k - 1) % N + 1
    return kc, (k - kc) // N


def level_points(config: Configuration, k: int) -> np.ndarray:
    """Points of level ``k`` for any integer ``k``, with the period shift applied."""
    kc, shift = canonical_level(config, k)
    P = config.levels[kc - 1]
    if shift == 0:
        return P
    return P * np.exp(shift * config.T)


def point_at(config: Configuration, k: int, i: int) -> complex:
    """``p[k, i]`` for any integer level ``k`` and 1-based index ``i``."""
    kc, _ = canonical_level(config, k)
    n = config.counts[kc - 1]
    if not 1 <= i <= n:
        raise IndexError(f"point index {i} out of range 1..{n} on level {kc}")
    return complex(level_points(config, k)[i - 1])


def _level_terms(config: Configuration, k: int):
    """Mutual, plus and minus force terms for every point of level ``k``."""
    kc, _ = canonical_level(config, k)
    s = 1 if k % 2 == 0 else -1
    P = level_points(config, k)
    Pn = level_points(config, k + 1)
    Pp = level_points(config, k - 1)
    nk, nn, npv = len(P), len(Pn), len(Pp)

    with np.errstate(divide="raise", invalid="raise"):
        try:
            if nk > 1:
                D = P[:, None] - P[None, :]
                S = P[:, None] + P[None, :]
                np.fill_diagonal(D, 1.0)
                R = S / D
                np.fill_diagonal(R, 0.0)
                mutual = R.sum(axis=1) / nk**2
            else:
                mutual = np.zeros(1, dtype=complex)
            y = P**s
            x = Pn**s
            z = Pp**s
            plus = s * (x[None, :] / (x[None, :] - y[:, None])).sum(axis=1) / (nk * nn)
            minus = -s * (y[:, None] / (y[:, None] - z[None, :])).sum(axis=1) / (nk * npv)
        except FloatingPointError as exc:
            raise DegenerateConfigurationError(f"vanishing force denominator on level {kc}") from exc
    return mutual, plus, minus


def mutual_force(config: Configuration, k: int, i: int) -> complex:
    """Force on ``p[k, i]`` from the other points of its own level."""
    mutual, _, _ = _level_terms(config, k)
    return complex(mutual[_checked(config, k, i)])


def force_plus(config: Configuration, k: int, i: int) -> complex:
    """``F+[k, i]``: the force exerted on ``p[k, i]`` by level ``k + 1``."""
    _, plus, _ = _level_terms(config, k)
    return complex(plus[_checked(config, k, i)])


def force_minus(config: Configuration, k: int, i: int) -> complex:
    """``F-[k, i]``: the force exerted on ``p[k, i]`` by level ``k - 1``."""
    _, _, minus = _level_terms(config, k)
    return complex(minus[_checked(config, k, i)])


def force(config: Configuration, k: int, i: int) -> complex:
    """Total force ``F[k, i]`` (mutual + plus + minus)."""
    mutual, plus, minus = _level_terms(config, k)
    j = _checked(config, k, i)
    return complex(mutual[j] + plus[j] + minus[j])


def _checked(config, k, i):
    kc, _ = canonical_level(config, k)
    n = config.counts[kc - 1]
    if not 1 <= i <= n:
        raise IndexError(f"point index {i} out of range 1..{n} on level {kc}")
    return i - 1


def force_vector(config: Configuration) -> np.ndarray:
    """All forces as a flat vector in the order of :meth:`Configuration.flat`."""
    return np.concatenate([sum(_level_terms(config, k)) for k in range(1, config.N + 1)])


def force_report(config: Configuration) -> ForceReport:
    mutual, plus, minus, forces = [], [], [], []
    for k in range(1, config.N + 1):
        mu, pl, mi = _level_terms(config, k)
        mutual.append(mu)
        plus.append(pl)
        minus.append(mi)
        forces.append(mu + pl + mi)
    flat = np.concatenate(forces)
    return ForceReport(
        forces=tuple(_frozen(f) for f in forces),
        plus_parts=tuple(_frozen(f) for f in plus),
        minus_parts=tuple(_frozen(f) for f in minus),
        mutual_parts=tuple(_frozen(f) for f in mutual),
        total=complex(flat.sum()),
        residual_norm=float(np.max(np.abs(flat))),
    )


def genus(config: Configuration) -> int:
    """Genus of the quotient surface, ``1 + sum(n_k - 1)``."""
    return 1 + sum(n - 1 for n in config.counts)


def scale(config: Configuration, lam: complex) -> Configuration:
    """Multiply every point by ``lam``; the forces are unchanged."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("scale factor must be nonzero")
    return Configuration([lvl * lam for lvl in config.levels], config.T,
                         config.separation_tol, config.name)


def relabel(config: Configuration, shift: int) -> Configuration:
    """Re-index levels so that new level ``k`` is old level ``k + shift``.

    ``shift`` must be even so the level parity is preserved.  With
    ``shift = N`` every level is replaced by its translate under the period.
    """
    if shift % 2:
        raise ValueError("only even shifts preserve the level parity")
    levels = [level_points(config, k + shift) for k in range(1, config.N + 1)]
    return Configuration(levels, config.T, config.separation_tol, config.name)


def from_points(levels: Sequence[Sequence[complex]], T: complex = 0j, **kw) -> Configuration:
    return Configuration(tuple(levels), T, **kw)
