"""Weierstrass data at ``r = 0`` and the limits of the period map.

For each level ``k`` the data consist of weights ``alpha``, ``beta``, ``gamma``,
a scale ``delta`` and poles ``a`` (``n_k`` of them) and ``b`` (``n_{k-1}``).
The Gauss map component and the height differential coefficient are

    G_k(z) = delta_k z (sum alpha/(z - a) - sum beta/(z - b))
    eta_k(z) = sum gamma_k/(z - a) - sum gamma_{k-1}/(z - b).

Residues of ``G_k eta_k`` at the poles are available in closed form and through
a trapezoid-rule contour oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .config import Configuration, force_vector, level_points
from .errors import (ContourError, DegreeDropError, MultipleZeroError,
                     PoleEvaluationError)

TWO_PI_I = 2j * np.pi


def _conjk(z, k):
    return np.conj(z) if k % 2 else z


def _ro(arr):
    arr = np.array(arr, dtype=complex).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ParameterVector:
    """Weierstrass parameters ``X`` plus the gluing parameter ``t``.

    All per-level fields are tuples indexed by ``k - 1``.  ``b[k-1]`` has as
    many entries as level ``k - 1`` (cyclically), matching ``beta[k-1]``.
    """

    alphas: tuple
    betas: tuple
    gammas: tuple
    deltas: tuple
    a: tuple
    b: tuple
    t: float = 0.0
    sum_tol: float = 1e-12

    def __post_init__(self):
        for name in ("alphas", "betas", "gammas", "a", "b"):
            object.__setattr__(self, name, tuple(_ro(v) for v in getattr(self, name)))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        N = len(self.a)
        if N < 2 or N % 2:
            raise ValueError("number of levels must be even and positive")
        for name in ("alphas", "betas", "gammas", "deltas", "b"):
            if len(getattr(self, name)) != N:
                raise ValueError(f"{name} must have one entry per level")
        for k in range(N):
            n, nprev = len(self.a[k]), len(self.a[k - 1])
            if len(self.alphas[k]) != n or len(self.gammas[k]) != n:
                raise ValueError(f"level {k + 1}: alpha/gamma length must equal the number of a-poles")
            if len(self.b[k]) != nprev or len(self.betas[k]) != nprev:
                raise ValueError(f"level {k + 1}: b/beta length must equal the size of level {k}")
            for name in ("alphas", "betas", "gammas"):
                v = getattr(self, name)[k]
                if np.any(np.abs(v.imag) > 0):
                    raise ValueError(f"{name} must be real")
                if abs(v.sum() - 1) > self.sum_tol:
                    raise ValueError(f"level {k + 1}: {name} must sum to 1")
            if not self.deltas[k] > 0:
                raise ValueError("delta must be positive")
            poles = np.concatenate([self.a[k], self.b[k]])
            if np.any(poles == 0):
                raise ValueError(f"level {k + 1}: poles must be nonzero")
            d = np.abs(poles[:, None] - poles[None, :])
            np.fill_diagonal(d, np.inf)
            if np.any(d == 0):
                raise ValueError(f"level {k + 1}: poles must be distinct")
        if self.t < 0:
            raise ValueError("t must be nonnegative")

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def r(self) -> float:
        return 0.0 if self.t == 0 else float(np.exp(-1.0 / self.t**2))

    def level(self, k: int) -> int:
        """Zero-based storage index of level ``k`` (any integer)."""
        return (k - 1) % self.N

    def gamma_prev(self, k: int) -> np.ndarray:
        return self.gammas[self.level(k - 1)]

    def with_t(self, t: float) -> "ParameterVector":
        return ParameterVector(self.alphas, self.betas, self.gammas, self.deltas,
                               self.a, self.b, t, self.sum_tol)


def x_from_config(config: Configuration, t: float = 0.0) -> ParameterVector:
    """Parameters whose limit period map vanishes exactly when ``config`` is balanced."""
    N = config.N
    al, be, ga, de, a, b = [], [], [], [], [], []
    for k in range(1, N + 1):
        s = 1 if k % 2 == 0 else -1
        n = config.counts[k - 1]
        nprev = len(level_points(config, k - 1))
        a.append(_conjk(level_points(config, k), k) ** s)
        b.append(_conjk(level_points(config, k - 1), k) ** s)
        al.append(np.full(n, 1.0 / n))
        ga.append(np.full(n, 1.0 / n))
        be.append(np.full(nprev, 1.0 / nprev))
        de.append(1.0)
    return ParameterVector(tuple(al), tuple(be), tuple(ga), tuple(de), tuple(a), tuple(b), t)


def _check_off_poles(X, k, z, rtol=1e-14):
    j = X.level(k)
    poles = np.concatenate([X.a[j], X.b[j]])
    z = np.asarray(z, dtype=complex)
    d = np.min(np.abs(z[..., None] - poles), axis=-1)
    if np.any(d <= rtol * np.maximum(1.0, np.abs(z))):
        raise PoleEvaluationError(f"evaluation at a pole of level {k}")
    return z


def h_component(X: ParameterVector, k: int, z):
    """``sum alpha/(z - a) - sum beta/(z - b)``, i.e. ``G_k / (delta_k z)``."""
    j = X.level(k)
    z = _check_off_poles(X, k, z)
    zz = z[..., None]
    return (np.sum(X.alphas[j] / (zz - X.a[j]), axis=-1)
            - np.sum(X.betas[j] / (zz - X.b[j]), axis=-1))


def gauss_component(X: ParameterVector, k: int, z):
    """``G_k(z)``; vectorised over ``z``."""
    z = np.asarray(z, dtype=complex)
    return X.deltas[X.level(k)] * z * h_component(X, k, z)


def eta_component(X: ParameterVector, k: int, z):
    """Coefficient of ``dz`` in ``eta_k`` at ``r = 0``; vectorised over ``z``."""
    j = X.level(k)
    z = _check_off_poles(X, k, z)
    zz = z[..., None]
    return (np.sum(X.gammas[j] / (zz - X.a[j]), axis=-1)
            - np.sum(X.gamma_prev(k) / (zz - X.b[j]), axis=-1))


def _numerator(X, k):
    """Numerator polynomial of ``h_k`` after clearing denominators (ascending)."""
    j = X.level(k)
    poles = np.concatenate([X.a[j], X.b[j]])
    w = np.concatenate([X.alphas[j], -X.betas[j]])
    num = np.zeros(len(poles), dtype=complex)
    for i in range(len(poles)):
        others = np.delete(poles, i)
        num = num + w[i] * P.polyfromroots(others)
    return num


def gk_zeros(X: ParameterVector, k: int, drop_tol: float = 1e-10,
             merge_tol: float = 1e-8) -> np.ndarray:
    """Finite nonzero zeros of ``G_k``, ``n_k + n_{k-1} - 2`` of them.

    Raises
    ------
    DegreeDropError
        If the expected leading coefficient cancels as well.
    MultipleZeroError
        If two zeros agree to ``merge_tol`` relative.
    """
    j = X.level(k)
    num = _numerator(X, k)
    deg = len(X.a[j]) + len(X.b[j]) - 2
    # The z**(deg+1) coefficient is sum(alpha) - sum(beta) = 0.
    c = num[:deg + 1]
    scale = np.linalg.norm(num)
    if deg == 0:
        if abs(c[0]) <= drop_tol * scale:
            raise DegreeDropError(f"level {k}: numerator vanishes identically")
        return np.zeros(0, dtype=complex)
    if abs(c[deg]) <= drop_tol * scale:
        raise DegreeDropError(f"level {k}: zero count drops below {deg}")
    roots = P.polyroots(c).astype(complex)
    out = []
    for z in roots:
        for _ in range(30):
            hz = h_component(X, k, z)
            dh = (-np.sum(X.alphas[j] / (z - X.a[j])**2) + np.sum(X.betas[j] / (z - X.b[j])**2))
            if dh == 0:
                break
            step = hz / dh
            z = z - step
            if abs(step) <= 4e-16 * max(1.0, abs(z)):
                break
        out.append(complex(z))
    out = np.array(out)
    out = out[np.abs(out) > drop_tol * max(1.0, np.max(np.abs(out)))]
    if len(out) > 1:
        d = np.abs(out[:, None] - out[None, :])
        np.fill_diagonal(d, np.inf)
        sc = np.maximum(1.0, np.maximum(np.abs(out)[:, None], np.abs(out)[None, :]))
        if np.any(d <= merge_tol * sc):
            raise MultipleZeroError(f"level {k}: two zeros of G_k coincide")
    return out


def residue_a(X: ParameterVector, k: int, i: int) -> complex:
    """Closed-form residue of ``G_k eta_k`` at ``a[k, i]`` (``i`` is 1-based)."""
    j = X.level(k)
    a, b = X.a[j], X.b[j]
    al, be, ga, gp = X.alphas[j], X.betas[j], X.gammas[j], X.gamma_prev(k)
    d = X.deltas[j]
    ii = i - 1
    c = a[ii]
    o = np.arange(len(a)) != ii
    f0 = d * al[ii] + d * c * (np.sum(al[o] / (c - a[o])) - np.sum(be / (c - b)))
    g0 = np.sum(ga[o] / (c - a[o])) - np.sum(gp / (c - b))
    return complex(d * c * al[ii] * g0 + ga[ii] * f0)


def residue_b(X: ParameterVector, k: int, i: int) -> complex:
    """Closed-form residue of ``G_k eta_k`` at ``b[k, i]`` (``i`` is 1-based)."""
    j = X.level(k)
    a, b = X.a[j], X.b[j]
    al, be, ga, gp = X.alphas[j], X.betas[j], X.gammas[j], X.gamma_prev(k)
    d = X.deltas[j]
    ii = i - 1
    c = b[ii]
    o = np.arange(len(b)) != ii
    f0 = -d * be[ii] + d * c * (np.sum(al / (c - a)) - np.sum(be[o] / (c - b[o])))
    g0 = np.sum(ga / (c - a)) - np.sum(gp[o] / (c - b[o]))
    return complex(-d * c * be[ii] * g0 - gp[ii] * f0)


def _special_points(X, k):
    j = X.level(k)
    pts = [X.a[j], X.b[j], [0.0]]
    try:
        pts.append(gk_zeros(X, k))
    except (DegreeDropError, MultipleZeroError):
        pass
    return np.concatenate(pts).astype(complex)


def _contour_radius(X, k, c, radius):
    if radius is not None:
        return radius
    pts = _special_points(X, k)
    d = np.abs(pts - c)
    d = d[d > 0]
    rho = 0.25 * d.min()
    if rho < 1e-10:
        raise ContourError(f"contour radius {rho:.3e} collapsed on level {k}")
    return rho


def _circle_mean(f, c, rho, nodes):
    theta = 2 * np.pi * np.arange(nodes) / nodes
    z = c + rho * np.exp(1j * theta)
    return complex(np.mean(f(z) * (z - c)))


def residue_oracle(X: ParameterVector, k: int, i: int, side: str = "a",
                   nodes: int = 512, radius: float | None = None) -> complex:
    """``(1/2 pi i) \\oint G_k eta_k dz`` on a small circle around a pole.

    The default radius is a quarter of the distance from the pole to the
    nearest other pole, zero of ``G_k`` or the origin.
    """
    j = X.level(k)
    if side == "a":
        c = X.a[j][i - 1]
    elif side == "b":
        c = X.b[j][i - 1]
    else:
        raise ValueError("side must be 'a' or 'b'")
    rho = _contour_radius(X, k, c, radius)
    return _circle_mean(lambda z: gauss_component(X, k, z) * eta_component(X, k, z),
                        c, rho, nodes)


def origin_residue(X: ParameterVector, k: int) -> complex:
    """Closed-form residue of ``eta_k / G_k`` at 0: ``eta_k(0) / (delta_k h_k(0))``."""
    return complex(eta_component(X, k, 0.0) / (X.deltas[X.level(k)] * h_component(X, k, 0.0)))


def origin_residue_oracle(X: ParameterVector, k: int, nodes: int = 512,
                          radius: float | None = None) -> complex:
    rho = _contour_radius(X, k, 0.0, radius)
    return _circle_mean(lambda z: eta_component(X, k, z) / gauss_component(X, k, z),
                        0.0, rho, nodes)


def residue_sum(X: ParameterVector, k: int) -> complex:
    """Sum of the closed-form residues of ``G_k eta_k`` over all poles of level ``k``."""
    j = X.level(k)
    return (sum(residue_a(X, k, i) for i in range(1, len(X.a[j]) + 1))
            + sum(residue_b(X, k, i) for i in range(1, len(X.b[j]) + 1)))


def _mod_2pi_i(v):
    v = np.asarray(v, dtype=complex)
    return v - 2j * np.pi * np.round(v.imag / (2 * np.pi))


def f4_values(X: ParameterVector, oracle: bool = False) -> list:
    """Limit of the A-period component paired with the forces, per level."""
    res = (lambda k, i, side: residue_oracle(X, k, i, side)) if oracle else (
        lambda k, i, side: residue_a(X, k, i) if side == "a" else residue_b(X, k, i))
    out = []
    for k in range(1, X.N + 1):
        n = len(X.a[X.level(k)])
        vals = [_conjk(-TWO_PI_I * res(k + 1, i, "b"), k + 1) - _conjk(TWO_PI_I * res(k, i, "a"), k)
                for i in range(1, n + 1)]
        out.append(np.array(vals))
    return out


def f3_values(X: ParameterVector) -> list:
    out = []
    for k in range(1, X.N + 1):
        j, jn = X.level(k), X.level(k + 1)
        sk = (-1) ** k
        a, bn = X.a[j], X.b[jn]
        v = (sk * _conjk(np.log(a / a[0]) / X.deltas[j], k)
             + sk * _conjk(np.log(bn / bn[0]) / X.deltas[jn], k + 1))
        out.append(_mod_2pi_i(v))
    return out


@dataclass(frozen=True)
class LimitVerification:
    """The five limit components of the period map with oracle cross-checks.

    ``f1..f4`` are lists with one array per level; ``f5`` has one entry per
    level and its target is ``2 pi i``.
    """

    f1: tuple
    f2: tuple
    f3: tuple
    f4: tuple
    f5: np.ndarray
    oracle_f4: tuple
    oracle_f5: np.ndarray
    component_max: dict
    oracle_deviation: float
    f5_exact: bool
    tol: float
    oracle_tol: float
    passed: bool = field(default=False)

    @property
    def max_deviation(self) -> float:
        return max(self.component_max.values())


def _max_abs(arrs):
    arrs = [np.atleast_1d(a) for a in arrs]
    return max((float(np.max(np.abs(a))) for a in arrs if a.size), default=0.0)


def evaluate_limit(X: ParameterVector, tol: float = 1e-8, oracle_tol: float = 1e-10,
                   with_oracle: bool = True) -> LimitVerification:
    N = X.N
    f1 = tuple(eta_component(X, k, gk_zeros(X, k)) for k in range(1, N + 1))
    f2 = tuple(X.gammas[X.level(k)] - X.gammas[X.level(k)][0] for k in range(1, N + 1))
    f3 = tuple(f3_values(X))
    f4 = tuple(f4_values(X))
    f5 = np.array([TWO_PI_I / X.deltas[X.level(k)] for k in range(1, N + 1)])
    f5_exact = bool(np.all(f5 == TWO_PI_I))
    if with_oracle:
        of4 = tuple(f4_values(X, oracle=True))
        of5 = np.array([TWO_PI_I * origin_residue_oracle(X, k) for k in range(1, N + 1)])
        dev = 0.0
        for k in range(1, N + 1):
            j = X.level(k)
            for i in range(1, len(X.a[j]) + 1):
                dev = max(dev, abs(residue_a(X, k, i) - residue_oracle(X, k, i, "a")))
            for i in range(1, len(X.b[j]) + 1):
                dev = max(dev, abs(residue_b(X, k, i) - residue_oracle(X, k, i, "b")))
            dev = max(dev, abs(origin_residue(X, k) - of5[k - 1] / TWO_PI_I))
    else:
        of4, of5, dev = (), np.zeros(0), 0.0
    comp = {
        "F1": _max_abs(f1),
        "F2": _max_abs(f2),
        "F3": _max_abs(f3),
        "F4": _max_abs(f4),
        "F5": float(np.max(np.abs(f5 - TWO_PI_I))),
    }
    passed = all(v <= tol for v in comp.values()) and dev <= oracle_tol
    return LimitVerification(f1, f2, f3, f4, f5, of4, of5, comp, dev, f5_exact,
                             tol, oracle_tol, passed)


def limit_F(config: Configuration, **kw) -> LimitVerification:
    """Limit period map at the parameters built from ``config``."""
    return evaluate_limit(x_from_config(config), **kw)


def force_identity_residual(config: Configuration) -> dict:
    """Compare the A-period limit with the forces.

    Returns the largest deviation from ``-4 pi i F`` (which holds for every
    configuration) and from ``-4 pi i (-1)**k F``, a variant with an extra
    level-parity sign.
    """
    X = x_from_config(config)
    f4 = np.concatenate(f4_values(X))
    F = force_vector(config)
    parity = np.concatenate([np.full(n, (-1.0) ** k) for k, n in enumerate(config.counts, start=1)])
    return {
        "plain": float(np.max(np.abs(f4 + 4j * np.pi * F))),
        "parity": float(np.max(np.abs(f4 + 4j * np.pi * parity * F))),
        "scale": float(max(1.0, 4 * np.pi * np.max(np.abs(F)))),
    }
