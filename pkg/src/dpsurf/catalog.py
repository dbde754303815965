"""Example configurations: hypergeometric roots, alternating stacks, Wei(2,3), combinations."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt

import numpy as np
from numpy.polynomial import polynomial as P

from .config import Configuration, force_plus, force_report
from .errors import HypothesisError, RootFindingError

# C(n, k)**2 stays below 2**53 for n <= 29, so the float coefficients that the
# root finder sees are exact.
MAX_HYPERGEOM_DEGREE = 29


@dataclass(frozen=True)
class HypergeomPolynomial:
    """``p_n(z) = sum_k C(n, k)**2 z**k``.

    ``coefficients[k]`` multiplies ``z**k`` (ascending order).
    """

    n: int
    coefficients: tuple

    def __call__(self, z):
        return P.polyval(z, np.array(self.coefficients, dtype=float))


def hypergeom_poly(n: int) -> HypergeomPolynomial:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"degree must be a positive integer, got {n!r}")
    if n > MAX_HYPERGEOM_DEGREE:
        raise ValueError(
            f"degree {n} exceeds {MAX_HYPERGEOM_DEGREE}; coefficients would not be exact doubles")
    return HypergeomPolynomial(int(n), tuple(comb(n, k) ** 2 for k in range(n + 1)))


def poly_roots(coeffs, max_polish: int = 50) -> np.ndarray:
    """All roots of a polynomial given in ascending coefficient order.

    Companion-matrix eigenvalues followed by Newton polishing of each root.

    Raises
    ------
    RootFindingError
        If a polished root misses ``|p(z)| <= 1e-12 * ||c|| * max(1, |z|)**n``.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or len(c) < 2:
        raise ValueError("need at least a linear polynomial")
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    n = len(c) - 1
    dc = P.polyder(c)
    cnorm = np.linalg.norm(c)
    roots = P.polyroots(c).astype(complex)
    out = np.empty_like(roots)
    for j, z in enumerate(roots):
        for _ in range(max_polish):
            d = P.polyval(z, dc)
            if d == 0:
                break
            step = P.polyval(z, c) / d
            z = z - step
            if abs(step) <= 4 * np.finfo(float).eps * abs(z):
                break
        if abs(P.polyval(z, c)) > 1e-12 * cnorm * max(1.0, abs(z)) ** n:
            raise RootFindingError(f"root {z!r} failed the polish residual bound")
        out[j] = z
    if np.isrealobj(coeffs) or np.all(np.imag(c) == 0):
        # Conjugate-symmetric input: drop the spurious imaginary noise of real roots.
        scale = np.maximum(1.0, np.abs(out))
        out = np.where(np.abs(out.imag) <= 1e-14 * scale, out.real + 0j, out)
    return out


def ode_residual(n: int, z) -> complex:
    """``z(1-z) p'' + (1 + (2n-1) z) p' - n**2 p`` for ``p = p_n``."""
    c = np.array(hypergeom_poly(n).coefficients, dtype=float)
    d1 = P.polyder(c)
    d2 = P.polyder(c, 2)
    return (z * (1 - z) * P.polyval(z, d2) + (1 + (2 * n - 1) * z) * P.polyval(z, d1)
            - n * n * P.polyval(z, c))


def ode_scale(n: int, z) -> float:
    """Magnitude scale for :func:`ode_residual` at ``z``: sum of the term sizes."""
    c = np.abs(np.array(hypergeom_poly(n).coefficients, dtype=float))
    a = abs(z)
    return float(a * (1 + a) * P.polyval(a, P.polyder(c, 2))
                 + (1 + (2 * n - 1) * a) * P.polyval(a, P.polyder(c)) + n * n * P.polyval(a, c))


def reciprocal_order(roots) -> np.ndarray:
    """Order roots as ``a_1..a_h, 1/a_1..1/a_h`` and ``-1`` last for odd counts.

    ``a_1..a_h`` are the ``h`` smallest roots by modulus; the ``k``-th largest is
    paired with the ``k``-th smallest.
    """
    r = np.asarray(roots, dtype=complex)
    n = len(r)
    rest = r
    minus_one = None
    if n % 2:
        j = int(np.argmin(np.abs(r + 1)))
        minus_one = r[j]
        rest = np.delete(r, j)
    rest = rest[np.argsort(np.abs(rest), kind="stable")]
    h = len(rest) // 2
    small = rest[:h]
    large = rest[h:][::-1]
    out = np.concatenate([small, large])
    if minus_one is not None:
        out = np.append(out, minus_one)
    return out


def build_handles(n: int) -> Configuration:
    """``N = 2``, counts ``(1, n)``: ``p[1,1] = 1`` and level 2 holds the roots of ``p_n``."""
    roots = poly_roots(hypergeom_poly(n).coefficients)
    return Configuration(([1.0], reciprocal_order(roots)), 0j, name=f"handles({n})")


def build_alternating(N: int) -> Configuration:
    """``N`` levels with one point each, ``p[k, 1] = (-1)**(k+1)``."""
    if N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N}")
    return Configuration([[(-1.0) ** (k + 1)] for k in range(1, N + 1)], 0j,
                         name=f"alternating({N})")


def wei23_radicals() -> tuple:
    s5 = sqrt(5.0)
    a1 = 4 + 2 * s5 + sqrt(35 + 16 * s5)
    a2 = 0.5 * (-17 - 9 * s5 - sqrt(690 + 306 * s5))
    return a1, a2


def build_wei23() -> Configuration:
    a1, a2 = wei23_radicals()
    return Configuration(([a1, 1 / a1], [a2, -1.0, 1 / a2]), 0j, name="wei23")


def combine(c1: Configuration, c2: Configuration, check_tol: float = 1e-9,
            verify: bool = True) -> Configuration:
    """Stack ``c2`` on top of ``c1``.

    Levels ``1..N`` are copied from ``c1`` and levels ``N+1..N+N'`` are the
    points of ``c2`` times ``exp(T)``; the new period is ``T + T'``.

    Raises
    ------
    HypothesisError
        If a precondition fails, or if ``verify`` is set and the output
        residual exceeds the bound implied by the inputs.
    """
    if c1.counts[0] != 1 or c2.counts[0] != 1:
        raise HypothesisError("first level of both configurations must hold a single point")
    for name, c in (("first", c1), ("second", c2)):
        if abs(c.levels[0][0] - 1) > check_tol:
            raise HypothesisError(f"{name} configuration is not normalised to p[1,1] = 1")
    f1 = force_plus(c1, 1, 1)
    f2 = force_plus(c2, 1, 1)
    if abs(f1 - f2) > check_tol:
        raise HypothesisError(f"F+[1,1] differ: {f1!r} vs {f2!r}")
    if abs(f1) <= check_tol:
        raise HypothesisError("F+[1,1] vanishes")
    shift = np.exp(c1.T)
    levels = list(c1.levels) + [lvl * shift for lvl in c2.levels]
    name = None
    if c1.name and c2.name:
        name = f"combine({c1.name}, {c2.name})"
    out = Configuration(levels, c1.T + c2.T, c1.separation_tol, name)
    if verify:
        # Only the two seam levels see different neighbours; their forces
        # change by at most the mismatch of the plus parts.
        r1 = force_report(c1).residual_norm
        r2 = force_report(c2).residual_norm
        bound = r1 + r2 + abs(f1 - f2) + 1e-12
        r = force_report(out).residual_norm
        if r > bound:
            raise HypothesisError(
                f"combined residual {r:.3e} exceeds input bound {bound:.3e}")
    return out


def build_stacked(N: int, n: int) -> Configuration:
    """Alternating ``N``-stack combined with ``handles(n)``."""
    return combine(build_alternating(N), build_handles(n))


def build_double_handles(n: int, m: int) -> Configuration:
    """``combine(handles(n), handles(m))``: counts ``(1, n, 1, m)``."""
    return combine(build_handles(n), build_handles(m))


CATALOG = {
    "handles": (build_handles, 1),
    "alternating": (build_alternating, 1),
    "wei23": (build_wei23, 0),
    "stacked": (build_stacked, 2),
    "double-handles": (build_double_handles, 2),
}


def from_catalog(name: str, *args: int) -> Configuration:
    """Look up a builder by name, e.g. ``from_catalog("handles", 8)``."""
    try:
        builder, nargs = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {sorted(CATALOG)}") from None
    if len(args) != nargs:
        raise ValueError(f"{name} takes {nargs} integer argument(s), got {len(args)}")
    return builder(*args)


def default_catalog() -> list:
    """Representative instances used by the limit verification and tests."""
    return ([build_handles(n) for n in range(1, 11)]
            + [build_alternating(N) for N in (2, 4, 6, 8)]
            + [build_wei23(), build_double_handles(2, 3), build_double_handles(3, 3),
               build_stacked(2, 2), build_stacked(4, 3)])
