"""Approximate near-limit meshes: level sheets joined by catenoidal necks.

Each level ``k`` is meshed in the strip coordinate ``w = log z`` with ``theta``
unrolled over one turn, so a single level patch is a fundamental domain for
the horizontal period.  Small disks around the poles, where ``|1/G_k| < r**sigma``,
are cut out.  Vertex positions are the real Weierstrass integrals, taken along
a spanning tree of the patch edges from a base point near ``a[k, 1]``.

Necks are exact catenoids.  Their end rings reuse the hole-ring vertices of
the two adjacent levels, and the rows next to each end are blended onto those
rings, so the assembled mesh is watertight.  How far the blend had to move the
catenoid ends is reported as the stitching mismatch.

Physical coordinates are used throughout.  The horizontal period is
``(0, pi/sqrt(r), 0)``, which rescaled by ``2 sqrt(r)`` is ``(0, 2 pi, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.spatial import Delaunay, cKDTree

from .config import Configuration, force_report, level_points
from .errors import AssemblyError, GridError, UnbalancedConfigurationError
from .quadrature import segment_integrals
from .weierstrass import ParameterVector, eta_component, gauss_component, x_from_config


@dataclass(frozen=True)
class MeshParams:
    """Resolution and gluing parameters.

    Parameters
    ----------
    t : float
        Gluing parameter in ``(0, 0.5]``; ``r = exp(-1/t**2)``.
    sigma : float
        Neck cutoff exponent in ``(0, 1/2)``.
    level_grid : (int, int)
        Radial and angular grid counts of each level strip.
    neck_grid : (int, int)
        Rows along the neck axis and points around each neck.
    copies : int
        Fundamental domains per lattice direction in the assembled mesh.
    margin : float
        How far (in ``log|z|``) each level extends beyond its outermost pole.
    quad_rtol : float
        Relative tolerance of the edge quadrature.
    mismatch_ceiling : float
        Largest allowed stitching mismatch, as a fraction of the neck height
        ``(1 - 2 sigma) |log r| / n_k``.
    balance_tol : float
        Largest force residual accepted as balanced.
    """

    t: float = 0.25
    sigma: float = 0.3
    level_grid: tuple = (64, 128)
    neck_grid: tuple = (32, 64)
    copies: int = 1
    margin: float = 2.0
    quad_rtol: float = 1e-13
    mismatch_ceiling: float = 0.5
    balance_tol: float = 1e-8

    def __post_init__(self):
        if not 0 < self.t <= 0.5:
            raise ValueError(f"t must lie in (0, 0.5], got {self.t}")
        if not 0 < self.sigma < 0.5:
            raise ValueError(f"sigma must lie in (0, 1/2), got {self.sigma}")
        for name in ("level_grid", "neck_grid"):
            g = tuple(int(x) for x in getattr(self, name))
            if len(g) != 2 or min(g) < 8:
                raise ValueError(f"{name} needs two counts, each at least 8")
            object.__setattr__(self, name, g)
        if int(self.copies) < 1:
            raise ValueError("copies must be at least 1")
        if self.margin <= 0:
            raise ValueError("margin must be positive")

    @property
    def log_r(self) -> float:
        return -1.0 / self.t**2

    @property
    def r(self) -> float:
        return float(np.exp(self.log_r))

    @property
    def sqrt_r(self) -> float:
        return float(np.exp(0.5 * self.log_r))

    @property
    def r_sigma(self) -> float:
        return float(np.exp(self.sigma * self.log_r))

    @property
    def horizontal_period(self) -> np.ndarray:
        return np.array([0.0, np.pi / self.sqrt_r, 0.0])


@dataclass
class MeshFragment:
    """A level or neck patch.

    ``face_shifts[f, c]`` counts horizontal periods to add to corner ``c`` of
    face ``f`` (non-zero only across the seam of a level strip).  ``rings``
    maps ``("a", i)`` / ``("b", i)`` to the vertex ids of a hole ring, ordered
    by the neck angle.
    """

    kind: str
    index: tuple
    vertices: np.ndarray
    faces: np.ndarray
    face_shifts: np.ndarray
    rings: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)


# -- level patches -----------------------------------------------------------

def _gauss_prime(X, k, z):
    j = X.level(k)
    h = (np.sum(X.alphas[j] / (z[..., None] - X.a[j]), axis=-1)
         - np.sum(X.betas[j] / (z[..., None] - X.b[j]), axis=-1))
    dh = (-np.sum(X.alphas[j] / (z[..., None] - X.a[j])**2, axis=-1)
          + np.sum(X.betas[j] / (z[..., None] - X.b[j])**2, axis=-1))
    return X.deltas[j] * (h + z * dh)


def _solve_v(X, k, c, R, v, iters=60):
    """Points near pole ``c`` where ``1/G_k = v`` (vectorised over ``v``)."""
    v = np.asarray(v, dtype=complex)
    z = c + R * v
    for _ in range(iters):
        G = gauss_component(X, k, z)
        f = 1.0 / G - v
        step = f / (-_gauss_prime(X, k, z) / G**2)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * np.abs(z)):
            break
    G = gauss_component(X, k, z)
    if not np.all(np.abs(1.0 / G - v) <= 1e-10 * np.abs(v)):
        raise GridError(f"level {k}: hole ring around {c!r} did not converge")
    if np.max(np.abs(z - c)) > 0.5 * abs(c):
        raise GridError(f"level {k}: hole ring around {c!r} left the pole neighbourhood")
    return z


def _leading_horiz(k, w, sqrt_r):
    """Leading-order horizontal position at strip coordinate ``w``."""
    w = np.asarray(w, dtype=complex)
    return np.conj(w) / (2 * sqrt_r) if k % 2 == 0 else -w / (2 * sqrt_r)


# How far (in log|z|) the end heights are integrated beyond the grid.
_END_REACH = 60.0


def _strip_angle(theta, theta0):
    return theta0 + np.mod(theta - theta0, 2 * np.pi)


def _periodic_dist(w1, w2):
    d = w1 - w2
    return np.abs(d.real + 1j * (np.mod(d.imag + np.pi, 2 * np.pi) - np.pi))


def _integrand(X, k, sqrt_r):
    even = k % 2 == 0

    def f(w):
        z = np.exp(w)
        G = gauss_component(X, k, z)
        e = eta_component(X, k, z)
        small = sqrt_r * G * e
        large = e / (sqrt_r * G)
        A, B = (large, small) if even else (small, large)
        return np.stack([A * z, B * z, e * z])

    return f


def _height_integrand(X, k):
    """``z eta_k(z)`` in ``w = log z``, free of cancellation at both ends.

    The residues of ``eta_k`` sum to zero, so for large ``|z|`` the direct sum
    cancels; there ``z eta = sum gamma a/(z - a) - sum gamma' b/(z - b)``.
    """
    j = X.level(k)
    a, b, ga, gp = X.a[j], X.b[j], X.gammas[j], X.gamma_prev(k)

    def f(w):
        z = np.exp(w)
        zz = z[..., None]
        far = np.sum(ga * a / (zz - a), axis=-1) - np.sum(gp * b / (zz - b), axis=-1)
        near = z * (np.sum(ga / (zz - a), axis=-1) - np.sum(gp / (zz - b), axis=-1))
        return np.where(np.abs(z) > 1, far, near)[None]

    return f


def _to_position(I, horiz0, height0):
    horiz = horiz0 + 0.5 * (np.conj(I[0]) - I[1])
    height = height0 + I[2].real
    return horiz, height


def level_patch(config: Configuration, X: ParameterVector, k: int, params: MeshParams,
                height: float = 0.0) -> MeshFragment:
    """Mesh of level ``k`` with the neck disks removed.

    The base point ``z_k`` solves ``1/G_k(z_k) = eps`` next to ``a[k, 1]``,
    with ``eps`` half the smallest pole separation of the level.  It is
    placed at its leading-order horizontal position.  The vertical offset
    puts the end at infinity at ``height``.
    """
    j = X.level(k)
    a, b = X.a[j], X.b[j]
    delta = X.deltas[j]
    poles = np.concatenate([a, b])
    sides = [("a", i + 1) for i in range(len(a))] + [("b", i + 1) for i in range(len(b))]
    residues = np.concatenate([delta * a * X.alphas[j], -delta * b * X.betas[j]])
    sr, rs = params.sqrt_r, params.r_sigma
    nr, nth = params.level_grid
    nphi = params.neck_grid[1]
    phi = 2 * np.pi * np.arange(nphi) / nphi

    # Put the seam in the widest angular gap between poles.
    ang = np.sort(np.mod(np.angle(poles), 2 * np.pi))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    g = int(np.argmax(gaps))
    theta0 = ang[g] + 0.5 * gaps[g] - 2 * np.pi
    wc = np.log(np.abs(poles)) + 1j * _strip_angle(np.angle(poles), theta0)

    rings0 = []
    for c, R, (side, _), w0 in zip(poles, residues, sides, wc):
        v = rs * np.exp(1j * phi if side == "a" else -1j * phi)
        z = _solve_v(X, k, c, R, v)
        rings0.append(w0 + np.log(z / c))
    rho0 = np.array([np.max(np.abs(rw - w0)) for rw, w0 in zip(rings0, wc)])

    P = len(poles)
    near = np.full(P, np.inf)
    for p in range(P):
        for q in range(P):
            if p != q:
                d = _periodic_dist(wc[p], wc[q])
                near[p] = min(near[p], d)
                if d <= 1.05 * (rho0[p] + rho0[q]):
                    raise GridError(f"level {k}: neck disks overlap; decrease t or sigma")

    rho_lo = np.min(np.log(np.abs(poles))) - params.margin
    rho_hi = np.max(np.log(np.abs(poles))) + params.margin
    rr = np.linspace(rho_lo, rho_hi, nr)
    tt = theta0 + 2 * np.pi * np.arange(nth) / nth
    hgrid = min(rr[1] - rr[0], tt[1] - tt[0])
    grid = (rr[:, None] + 1j * tt[None, :]).ravel()

    growth = np.exp(2 * np.pi / nphi)
    ring_pts, ring0_ids, keep_out = [], [], []
    count = len(grid)
    for p in range(P):
        limit = min(1.5 * hgrid, 0.4 * near[p])
        layers = [rings0[p]]
        s = growth
        while rho0[p] * s <= limit:
            layers.append(wc[p] + s * (rings0[p] - wc[p]))
            s *= growth
        pts = np.concatenate(layers)
        ring0_ids.append(count + np.arange(nphi))
        count += len(pts)
        ring_pts.append(pts)
        keep_out.append(rho0[p] * s / growth + 0.6 * hgrid)
    mask = np.ones(len(grid), bool)
    for p in range(P):
        mask &= _periodic_dist(grid, wc[p]) > keep_out[p]
    ring_ids_shift = len(grid) - mask.sum()
    grid = grid[mask]
    ring0_ids = [ids - ring_ids_shift for ids in ring0_ids]
    W = np.concatenate([grid] + ring_pts)
    W = W.real + 1j * _strip_angle(W.imag, theta0)
    V = len(W)

    # Periodic Delaunay: triangulate three stacked copies and keep the middle.
    xy = np.column_stack([W.real, W.imag])
    rep = np.concatenate([xy, xy + [0, 2 * np.pi], xy - [0, 2 * np.pi]])
    tri = Delaunay(rep)
    if len(tri.coplanar):
        raise GridError(f"level {k}: degenerate triangulation")
    simp = tri.simplices
    cy = rep[simp, 1].mean(axis=1)
    simp = simp[(cy >= theta0) & (cy < theta0 + 2 * np.pi)]
    ids = simp % V
    shift = np.array([0, 1, -1])[simp // V]  # theta replica index
    hole_id = np.full(V, -1)
    for p in range(P):
        hole_id[ring0_ids[p]] = p
    inside = (hole_id[ids[:, 0]] >= 0) & (hole_id[ids[:, 0]] == hole_id[ids[:, 1]]) \
        & (hole_id[ids[:, 1]] == hole_id[ids[:, 2]])
    ids, shift = ids[~inside], shift[~inside]
    # Orient counter-clockwise in the strip coordinate.
    wf = W[ids] + 2j * np.pi * shift
    area = np.imag(np.conj(wf[:, 1] - wf[:, 0]) * (wf[:, 2] - wf[:, 0]))
    flip = area < 0
    ids[flip] = ids[flip][:, ::-1]
    shift[flip] = shift[flip][:, ::-1]

    # Unique edges with the relative theta shift of the second endpoint.
    e = np.concatenate([np.stack([ids[:, c], ids[:, (c + 1) % 3],
                                  shift[:, (c + 1) % 3] - shift[:, c]], axis=1) for c in range(3)])
    swap = e[:, 0] > e[:, 1]
    e[swap] = np.stack([e[swap, 1], e[swap, 0], -e[swap, 2]], axis=1)
    edges = np.unique(e, axis=0)
    plain = edges[edges[:, 2] == 0]
    seam = edges[edges[:, 2] != 0]

    # Base point and anchor vertex.
    sep = np.min([abs(poles[p] - poles[q]) for p in range(P) for q in range(P) if p != q]) \
        if P > 1 else abs(poles[0])
    eps = 0.5 * sep
    vs = np.geomspace(rs, eps, 40)
    z_base = _solve_v(X, k, poles[0], residues[0], vs[:1])[0]
    for v in vs[1:]:
        z_base = _newton_from(X, k, z_base, v)
    w_base = np.log(abs(z_base)) + 1j * _strip_angle(np.angle(z_base), theta0)
    order = np.argsort(_periodic_dist(W, w_base))
    anchor = int(order[0])
    d_anchor = W[anchor] - w_base
    d_anchor = d_anchor.real + 1j * (np.mod(d_anchor.imag + np.pi, 2 * np.pi) - np.pi)

    f = _integrand(X, k, sr)
    f_height = _height_integrand(X, k)
    rtol = params.quad_rtol
    I0 = segment_integrals(f, [w_base], [w_base + d_anchor], rtol=rtol)[:, 0]
    horiz_anchor, height_anchor = _to_position(I0[:, None], _leading_horiz(k, w_base, sr), height)
    # The anchor vertex sits d_anchor away in the strip; if that crossed the
    # seam its stored coordinate differs by a full turn.
    wrap = int(np.round((W[anchor] - (w_base + d_anchor)).imag / (2 * np.pi)))
    horiz_anchor = horiz_anchor - wrap * 1j * np.pi / sr

    A = coo_matrix((np.ones(len(plain)), (plain[:, 0], plain[:, 1])), shape=(V, V))
    A = (A + A.T).tocsr()
    ncomp, _ = connected_components(A, directed=False)
    if ncomp != 1:
        raise GridError(f"level {k}: strip mesh is disconnected")
    bfs, pred = breadth_first_order(A, anchor, directed=False, return_predecessors=True)
    child = bfs[1:]
    parent = pred[child]
    It = segment_integrals(f, W[parent], W[child], rtol=rtol)
    I = np.zeros((3, V), dtype=complex)
    I[:, anchor] = 0
    for c_, p_, col in zip(child, parent, range(len(child))):
        I[:, c_] = I[:, p_] + It[:, col]
    horiz, hgt = _to_position(I, 0.0, 0.0)
    horiz = horiz + horiz_anchor[0]
    hgt = hgt + height_anchor[0]
    Ph = 1j * np.pi / sr  # theta + 2 pi moves the position by -Ph

    # Heights of both ends, integrated out along the seam ray, which misses
    # every pole.  The level is shifted so that height(inf_k) = height.
    ends = {}
    for name, col in (("outer", W.real.max()), ("inner", W.real.min())):
        on_col = np.flatnonzero(np.abs(W.real - col) < 1e-12)
        v0 = on_col[np.argmin(np.abs(W[on_col].imag - theta0))]
        far = W[v0] + np.sign(col - W.real.mean()) * _END_REACH
        ends[name] = hgt[v0] + segment_integrals(f_height, [W[v0]], [far], rtol=rtol)[0, 0].real
    hgt = hgt + (height - ends["outer"])

    # Diagnostics: edges closing cycles through the seam and around holes.
    tree = set(zip(np.minimum(parent, child), np.maximum(parent, child)))
    nontree = np.array([ed for ed in plain if (ed[0], ed[1]) not in tree]).reshape(-1, 3)
    diag = {"theta0": float(theta0), "end_height_difference": float(abs(ends["outer"] - ends["inner"]))}
    if len(seam):
        Is = segment_integrals(f, W[seam[:, 0]], W[seam[:, 1]] + 2j * np.pi * seam[:, 2], rtol=rtol)
        dh = 0.5 * (np.conj(Is[0]) - Is[1])
        pred_h = horiz[seam[:, 1]] - seam[:, 2] * Ph - horiz[seam[:, 0]]
        diag["seam_residual_horizontal"] = float(np.max(np.abs(dh - pred_h)))
        diag["seam_residual_height"] = float(np.max(np.abs(Is[2].real - (hgt[seam[:, 1]] - hgt[seam[:, 0]]))))
    if len(nontree):
        In = segment_integrals(f, W[nontree[:, 0]], W[nontree[:, 1]], rtol=rtol)
        dh = 0.5 * (np.conj(In[0]) - In[1])
        diag["cycle_residual_horizontal"] = float(np.max(np.abs(dh - (horiz[nontree[:, 1]] - horiz[nontree[:, 0]]))))
        diag["cycle_residual_height"] = float(np.max(np.abs(In[2].real - (hgt[nontree[:, 1]] - hgt[nontree[:, 0]]))))

    # Closure of each hole ring (an A-cycle) and a path-independence probe.
    closures = {}
    for p, side in enumerate(sides):
        wr = rings0[p]
        Ic = segment_integrals(f, wr, np.roll(wr, -1), rtol=rtol).sum(axis=1)
        closures[side] = (complex(0.5 * (np.conj(Ic[0]) - Ic[1])), float(Ic[2].real))
    diag["ring_closure"] = closures
    diag["path_independence"] = _path_probe(f, W, plain, wc, rho0, rtol)

    vertices = np.column_stack([horiz.real, horiz.imag, hgt])
    rings = {side: ring0_ids[p] for p, side in enumerate(sides)}
    info = {
        "w": W, "theta0": theta0, "pole_w": dict(zip(sides, wc)),
        "centers": {side: complex(_leading_horiz(k, wc[p], sr)) for p, side in enumerate(sides)},
        "height": height, "base_point": complex(z_base), "anchor": anchor, "eps": eps,
        "ring_radius_w": dict(zip(sides, rho0)), "diagnostics": diag,
    }
    return MeshFragment("level", (k,), vertices, ids.astype(np.int64), -shift.astype(np.int64),
                        rings, info)


def _newton_from(X, k, z, v, iters=60):
    for _ in range(iters):
        G = gauss_component(X, k, z)
        step = (1.0 / G - v) / (-_gauss_prime(X, k, np.asarray(z)) / G**2)
        z = z - step
        if abs(step) <= 1e-15 * abs(z):
            break
    if abs(1.0 / gauss_component(X, k, z) - v) > 1e-10 * abs(v):
        raise GridError(f"level {k}: base point continuation failed")
    return complex(z)


def _path_probe(f, W, plain, wc, rho0, rtol, samples=24):
    """Largest difference between a straight edge and a bent homotopic path."""
    rng = np.random.default_rng(0)
    pick = rng.choice(len(plain), size=min(samples, len(plain)), replace=False)
    w0, w1 = W[plain[pick, 0]], W[plain[pick, 1]]
    mid = 0.5 * (w0 + w1) + 0.25j * (w1 - w0)
    # Keep probes whose bent path stays clear of every hole.
    ok = np.ones(len(pick), bool)
    for c, rho in zip(wc, rho0):
        for q in (w0, w1, mid):
            ok &= _periodic_dist(q, c) > 3 * rho
    if not ok.any():
        return 0.0
    w0, w1, mid = w0[ok], w1[ok], mid[ok]
    direct = segment_integrals(f, w0, w1, rtol=rtol)
    bent = segment_integrals(f, w0, mid, rtol=rtol) + segment_integrals(f, mid, w1, rtol=rtol)
    return float(np.max(np.abs(direct - bent)))


# -- necks -------------------------------------------------------------------

def _neck_rows(params):
    nu = params.neck_grid[0]
    nu += nu % 2
    U = (params.sigma - 0.5) * params.log_r
    return U * np.linspace(1.0, -1.0, nu + 1), U


def _neck_direction(k, phi):
    return np.exp(-1j * phi) if k % 2 == 0 else -np.exp(1j * phi)


def neck_patch(config: Configuration, k: int, i: int, params: MeshParams,
               center: complex | None = None, mid_height: float | None = None) -> MeshFragment:
    """Catenoid joining level ``k`` to level ``k + 1`` around ``p[k, i]``.

    The waist has radius ``1/n_k``.  The axis is vertical through ``center``
    (default: ``log(conj p[k, i]) / (2 sqrt r)``, up to a horizontal period),
    and the waist sits at
    ``mid_height`` (default: halfway between the level heights when level 1
    is at height 0).
    """
    n = config.counts[(k - 1) % config.N]
    sr = params.sqrt_r
    if center is None:
        center = np.log(np.conj(level_points(config, k)[i - 1])) / (2 * sr)
    if mid_height is None:
        heights = np.concatenate([[0.0], np.cumsum(params.log_r / np.array(config.counts))])
        kk = (k - 1) % config.N
        mid_height = 0.5 * (heights[kk] + heights[kk + 1])
    u, U = _neck_rows(params)
    nphi = params.neck_grid[1]
    phi = 2 * np.pi * np.arange(nphi) / nphi
    local = (np.cosh(u)[:, None] / n) * _neck_direction(k, phi)[None, :]
    horiz = center + local
    hgt = np.broadcast_to(mid_height + u[:, None] / n, horiz.shape)
    vertices = np.column_stack([horiz.real.ravel(), horiz.imag.ravel(), hgt.ravel()])
    rows = len(u)
    grid = np.arange(rows * nphi).reshape(rows, nphi)
    q00, q01 = grid[:-1], np.roll(grid[:-1], -1, axis=1)
    q10, q11 = grid[1:], np.roll(grid[1:], -1, axis=1)
    faces = np.concatenate([np.stack([q00, q10, q11], -1).reshape(-1, 3),
                            np.stack([q00, q11, q01], -1).reshape(-1, 3)])
    waist_row = rows // 2
    waist = local[waist_row]
    circumference = float(np.sum(np.abs(waist)) * 2 * np.pi / nphi)
    info = {"u": u, "U": U, "center": complex(center), "mid_height": float(mid_height),
            "n": n, "waist_row": waist_row, "phi": phi, "waist_circumference": circumference}
    return MeshFragment("neck", (k, i), vertices, faces, np.zeros_like(faces),
                        {"top": grid[0], "bottom": grid[-1], "waist": grid[waist_row]}, info)


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3 - 2 * x)


# -- assembly ----------------------------------------------------------------

@dataclass
class SurfaceMesh:
    """Assembled mesh with its quotient (one fundamental domain) and diagnostics.

    ``quotient_faces`` index the fundamental-domain vertices; identifying
    every lattice translate gives the compact quotient surface with its ends
    truncated.
    """

    vertices: np.ndarray
    faces: np.ndarray
    level_tags: np.ndarray
    neck_tags: np.ndarray
    tile: np.ndarray
    quotient_ids: np.ndarray
    quotient_faces: np.ndarray
    diagnostics: dict

    def topology(self) -> dict:
        """Euler characteristic, boundary loop count and genus of the quotient."""
        F = np.asarray(self.quotient_faces)
        V = int(self.quotient_ids.max()) + 1 if len(self.quotient_ids) else 0
        e = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        E = len(uniq)
        chi = V - E + len(F)
        bnd = uniq[counts == 1]
        loops = 0
        if len(bnd):
            verts = np.unique(bnd)
            remap = {v: j for j, v in enumerate(verts)}
            rows = [remap[v] for v in bnd[:, 0]]
            cols = [remap[v] for v in bnd[:, 1]]
            G = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(verts), len(verts)))
            loops, _ = connected_components(G, directed=False)
        return {"V": V, "E": E, "F": len(F), "euler": int(chi), "boundary_loops": int(loops),
                "genus": (2 - chi - loops) // 2, "nonmanifold_edges": int(np.sum(counts > 2))}


def assemble_surface(config: Configuration, params: MeshParams | None = None) -> SurfaceMesh:
    """Glue level and neck patches and tile the result.

    Raises
    ------
    UnbalancedConfigurationError
        If the configuration is not balanced to ``params.balance_tol``.
    AssemblyError
        If a neck end had to move more than the mismatch ceiling.
    """
    params = params or MeshParams()
    res = force_report(config).residual_norm
    if res > params.balance_tol:
        raise UnbalancedConfigurationError(f"force residual {res:.3e} exceeds {params.balance_tol:g}")
    X = x_from_config(config)
    N = config.N
    counts = np.array(config.counts)
    sr, log_r = params.sqrt_r, params.log_r
    H = np.concatenate([[0.0], np.cumsum(log_r / counts)])  # H[k-1] for level k; H[N] = next period
    Ph = params.horizontal_period
    Tb = np.conj(config.T) / (2 * sr)
    Pv = np.array([Tb.real, Tb.imag, H[N]])

    levels = [level_patch(config, X, k, params, height=H[k - 1]) for k in range(1, N + 1)]
    offs = np.concatenate([[0], np.cumsum([len(L.vertices) for L in levels])])
    verts = [L.vertices for L in levels]
    ltags = [np.full(len(L.vertices), k + 1) for k, L in enumerate(levels)]
    ntags = [np.full(len(L.vertices), -1) for L in levels]
    faces, fshift = [], []
    for L, o in zip(levels, offs):
        faces.append(L.faces + o)
        fshift.append(np.stack([L.face_shifts, np.zeros_like(L.face_shifts)], axis=-1))
    nverts = offs[-1]

    necks, mismatch, waists, chain = {}, {}, {}, np.zeros(N)
    neck_index = 0
    for k in range(1, N + 1):
        Lt = levels[k - 1]
        Lb = levels[k % N]
        vb = 1 if k == N else 0
        n = counts[k - 1]
        for i in range(1, n + 1):
            c_top = Lt.info["centers"][("a", i)]
            c_bot = Lb.info["centers"][("b", i)] + Tb * vb
            hb = (c_top - c_bot) / (1j * np.pi / sr)
            hb_int = int(np.round(hb.real))
            if abs(hb - hb_int) > 1e-6:
                raise AssemblyError(f"neck ({k},{i}): end centres do not line up", {"offset": hb})
            mid = 0.5 * (H[k - 1] + H[k])
            neck = neck_patch(config, k, i, params, center=c_top, mid_height=mid)
            u, U = neck.info["u"], neck.info["U"]
            nphi = len(neck.info["phi"])
            cat = neck.vertices.reshape(len(u), nphi, 3)
            top_ids = Lt.rings[("a", i)] + offs[k - 1]
            bot_ids = Lb.rings[("b", i)] + offs[k % N]
            top_pos = Lt.vertices[Lt.rings[("a", i)]]
            bot_pos = Lb.vertices[Lb.rings[("b", i)]] + hb_int * Ph + vb * Pv
            d_top = top_pos - cat[0]
            d_bot = bot_pos - cat[-1]
            lam_t = _smoothstep(u / U)[:, None, None]
            lam_b = _smoothstep(-u / U)[:, None, None]
            blended = cat + lam_t * d_top[None] + lam_b * d_bot[None]
            inner = blended[1:-1].reshape(-1, 3)
            inner_ids = nverts + np.arange(len(inner))
            nverts += len(inner)
            verts.append(inner)
            ltags.append(np.zeros(len(inner), int))
            ntags.append(np.full(len(inner), neck_index))
            rows = [top_ids] + list(inner_ids.reshape(len(u) - 2, nphi)) + [bot_ids]
            row_shift = [(0, 0)] + [(0, 0)] * (len(u) - 2) + [(hb_int, vb)]
            for r in range(len(u) - 1):
                a0, a1 = rows[r], np.roll(rows[r], -1)
                b0, b1 = rows[r + 1], np.roll(rows[r + 1], -1)
                sa, sb = row_shift[r], row_shift[r + 1]
                f1 = np.stack([a0, b0, b1], -1)
                f2 = np.stack([a0, b1, a1], -1)
                sh1 = np.broadcast_to(np.array([sa, sb, sb]), (nphi, 3, 2))
                sh2 = np.broadcast_to(np.array([sa, sb, sa]), (nphi, 3, 2))
                faces += [f1, f2]
                fshift += [sh1, sh2]
            waist = blended[neck.info["waist_row"]]
            rad = np.abs(waist[:, 0] + 1j * waist[:, 1] - c_top)
            spread = np.abs(blended[..., 0] + 1j * blended[..., 1] - c_top).max()
            waists[(k, i)] = {"circumference": neck.info["waist_circumference"],
                              "target": float(2 * np.pi / n),
                              "cylinder_ratio": float(spread / (5 * params.r_sigma / sr / n)),
                              "radius_deviation": float(np.max(np.abs(rad - 1.0 / n))),
                              "height_deviation": float(np.max(np.abs(waist[:, 2] - mid)))}
            neck_height = (1 - 2 * params.sigma) * abs(log_r) / n
            mm = {
                "top_horizontal": float(np.max(np.hypot(d_top[:, 0], d_top[:, 1]))),
                "top_vertical": float(np.max(np.abs(d_top[:, 2]))),
                "bottom_horizontal": float(np.max(np.hypot(d_bot[:, 0], d_bot[:, 1]))),
                "bottom_vertical": float(np.max(np.abs(d_bot[:, 2]))),
                "neck_height": neck_height,
            }
            mm["relative"] = max(np.hypot(mm["top_horizontal"], mm["top_vertical"]),
                                 np.hypot(mm["bottom_horizontal"], mm["bottom_vertical"])) / neck_height
            mismatch[(k, i)] = mm
            if i == 1:
                # Height drop along the chain of level integrals and catenoid
                # rises, without the gluing adjustment.
                chain[k - 1] = ((top_pos[:, 2].mean() - H[k - 1])
                                + (cat[-1, :, 2].mean() - cat[0, :, 2].mean())
                                + (Lb.info["height"] - Lb.vertices[Lb.rings[("b", i)]][:, 2].mean()))
            necks[(k, i)] = {"center": c_top, "mid_height": mid, "shift": (hb_int, vb)}
            neck_index += 1

    qverts = np.concatenate(verts)
    qfaces = np.concatenate(faces).astype(np.int64)
    qshift = np.concatenate(fshift).astype(np.int64)
    level_tags = np.concatenate(ltags)
    neck_tags = np.concatenate(ntags)

    diag = _diagnostics(config, params, levels, H, Ph, Pv, waists, mismatch, chain, necks)
    worst = max((m["relative"] for m in mismatch.values()), default=0.0)
    diag["mismatch_max_relative"] = worst
    if worst > params.mismatch_ceiling:
        raise AssemblyError(
            f"stitching mismatch {worst:.3f} of neck height exceeds ceiling {params.mismatch_ceiling}",
            diag)

    copies = int(params.copies)
    V = len(qverts)
    tiles = [(h, v) for h in range(copies) for v in range(copies)]
    all_v, all_f, tile_of = [], [], []
    for h, v in tiles:
        all_v.append(qverts + h * Ph + v * Pv)
        tile_of.append(np.tile([h, v], (V, 1)))
    for h, v in tiles:
        th = h + qshift[..., 0]
        tv = v + qshift[..., 1]
        ok = np.all((th >= 0) & (th < copies) & (tv >= 0) & (tv < copies), axis=1)
        gidx = (th * copies + tv) * V + qfaces
        all_f.append(gidx[ok])
    mesh = SurfaceMesh(
        vertices=np.concatenate(all_v), faces=np.concatenate(all_f),
        level_tags=np.tile(level_tags, len(tiles)), neck_tags=np.tile(neck_tags, len(tiles)),
        tile=np.concatenate(tile_of), quotient_ids=np.tile(np.arange(V), len(tiles)),
        quotient_faces=qfaces, diagnostics=diag)
    seam = max(L.info["diagnostics"].get("seam_residual_horizontal", 0.0) for L in levels)
    diag["tiling"] = _tiling_check(mesh, Ph, Pv, sr, seam)
    diag["vertical_period_achieved"] = diag["tiling"]["vertical_translation"]
    ach = diag["vertical_period_achieved"][2]
    diag["vertical_period_relative_error"] = abs(ach - Pv[2]) / abs(Pv[2])
    diag["topology"] = mesh.topology()
    return mesh


def _tiling_check(mesh, Ph, Pv, sqrt_r, seam_residual):
    """How well each period maps the mesh onto its neighbour copy.

    Two copies are laid side by side and every vertex of the first, moved by
    the period, is matched to the nearest vertex of the second.  For the
    horizontal period the worst seam residual of the level integrals is
    folded in: it measures how far the surface continued across the seam
    lands from the translated vertices.
    """
    q = mesh.vertices[mesh.tile.sum(axis=1) == 0]
    out = {}
    for name, P in (("horizontal", Ph), ("vertical", Pv)):
        tree = cKDTree(np.concatenate([q, q + P]))
        d, idx = tree.query(q + P)
        err = float(np.max(d))
        out[name + "_match"] = err
        out[name + "_translation"] = np.mean(tree.data[idx] - q, axis=0)
    out["horizontal_error"] = max(out["horizontal_match"], seam_residual)
    out["horizontal_error_rescaled"] = out["horizontal_error"] * 2 * sqrt_r
    out["horizontal_translation_rescaled"] = out["horizontal_translation"] * 2 * sqrt_r
    out["vertical_error"] = out["vertical_match"]
    return out


def _diagnostics(config, params, levels, H, Ph, Pv, waists, mismatch, chain, necks):
    counts = np.array(config.counts)
    target_gaps = params.log_r / counts
    gaps = np.diff(H)
    chain_total = float(chain.sum())
    d = {
        "t": params.t, "sigma": params.sigma, "r": params.r, "log_r": params.log_r,
        "level_heights": H[:-1].tolist(),
        "height_gaps": gaps.tolist(),
        "height_gap_targets": target_gaps.tolist(),
        "height_gap_error": float(np.max(np.abs(gaps - target_gaps))),
        "neck_waists": waists,
        "mismatch": mismatch,
        "horizontal_period": Ph,
        "horizontal_period_rescaled": Ph * 2 * params.sqrt_r,
        "vertical_period_target": Pv,
        "vertical_period_chain": chain_total,
        "vertical_period_chain_relative_error": abs(chain_total - Pv[2]) / abs(Pv[2]),
        "necks": necks,
        "levels": {},
    }
    for k, L in enumerate(levels, start=1):
        ld = dict(L.info["diagnostics"])
        hv = L.vertices[:, 2]
        ld["height_range"] = (float(hv.min()), float(hv.max()))
        # Excess of the vertical extent about height(inf_k) over sigma |log r| / n,
        # where n is the smaller neck count on either side of the level.
        n_min = min(counts[k - 1], counts[k - 2])
        ld["vertical_extent_excess"] = float(np.max(np.abs(hv - H[k - 1]))
                                             - params.sigma * abs(params.log_r) / n_min)
        rescaled = 2 * params.sqrt_r * L.vertices[:, 0]
        w = L.info["w"]
        lo, hi = np.argmin(w.real), np.argmax(w.real)
        ld["end_direction"] = {"inner": float(np.sign(rescaled[lo] - rescaled[L.info["anchor"]])),
                               "outer": float(np.sign(rescaled[hi] - rescaled[L.info["anchor"]]))}
        d["levels"][k] = ld
    return d
