import numpy as np
import pytest

from dpsurf.catalog import build_alternating, build_handles, build_wei23
from dpsurf.config import Configuration
from dpsurf.errors import AssemblyError, UnbalancedConfigurationError
from dpsurf.meshgen import MeshParams, assemble_surface, level_patch, neck_patch
from dpsurf.solver import solve_balance
from dpsurf.weierstrass import x_from_config

SMALL = dict(level_grid=(24, 48), neck_grid=(12, 24))


@pytest.fixture(scope="module")
def wei23_mesh():
    return assemble_surface(build_wei23(), MeshParams(**SMALL))


@pytest.fixture(scope="module")
def tilted():
    # Balanced two-level configuration with a nonzero period: p[2,1] = -exp(T/2).
    T = 0.3j
    c = solve_balance(Configuration([[1.0], [-1.0]], T), tol=1e-13).config
    assert abs(c.levels[1][0] + np.exp(T / 2)) < 1e-12
    return c


def test_params_validation():
    MeshParams()
    for bad in (dict(t=0), dict(t=0.6), dict(sigma=0.5), dict(sigma=0), dict(level_grid=(4, 64)),
                dict(neck_grid=(32,)), dict(copies=0), dict(margin=-1)):
        with pytest.raises(ValueError):
            MeshParams(**bad)
    p = MeshParams(t=0.25, sigma=0.3)
    assert p.r_sigma > np.exp((1 - 0.3) * p.log_r) > 0
    np.testing.assert_allclose(p.horizontal_period * 2 * p.sqrt_r, [0, 2 * np.pi, 0])


def test_level_patch_integrals():
    c = build_wei23()
    X = x_from_config(c)
    p = MeshParams(**SMALL)
    for k in (1, 2):
        L = level_patch(c, X, k, p, height=0.0)
        d = L.info["diagnostics"]
        scale = np.max(np.abs(L.vertices))
        assert d["path_independence"] <= 10 * p.quad_rtol * scale
        assert d["cycle_residual_height"] < 1e-10
        for _, dz in d["ring_closure"].values():
            assert abs(dz) < 1e-12
        assert d["end_height_difference"] < 1e-10
        # Vertical extent about height(inf_k).
        n = min(c.counts[k - 1], c.counts[k - 2])
        extent = np.max(np.abs(L.vertices[:, 2]))
        assert extent <= 1.0 + p.sigma * abs(p.log_r) / n
        assert len(L.faces) and L.faces.max() < len(L.vertices)


def test_level_end_directions():
    c = build_handles(2)
    X = x_from_config(c)
    p = MeshParams(**SMALL)
    for k in (1, 2):
        L = level_patch(c, X, k, p)
        w = L.info["w"]
        x = 2 * p.sqrt_r * L.vertices[:, 0]
        inner = x[w.real == w.real.min()].mean()
        outer = x[w.real == w.real.max()].mean()
        sign = 1 if k % 2 else -1
        assert sign * (inner - outer) > 0


def test_neck_patch_shape():
    c = build_wei23()
    p = MeshParams(**SMALL)
    for k, i in ((1, 1), (2, 3)):
        nk = neck_patch(c, k, i, p)
        n = c.counts[k - 1]
        assert abs(nk.info["waist_circumference"] - 2 * np.pi / n) < 1e-12
        expected = np.log(np.conj(c.levels[k - 1][i - 1])) / (2 * p.sqrt_r)
        assert nk.info["center"] == pytest.approx(complex(expected))
        V = nk.vertices
        waist = V[nk.rings["waist"]]
        assert np.ptp(waist[:, 2]) == 0
        rad = np.hypot(V[:, 0] - expected.real, V[:, 1] - expected.imag)
        assert rad.max() <= 5 * p.r_sigma / p.sqrt_r / n
        # Midway between level heights 0, log r / n_1, ...
        H = np.concatenate([[0], np.cumsum(p.log_r / np.array(c.counts))])
        assert nk.info["mid_height"] == pytest.approx(0.5 * (H[k - 1] + H[k]))


def test_neck_height_grows_as_t_shrinks():
    c = build_handles(1)
    spans = []
    for t in (0.25, 0.15, 0.1):
        nk = neck_patch(c, 1, 1, MeshParams(t=t, **SMALL))
        spans.append(np.ptp(nk.vertices[:, 2]))
    assert spans[0] < spans[1] < spans[2]
    assert spans[2] == pytest.approx((1 - 2 * 0.3) * 100)


def test_assemble_handles1_topology():
    m = assemble_surface(build_handles(1), MeshParams(**SMALL))
    topo = m.topology()
    assert topo["genus"] == 1
    assert topo["boundary_loops"] == 4
    assert topo["nonmanifold_edges"] == 0
    assert len(m.diagnostics["necks"]) == 2
    assert m.faces.max() < len(m.vertices)
    assert set(np.unique(m.level_tags)) == {0, 1, 2}


def test_assemble_wei23(wei23_mesh):
    d = wei23_mesh.diagnostics
    assert d["topology"]["genus"] == 4
    assert d["height_gap_error"] < 1e-9
    H = d["level_heights"]
    assert all(a > b for a, b in zip(H, H[1:]))
    for w in d["neck_waists"].values():
        assert abs(w["circumference"] - w["target"]) < 1e-12
        assert w["cylinder_ratio"] < 1
    assert d["vertical_period_relative_error"] < 0.01
    assert d["tiling"]["horizontal_error_rescaled"] < 1e-6
    np.testing.assert_allclose(d["vertical_period_target"][:2], 0.0)
    assert d["mismatch_max_relative"] <= MeshParams().mismatch_ceiling
    # Every stitched neck ring is shared with its level ring.
    assert d["topology"]["nonmanifold_edges"] == 0


def test_period_vector_with_tilt(tilted):
    p = MeshParams(**SMALL)
    m = assemble_surface(tilted, p)
    d = m.diagnostics
    Tb = np.conj(tilted.T) / (2 * p.sqrt_r)
    np.testing.assert_allclose(d["vertical_period_target"][:2], [Tb.real, Tb.imag])
    np.testing.assert_allclose(d["vertical_period_achieved"], d["vertical_period_target"], atol=1e-9)
    assert d["tiling"]["horizontal_error_rescaled"] < 1e-6
    assert d["topology"]["genus"] == 1


def test_copies_tile_the_lattice():
    p = MeshParams(copies=2, **SMALL)
    m = assemble_surface(build_handles(1), p)
    V = len(m.quotient_faces) and int(m.quotient_ids.max()) + 1
    assert len(m.vertices) == 4 * V
    assert m.faces.max() < len(m.vertices)
    # Faces crossing into a missing copy are dropped, so fewer than 4x.
    assert len(m.quotient_faces) < len(m.faces) < 4 * len(m.quotient_faces)
    t10 = m.vertices[(m.tile[:, 0] == 1) & (m.tile[:, 1] == 0)]
    t00 = m.vertices[(m.tile[:, 0] == 0) & (m.tile[:, 1] == 0)]
    np.testing.assert_allclose(t10 - t00, np.broadcast_to(p.horizontal_period, t00.shape), atol=1e-9)


def test_unbalanced_rejected():
    with pytest.raises(UnbalancedConfigurationError):
        assemble_surface(Configuration([[1.0], [2.0]]), MeshParams(**SMALL))


def test_mismatch_ceiling_raises_with_diagnostics():
    with pytest.raises(AssemblyError) as info:
        assemble_surface(build_alternating(2), MeshParams(mismatch_ceiling=0.01, **SMALL))
    assert info.value.diagnostics["mismatch_max_relative"] > 0.01
