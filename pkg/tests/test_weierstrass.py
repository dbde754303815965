import numpy as np
import pytest

from dpsurf.catalog import build_alternating, build_handles, build_wei23, default_catalog
from dpsurf.config import force_vector
from dpsurf.errors import (ContourError, DegreeDropError, MultipleZeroError,
                           PoleEvaluationError)
from dpsurf.weierstrass import (TWO_PI_I, ParameterVector, eta_component, evaluate_limit,
                                f4_values, force_identity_residual, gauss_component,
                                gk_zeros, h_component, limit_F, origin_residue,
                                origin_residue_oracle, residue_a, residue_b,
                                residue_oracle, residue_sum, x_from_config)

from conftest import random_config


def test_x_from_config_examples():
    X = x_from_config(build_alternating(2))
    assert X.a[0][0] == 1 and X.a[1][0] == -1
    Xh = x_from_config(build_handles(4))
    np.testing.assert_array_equal(Xh.b[1], [1.0])
    c = build_wei23()
    Xw = x_from_config(c)
    np.testing.assert_allclose(Xw.b[1], c.levels[0])
    np.testing.assert_allclose(Xw.a[0], 1 / np.conj(c.levels[0]))
    for k in range(2):
        n = c.counts[k]
        np.testing.assert_allclose(Xw.alphas[k], 1 / n)
        np.testing.assert_allclose(Xw.gammas[k], 1 / n)
        np.testing.assert_allclose(Xw.betas[(k + 1) % 2], 1 / n)
    assert Xw.deltas == (1.0, 1.0) and Xw.t == 0 and Xw.r == 0


def test_parameter_vector_validation():
    X = x_from_config(build_wei23())
    bad = [np.array([0.7, 0.2])] + list(X.alphas[1:])
    with pytest.raises(ValueError):
        ParameterVector(tuple(bad), X.betas, X.gammas, X.deltas, X.a, X.b)
    with pytest.raises(ValueError):
        ParameterVector(X.alphas, X.betas, X.gammas, (1.0, -1.0), X.a, X.b)
    with pytest.raises(ValueError):
        X.with_t(-1)
    assert X.with_t(0.25).r == pytest.approx(np.exp(-16))


def test_gauss_component_structure():
    X = x_from_config(build_wei23())
    for k in (1, 2):
        assert gauss_component(X, k, 0.0) == 0
        # Zero at infinity.
        assert abs(gauss_component(X, k, 1e9)) < 1e-7
        c = X.a[k - 1][0]
        eps = 1e-7
        lim = gauss_component(X, k, c + eps) * eps
        assert lim == pytest.approx(X.deltas[k - 1] * c * X.alphas[k - 1][0], rel=1e-5)
    with pytest.raises(PoleEvaluationError):
        gauss_component(X, 1, X.a[0][0])


def test_eta_residues_and_proportionality(rng):
    X = x_from_config(build_wei23())
    z = rng.normal(size=20) + 1j * rng.normal(size=20)
    for k in (1, 2):
        eta = eta_component(X, k, z)
        np.testing.assert_allclose(eta, gauss_component(X, k, z) / (X.deltas[k - 1] * z),
                                   atol=1e-12)
        c = X.b[k - 1][0]
        eps = 1e-7
        assert eta_component(X, k, c + eps) * eps == pytest.approx(-X.gamma_prev(k)[0], rel=1e-5)
        # Residues sum to zero, so eta decays like 1/z**2.
        assert abs(eta_component(X, k, 1e6)) < 1e-10


def test_gk_zero_counts():
    assert len(gk_zeros(x_from_config(build_handles(1)), 2)) == 0
    assert len(gk_zeros(x_from_config(build_handles(2)), 2)) == 1
    for c in default_catalog():
        X = x_from_config(c)
        for k in range(1, c.N + 1):
            zs = gk_zeros(X, k)
            assert len(zs) == c.counts[k - 1] + c.counts[k - 2] - 2
            if len(zs):
                assert np.max(np.abs(h_component(X, k, zs))) < 1e-10


def test_gk_zero_errors():
    # The z**(deg) coefficient of the numerator is sum(alpha a) - sum(beta b),
    # which vanishes for this symmetric pole set.
    X = ParameterVector(([0.5, 0.5], [0.5, 0.5]), ([0.5, 0.5], [0.5, 0.5]),
                        ([0.5, 0.5], [0.5, 0.5]), (1.0, 1.0),
                        ([1.0, -1.0], [1j, -1j]), ([3.0, -3.0], [2.0, -2.0]))
    with pytest.raises(DegreeDropError):
        gk_zeros(X, 1)
    W = x_from_config(build_wei23())
    assert len(gk_zeros(W, 1)) == 3
    with pytest.raises(MultipleZeroError):
        gk_zeros(W, 1, merge_tol=10.0)


def test_residue_closed_forms_match_oracle():
    X = x_from_config(build_wei23())
    for k in (1, 2):
        for i in range(1, len(X.a[k - 1]) + 1):
            assert abs(residue_a(X, k, i) - residue_oracle(X, k, i, "a")) < 1e-10
        for i in range(1, len(X.b[k - 1]) + 1):
            assert abs(residue_b(X, k, i) - residue_oracle(X, k, i, "b")) < 1e-10
        assert abs(residue_sum(X, k)) < 1e-12
        assert abs(origin_residue(X, k) - origin_residue_oracle(X, k)) < 1e-10
        assert origin_residue(X, k) == pytest.approx(1 / X.deltas[k - 1], abs=1e-12)


def test_oracle_spectral_convergence():
    X = x_from_config(build_wei23())
    a = residue_oracle(X, 2, 1, "a", nodes=512)
    b = residue_oracle(X, 2, 1, "a", nodes=1024)
    assert abs(a - b) < 1e-12
    with pytest.raises(ValueError):
        residue_oracle(X, 2, 1, "c")


def test_contour_collapse():
    X = ParameterVector(([0.5, 0.5], [1.0]), ([1.0], [0.5, 0.5]), ([0.5, 0.5], [1.0]),
                        (1.0, 1.0), ([1.0, 1.0 + 1e-11], [2.0]), ([3.0], [1.0, -1.0]))
    with pytest.raises(ContourError):
        residue_oracle(X, 1, 1, "a")


@pytest.mark.parametrize("cfg", default_catalog(), ids=lambda c: c.name)
def test_limit_passes_on_catalog(cfg):
    v = limit_F(cfg)
    assert v.passed, v.component_max
    assert v.f5_exact and np.all(v.f5 == TWO_PI_I)
    assert v.max_deviation <= 1e-8
    assert v.oracle_deviation <= 1e-10
    for a, b in zip(v.f4, v.oracle_f4):
        np.testing.assert_allclose(a, b, atol=1e-8)


def test_limit_fails_for_unbalanced_and_scaled_delta():
    c = random_config(np.random.default_rng(1), counts=[2, 2])
    assert not limit_F(c).passed
    X = x_from_config(build_handles(2))
    Y = ParameterVector(X.alphas, X.betas, X.gammas, (2.0, 2.0), X.a, X.b)
    v = evaluate_limit(Y, with_oracle=False)
    assert not v.passed and not v.f5_exact
    assert v.f5[0] == pytest.approx(TWO_PI_I / 2)


def test_f4_force_identity(rng):
    for _ in range(20):
        c = random_config(rng)
        r = force_identity_residual(c)
        assert r["plain"] <= 1e-8 * r["scale"]
        F = force_vector(c)
        f4 = np.concatenate(f4_values(x_from_config(c)))
        np.testing.assert_allclose(f4, -4j * np.pi * F, atol=1e-8 * r["scale"])


def test_f4_parity_variant_disagrees_on_odd_levels():
    # The identity without a level-parity sign is the one that holds; with
    # the sign, odd levels flip.
    c = random_config(np.random.default_rng(3), counts=[1, 2])
    r = force_identity_residual(c)
    assert r["plain"] < 1e-10
    assert r["parity"] > 1e-3
