import numpy as np
import pytest

from dpsurf.catalog import (build_alternating, build_double_handles, build_handles,
                            build_stacked, build_wei23)
from dpsurf.config import Configuration, force_report
from dpsurf.errors import DegenerateConfigurationError
from dpsurf.solver import (canonicalize, force_jacobian, is_roots_of_unity_class, jacobian_fd,
                           nondegeneracy_rank, solve_balance)

from conftest import random_config


@pytest.mark.parametrize("n", range(1, 9))
def test_handles_rank(n):
    rep = force_jacobian(build_handles(n))
    assert rep.rank == n == rep.m - 1
    assert rep.nondegenerate
    assert rep.gap >= 1e6


@pytest.mark.parametrize("n", range(1, 11))
def test_handles_block_diagonally_dominant(n):
    J = force_jacobian(build_handles(n)).matrix
    M = J[1:, 1:]
    diag = np.abs(np.diag(M))
    off = np.abs(M).sum(axis=0) - diag
    assert np.all(diag > off)


def test_wei23_rank_and_gap():
    rep = force_jacobian(build_wei23())
    assert rep.rank == 4 and rep.gap >= 1e6


@pytest.mark.parametrize("N,n", [(2, 2), (4, 3)])
def test_stacked_rank(N, n):
    assert nondegeneracy_rank(build_stacked(N, n)) == N + n


@pytest.mark.parametrize("n,m", [(2, 3), (3, 3)])
def test_double_handles_rank(n, m):
    assert nondegeneracy_rank(build_double_handles(n, m)) == n + m + 1


def test_alternating_two_by_two():
    rep = force_jacobian(build_alternating(2))
    assert rep.m == 2 and rep.rank == 1
    np.testing.assert_allclose(rep.matrix, jacobian_fd(build_alternating(2)), atol=1e-8)


def test_analytic_matches_fd_and_null_relations(rng):
    for _ in range(10):
        c = random_config(rng)
        J = force_jacobian(c).matrix
        Jfd = jacobian_fd(c)
        nrm = np.linalg.norm(J)
        assert np.max(np.abs(J - Jfd)) <= 1e-6 * max(1.0, np.max(np.abs(J)))
        p = c.flat()
        assert np.linalg.norm(J @ p) <= 1e-9 * nrm * np.linalg.norm(p)
        assert np.linalg.norm(np.ones(c.m) @ J) <= 1e-9 * nrm


def test_rank_never_exceeds_m_minus_1(rng):
    for _ in range(10):
        c = random_config(rng)
        assert force_jacobian(c).rank <= c.m - 1


def test_jacobian_method_switch():
    c = build_wei23()
    a = force_jacobian(c, method="analytic").matrix
    f = force_jacobian(c, method="fd").matrix
    np.testing.assert_allclose(a, f, atol=1e-6)
    with pytest.raises(ValueError):
        force_jacobian(c, method="complex-step")


def test_solver_recovers_handles4(rng):
    exact = build_handles(4)
    p = exact.flat().copy()
    p[1:] += 1e-2 * np.exp(1j * rng.uniform(0, 2 * np.pi, 4)) * rng.uniform(0, 1, 4)
    out = solve_balance(exact.with_flat(p), tol=1e-13)
    assert out.converged and out.iterations <= 25
    assert out.residual <= 1e-13
    got = out.config.flat() / out.config.flat()[0]
    assert np.max(np.abs(np.sort_complex(got[1:]) - np.sort_complex(exact.flat()[1:]))) < 1e-10
    assert out.history[-1] == out.residual


def test_solver_fixed_point():
    c = build_handles(3)
    out = solve_balance(c, tol=1e-10)
    assert out.converged and out.iterations <= 1
    assert out.config.levels[0][0] == c.levels[0][0]


def test_solver_nonconvergence_reports_best_iterate():
    c = Configuration(([1.0, 2.0], [3.0 + 1j, -0.5j]))
    try:
        out = solve_balance(c, tol=1e-12, max_iter=1)
    except DegenerateConfigurationError:
        return
    assert not out.converged
    assert out.iterations == 1
    assert out.residual < force_report(c).residual_norm


def test_solver_rejects_bad_tol():
    with pytest.raises(ValueError):
        solve_balance(build_handles(1), tol=0)


def test_canonicalize_and_class():
    c = Configuration(([2j, -2j], [-2.0, 2.0]))
    assert is_roots_of_unity_class(c)
    can = canonicalize(c)
    assert can.levels[0][0] == 1
    assert not is_roots_of_unity_class(Configuration(([1.0, -1.0], [1j, -2j])))
    assert not is_roots_of_unity_class(build_wei23())


def test_two_two_search_finds_only_roots_of_unity():
    rng = np.random.default_rng(7)
    converged = 0
    for _ in range(15):
        c = random_config(rng, counts=[2, 2], T=0j)
        try:
            out = solve_balance(c, tol=1e-12, max_iter=60)
        except DegenerateConfigurationError:
            continue
        if out.converged:
            converged += 1
            assert is_roots_of_unity_class(out.config)
    assert converged >= 1
