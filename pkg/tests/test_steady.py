import numpy as np
import pytest

from trimturnpike import problems, steady


def test_lq_steady_point_closed_form():
    # equilibrium of the reduced LQ field: xbar = -lam/2, pbar = 0, ubar = 0
    prob = problems.lq_problem()
    rng = np.random.default_rng(8)
    for _ in range(20):
        lam = rng.uniform(-4.0, 4.0)
        sp = steady.solve_static(prob, np.array([lam]))
        assert abs(sp.xbar[0] + lam / 2.0) < 1e-10
        assert abs(sp.pxbar[0]) < 1e-10
        assert abs(sp.ubar[0]) < 1e-10


def test_nonflat_nlq_origin_from_random_seeds():
    prob = problems.nlq_problem(alpha=0.1)
    rng = np.random.default_rng(21)
    lam = np.array([0.4])
    for _ in range(10):
        x_init = rng.uniform(-1.0, 1.0, 2)
        x_init /= max(1.0, np.linalg.norm(x_init))
        sp = steady.solve_static(prob, lam, x_init=x_init)
        assert np.max(np.abs(sp.xbar)) < 1e-9
        assert np.max(np.abs(sp.pxbar)) < 1e-9


def test_flat_nlq_branch_structure():
    # at lam = (-1, 1): 2 lam1 lam2 = -2 < 1, so the nonzero branches
    # xbar = +/- sqrt((1 - 2 lam1 lam2) / (2 lam2^2)) = +/- sqrt(1.5) exist
    prob = problems.nlq_problem()
    lam = np.array([-1.0, 1.0])
    seeds = [np.array([v]) for v in (-2.0, 0.0, 2.0)]
    branches = steady.enumerate_static_branches(prob, lam, seeds)
    roots = sorted(b.point.xbar[0] for b in branches)
    want = sorted([-np.sqrt(1.5), 0.0, np.sqrt(1.5)])
    assert len(roots) == 3
    assert np.allclose(roots, want, atol=1e-8)
    by_root = {round(b.point.xbar[0], 6): b for b in branches}
    assert by_root[0.0].hyperbolicity.hyperbolic
    assert not by_root[round(np.sqrt(1.5), 6)].hyperbolicity.hyperbolic


def test_flat_nlq_origin_gap_formula():
    # linearization at the origin has gap sqrt(1 - 2 lam1 lam2) when positive
    prob = problems.nlq_problem()
    for l1 in (-2.0, -1.0, 0.0, 1.0, 2.0):
        for l2 in (-2.0, -1.0, 0.0, 1.0, 2.0):
            lam = np.array([l1, l2])
            sp = steady.solve_static(prob, lam, x_init=np.array([0.0]))
            rep = steady.check_hyperbolicity(prob, sp)
            disc = 1.0 - 2.0 * l1 * l2
            if disc > 0:
                assert rep.hyperbolic
                assert rep.mu_star == pytest.approx(np.sqrt(disc), rel=1e-6)
            else:
                assert not rep.hyperbolic


def test_trim_rate_lq():
    prob = problems.lq_problem()
    sp = steady.solve_static(prob, np.array([-2.0]))
    rate = steady.trim_rate(prob, sp)
    # g1(x) = x, so the trim rate equals xbar = 1
    assert rate[0] == pytest.approx(1.0, abs=1e-10)


def test_match_trim_rate_lq():
    prob = problems.lq_problem()
    lam, sp = steady.match_trim_rate(prob, np.array([0.75]))
    assert lam[0] == pytest.approx(-1.5, abs=1e-8)
    assert sp.xbar[0] == pytest.approx(0.75, abs=1e-8)


def test_match_trim_rate_kepler_through_fold():
    # the lam -> rate branch from lam = 0 folds; the augmented system
    # still reaches the circular trim with rate pi
    prob = problems.kepler_problem(T=100.0)
    lam, sp = steady.match_trim_rate(prob, np.array([np.pi]))
    assert sp.xbar[2] == pytest.approx(np.pi, abs=1e-8)
    assert sp.xbar[1] == pytest.approx(0.0, abs=1e-8)
    assert steady.trim_rate(prob, sp)[0] == pytest.approx(np.pi, abs=1e-8)
    rep = steady.check_hyperbolicity(prob, sp)
    assert rep.hyperbolic


def test_steady_point_is_fbvp_equilibrium_in_shape_channels():
    from trimturnpike import pmp
    prob = problems.kepler_problem()
    sp = steady.solve_static(prob, np.array([0.0]))
    z = np.concatenate([sp.xbar, [0.0], sp.pxbar])
    dz = pmp.fbvp_rhs(prob, z, sp.lam)
    n, p = prob.dims.n, prob.dims.p
    assert np.max(np.abs(dz[:n])) < 1e-10          # shape frozen
    assert np.max(np.abs(dz[n + p:])) < 1e-10      # adjoint frozen
