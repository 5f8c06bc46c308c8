import numpy as np
import pytest

from trimturnpike import problems, shooting, steady, turnpike
from trimturnpike.errors import DegenerateFit, LambdaMismatch
from trimturnpike.shooting import ShootingConfig


def test_fit_envelope_recovers_synthetic_constants():
    T = 30.0
    t = np.linspace(0.0, T, 1201)
    d = 5.0 * (np.exp(-2.0 * t) + np.exp(-2.0 * (T - t)))
    C, mu, diag = turnpike.fit_envelope(t, d, T, mu_hint=2.0)
    assert mu == pytest.approx(2.0, abs=1e-3)
    assert C == pytest.approx(5.0, abs=1e-2)
    assert diag.samples_used >= 20


def test_fit_envelope_exact_turnpike_degenerate():
    t = np.linspace(0.0, 10.0, 401)
    with pytest.raises(DegenerateFit):
        turnpike.fit_envelope(t, np.full_like(t, 1e-15), 10.0, mu_hint=1.0)


def test_trim_anchor_translation():
    # shifting the anchor shifts the trim rigidly
    prob = problems.lq_problem()
    sp = steady.solve_static(prob, np.array([-2.0]))
    a = turnpike.build_trim(sp, 10.0, np.array([1.0]), problem=prob)
    b = turnpike.build_trim(sp, 10.0, np.array([4.0]), problem=prob)
    assert np.allclose(b.values - a.values, 3.0, atol=1e-12)


def test_certificate_lq():
    prob = problems.lq_problem(T=40.0)
    sol = shooting.solve_bvp(prob, ShootingConfig(nodes=8))
    sp = steady.solve_static(prob, sol.lam)
    rep = steady.check_hyperbolicity(prob, sp)
    cert = turnpike.certify(prob, sol, sp, rep)
    assert rep.mu_star == pytest.approx(1.0, abs=1e-6)
    assert cert.mu_fit == pytest.approx(1.0, rel=0.1)
    # midpoint anchoring: the cyclic deviation vanishes at T/2
    i_mid = np.argmin(np.abs(cert.times - prob.T / 2.0))
    assert cert.dev_y[i_mid] <= 1e-10
    # fitted envelope bounds both channels
    assert cert.max_relative_violation == 0.0


def test_certificate_rejects_mismatched_multiplier():
    prob = problems.lq_problem(T=40.0)
    sol = shooting.solve_bvp(prob, ShootingConfig(nodes=8))
    sp = steady.solve_static(prob, sol.lam + 0.1)
    rep = steady.check_hyperbolicity(prob, sp)
    with pytest.raises(LambdaMismatch):
        turnpike.certify(prob, sol, sp, rep)


def test_certificate_exact_turnpike_short_circuit():
    prob = problems.lq_problem()
    lam = np.array([-2.0])
    sp = steady.solve_static(prob, lam)
    rate = steady.trim_rate(prob, sp)
    T = 12.0
    trimmed = prob.with_boundary(T=T, x0=sp.xbar, xT=sp.xbar,
                                 y0=np.array([0.0]), yT=rate * T)
    sol = shooting.solve_bvp(trimmed, ShootingConfig(nodes=6))
    rep = steady.check_hyperbolicity(trimmed, sp)
    cert = turnpike.certify(trimmed, sol, sp, rep)
    assert cert.exact_turnpike
    assert cert.C_fit is None


def test_anchor_from_solution_is_midpoint():
    prob = problems.lq_problem()
    sol = shooting.solve_bvp(prob, ShootingConfig(nodes=8))
    anchor = turnpike.anchor_from_solution(sol)
    assert np.allclose(anchor, sol.y_at(prob.T / 2.0))
