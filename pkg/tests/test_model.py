import numpy as np
import pytest

from trimturnpike import model, problems
from trimturnpike.errors import NonSPDWeight, ShapeMismatch


def test_dims_validation():
    with pytest.raises(ValueError):
        model.Dims(n=0, p=1, m=1)


def test_problem_shape_checks():
    from dataclasses import replace
    prob = problems.lq_problem()
    bad_f1 = replace(prob, f1=lambda x: np.zeros(2))
    with pytest.raises(ShapeMismatch):
        bad_f1.eval_f1(np.zeros(1))
    bad_F2 = replace(prob, F2=lambda x: np.zeros((2, 2)))
    with pytest.raises(ShapeMismatch):
        bad_F2.eval_F2(np.zeros(1))


def test_non_spd_weight_rejected():
    prob = problems.lq_problem()
    from dataclasses import replace
    with pytest.raises(NonSPDWeight):
        replace(prob, R=np.array([[0.0]]))


def test_with_boundary_replaces_data():
    prob = problems.lq_problem()
    prob2 = prob.with_boundary(T=30.0, yT=5.0)
    assert prob2.T == 30.0
    assert np.allclose(prob2.yT, [5.0])
    assert np.allclose(prob2.x0, prob.x0)


def test_finite_difference_gradient():
    prob = problems.lq_problem()
    g = prob.eval_grad_f0(np.array([1.3]))
    assert g == pytest.approx(2.6, abs=1e-6)


def test_validate_reports_clean_builtin():
    for prob in (problems.lq_problem(), problems.nlq_problem(), problems.kepler_problem()):
        report = model.validate(prob)
        assert report.ok, report


def test_jacobian_fd_matches_analytic_quadratic():
    f = lambda x: np.array([x[0] ** 2, x[0] * x[1]])
    J = model.jacobian(f, np.array([2.0, 3.0]))
    assert np.allclose(J, [[4.0, 0.0], [3.0, 2.0]], atol=1e-6)
