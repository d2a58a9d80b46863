import numpy as np
import pytest

from restriction_lab import DomainError, NormalFormSurface, OdeSolution, PreconditionError
from restriction_lab.models.normal_form import OdeStatus
from restriction_lab.resources.normal_form import random_quadratic_form


def _square(half_width=0.25, count=9):
    axis = np.linspace(-half_width, half_width, count)
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([x1.ravel(), x2.ravel()], axis=-1)


@pytest.mark.parametrize("k", [3, 4, 5, 6])
@pytest.mark.parametrize("sign", [1, -1])
def test_closed_form_solutions(lab, k, sign):
    sol = OdeSolution(k=k, sign=sign, A=1.0, B=1.0)
    assert sol.exponent == -(k - 2)
    assert lab.normal_form.ode_residual(sol, np.linspace(0.0, 10.0, 100)) < 1e-10


def test_trivial_solution(lab):
    assert lab.normal_form.ode_residual(OdeSolution(k=3, sign=0), np.linspace(-5.0, 5.0, 11)) == 0.0


def test_residual_outside_domain(lab):
    with pytest.raises(PreconditionError):
        lab.normal_form.ode_residual(OdeSolution(k=3, A=1.0, B=1.0), np.array([-2.0, 0.0]))


def test_solution_validation():
    with pytest.raises(ValueError):
        OdeSolution(k=3, sign=2)
    with pytest.raises(ValueError):
        OdeSolution(k=3, A=0.0)
    with pytest.raises(ValueError):
        OdeSolution(k=2)


def test_backward_blow_up(lab):
    # singular point of the solution through (c, d) is t0 + (k-2)c/d = 0.7
    verdict = lab.normal_form.ode_no_nontrivial_solution(5, 1.0, 1.0, -10.0)
    assert verdict.status is OdeStatus.BLOW_UP
    assert verdict.t_star == pytest.approx(0.7, abs=1e-3)


def test_reaches_zero(lab):
    # φ(0) = c (t*/(t* - t0))^{-(k-2)} with t* = 4
    verdict = lab.normal_form.ode_no_nontrivial_solution(5, 1.0, 1.0, 1.0)
    assert verdict.status is OdeStatus.REACHES_ZERO
    assert verdict.phi_at_zero == pytest.approx((4.0 / 3.0) ** -3, rel=1e-8)


def test_constant_solution(lab):
    verdict = lab.normal_form.ode_no_nontrivial_solution(4, 1.0, 2.0, 0.0)
    assert verdict.status is OdeStatus.REACHES_ZERO
    assert verdict.phi_at_zero == pytest.approx(2.0)


def test_cauchy_preconditions(lab):
    with pytest.raises(PreconditionError):
        lab.normal_form.ode_no_nontrivial_solution(2, 1.0, 1.0, 0.0)
    with pytest.raises(PreconditionError):
        lab.normal_form.ode_no_nontrivial_solution(4, 1.0, 0.0, 0.0)


def test_sweep_has_no_falsifying_run(lab):
    verdicts = lab.normal_form.ode_sweep(5, 40)
    assert len(verdicts) == 40
    assert not any(v.status is OdeStatus.FALSIFIED for v in verdicts)
    assert [v.c for v in verdicts] == [v.c for v in lab.normal_form.ode_sweep(5, 40)]


def test_curvature_residual(lab):
    paraboloid = lambda x1, x2: 0.5 * (x1**2 + x2**2)  # noqa: E731
    assert lab.normal_form.curvature_residual(paraboloid, _square()) == pytest.approx(1.0, abs=1e-6)
    cylinder = NormalFormSurface(k=3, coefficients={"0,0": 1.0})
    assert lab.normal_form.curvature_residual(cylinder.f, _square()) <= 1e-6


def test_cylinder_normal_form(lab):
    cylinder = NormalFormSurface(k=3, coefficients={"0,0": 1.0})
    report = lab.normal_form.verify_normal_form(cylinder)
    assert report.passed, report.failures
    assert [c.name for c in report.checks] == ["contact_order", "bounded_quotient", "curvature", "type_propagation"]
    assert lab.normal_form.flat_along_axis(cylinder)
    assert lab.normal_form.taylor_consistent(cylinder)


def test_paraboloid_is_not_a_normal_form(lab):
    paraboloid = lambda x1, x2: 0.5 * (x1**2 + x2**2)  # noqa: E731
    report = lab.normal_form.verify_normal_form(paraboloid, k=2)
    assert not report.passed
    assert "curvature" in report.failures


def test_raw_graph_needs_k(lab):
    with pytest.raises(PreconditionError):
        lab.normal_form.verify_normal_form(lambda x1, x2: x1**2 + 0.0 * x2)


def test_tangent_developable(lab):
    f = lab.normal_form.tangent_developable()
    x2 = np.linspace(-0.25, 0.25, 7)
    # the ruling through the base point lies in the tangent plane
    assert np.max(np.abs(f(np.zeros_like(x2), x2))) <= 1e-10
    assert lab.normal_form.curvature_residual(f, _square()) <= 1e-6
    report = lab.normal_form.verify_normal_form(f, k=2, half_width=0.5)
    assert report.passed, report.failures


def test_tangent_developable_singular_base(lab):
    with pytest.raises(DomainError):
        lab.normal_form.tangent_developable(v0=0.0)


def test_second_order_vanishing(lab):
    f = random_quadratic_form(3, 2, seed=1)
    assert lab.normal_form.second_order_vanishing(f, 3, 2)
    g = lambda pts: pts[:, 0] ** 2 + pts[:, 2]  # noqa: E731
    assert not lab.normal_form.second_order_vanishing(g, 3, 2)
    h = lambda pts: pts[:, 0] * (1.0 + pts[:, 2])  # noqa: E731
    assert not lab.normal_form.second_order_vanishing(h, 3, 2)
    with pytest.raises(PreconditionError):
        lab.normal_form.second_order_vanishing(f, 3, 4)
