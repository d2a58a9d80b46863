import math

import numpy as np
import pytest

from restriction_lab import KnappParams, PreconditionError
from restriction_lab._compat import model_dump
from restriction_lab._numerics import gradient, lp_norm
from restriction_lab.models.knapp import KnappSample, NecessityStatus
from restriction_lab.resources.extension import EvalGrid, bump
from restriction_lab.resources.knapp import EPS_GRID, knapp_cap
from restriction_lab.resources.surfaces import product_grid


def test_exponent_conditions(lab):
    knapp = lab.knapp
    assert knapp.scale_invariant(2, 6.0, 2.0)
    assert knapp.scale_invariant(3, 4.0 * 1.5, 3.0)
    assert not knapp.scale_invariant(2, 8.0, 2.0)
    assert knapp.admissible_compact(2, 8.0, 2.0)
    assert not knapp.admissible_compact(2, 5.0, 2.0)
    # p' must exceed 2n/(n-1)
    assert not knapp.admissible_compact(2, 4.0, 1.0)


def test_admissibility_report(lab):
    report = lab.knapp.admissibility(2, 6.0, 2.0)
    assert report.admissible and report.scale_invariant
    assert report.known_range == pytest.approx(10.0 / 3.0)
    assert report.in_known_range


def test_knapp_exponent(lab):
    kp = KnappParams(k=2, eps=1.0, p_prime=6.0, q=2.0)
    assert lab.knapp.knapp_exponent(kp) == pytest.approx(1.0 - 4.0 / 6.0)


def test_necessity_violated(lab):
    verdict = lab.knapp.necessity_verdict(2, 5.0, 2.0)
    assert verdict.status is NecessityStatus.VIOLATED
    assert verdict.witness_eps == EPS_GRID[0]
    assert verdict.witness_exponent < 0
    assert not verdict.sufficient_range


def test_necessity_consistent(lab):
    verdict = lab.knapp.necessity_verdict(2, 6.0, 2.0)
    assert verdict.status is NecessityStatus.CONSISTENT
    assert verdict.witness_eps is None
    assert verdict.sufficient_range


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("p_prime", [5.0, 6.0, 8.0])
@pytest.mark.parametrize("q", [1.0, 2.0])
def test_necessity_matches_exponent_sign(lab, k, p_prime, q):
    verdict = lab.knapp.necessity_verdict(k, p_prime, q)
    exponents = [lab.knapp.knapp_exponent(KnappParams(k=k, eps=e, p_prime=p_prime, q=q)) for e in EPS_GRID]
    assert (verdict.status is NecessityStatus.VIOLATED) == (min(exponents) < 0)


def test_necessity_needs_k(lab):
    with pytest.raises(PreconditionError):
        lab.knapp.necessity_verdict(1, 6.0, 2.0)


def test_knapp_cap():
    points = np.array([[0.05, 0.2], [0.5, 0.0], [-0.01, 0.1], [0.05, 0.9]])
    cap = knapp_cap(points, lam=8.0, eps=0.5)
    assert cap[0] == pytest.approx(1.0)
    assert cap[1] == 0.0
    assert cap[2] == 0.0
    assert cap[3] == 0.0
    assert np.all((cap >= 0.0) & (cap <= 1.0))


def test_rescaled_deviation_halves(lab):
    # a = 1 + ξ₁: the deviation from ξ₁² is max |η₁|³ / λ
    surface = lab.surfaces.finite_type(2, coefficients={"0,0": 1.0, "1,0": 1.0})
    first = lab.knapp.rescaled_deviation(surface, 8.0, 0.5)
    second = lab.knapp.rescaled_deviation(surface, 16.0, 0.5)
    assert first == pytest.approx(1.0 / 8.0)
    assert first / second == pytest.approx(2.0)


def test_slope_fit_preconditions(lab):
    kp = KnappParams(k=2, eps=1.0, p_prime=6.0, q=2.0)
    with pytest.raises(PreconditionError):
        lab.knapp.knapp_slope_fit(lab.surfaces.finite_type(2), kp, [4.0, 8.0, 16.0])
    with pytest.raises(PreconditionError):
        lab.knapp.knapp_slope_fit(lab.surfaces.sphere(3), kp, [4.0, 8.0, 16.0, 32.0])
    with pytest.raises(PreconditionError):
        lab.knapp.knapp_slope_fit(lab.surfaces.finite_type(3), kp, [4.0, 8.0, 16.0, 32.0])


@pytest.mark.slow
def test_slope_fit_matches_exponent(lab):
    kp = KnappParams(k=2, eps=1.0, p_prime=6.0, q=2.0)
    fit = lab.knapp.knapp_slope_fit(lab.surfaces.finite_type(2), kp, [4.0, 8.0, 16.0, 32.0])
    assert fit.predicted == pytest.approx(lab.knapp.knapp_exponent(kp))
    assert fit.error <= 0.1
    assert [s.lam for s in fit.samples] == [4.0, 8.0, 16.0, 32.0]


def test_slope_fit_sample_matches_direct_sum(lab):
    # one λ summed in the original variables: no rescaling, no prefactors
    surface = lab.surfaces.finite_type(2, {"0,0": 1.0, "1,0": 0.5})
    kp = KnappParams(k=2, eps=0.5, p_prime=6.0, q=2.0)
    fit = lab.knapp.knapp_slope_fit(surface, kp, [2.0, 3.0, 4.0, 5.0])
    lam = 3.0

    chart = lab.surfaces.grid(lab.knapp.rescaled_surface(surface, lam, kp.eps), 32)
    eta, plain, _ = product_grid(chart.axes, chart.axis_weights, chart.periodic)
    xi1, xi2 = eta[:, 0] / lam, eta[:, 1] / lam**kp.eps
    f1, f2 = gradient(surface.graph, xi1, xi2, lab.config.fd_step * surface.diameter)
    dsigma = np.sqrt(1.0 + f1**2 + f2**2) * plain * lam ** (-1.0 - kp.eps)
    u_lam = bump(np.hypot(lam * xi1, lam**kp.eps * xi2) / 0.5)
    nodes = np.stack([xi1, xi2, surface.graph(xi1, xi2)], axis=-1)

    box = EvalGrid.box(0.3, 8, 3)
    scale = np.array([lam, lam**kp.eps, lam**2])
    x = box.points * scale
    values = np.exp(2j * math.pi * (x @ nodes.T)) @ (u_lam * dsigma)
    lhs = lp_norm(values, box.volumes * np.prod(scale), kp.p_prime)
    rhs = lp_norm(u_lam, dsigma, 2.0)

    sample = fit.samples[1]
    assert sample.lam == lam
    assert sample.lhs_norm == pytest.approx(lhs, rel=1e-8)
    assert sample.ratio == pytest.approx(lhs / rhs, rel=1e-8)


def test_sample_exports_lambda_column():
    sample = KnappSample(lam=4.0, lhs_norm=1.0, ratio=0.5, log_ratio=math.log(0.5))
    row = model_dump(sample, by_alias=True)
    assert row["lambda"] == 4.0 and "lam" not in row
    assert KnappSample.model_validate(row).lam == 4.0
