import math

import numpy as np
import pytest

from restriction_lab import (
    DomainError,
    LabConfig,
    LorentzParams,
    PreconditionError,
    ProductGridFunction,
    RefinementError,
    WeightedSamples,
)
from restriction_lab.resources.norms import Norms, dual, embedding_constant

from tests.conftest import random_samples


alpha_params = [1.2, 2.0, 3.7]
alpha_ids = [f" alpha = {a} " for a in alpha_params]


@pytest.fixture(scope="module", ids=alpha_ids, params=alpha_params)
def alpha(request):
    return request.param


@pytest.fixture(scope="module")
def norms():
    return Norms(LabConfig(seed=0, workers=1))


def test_distribution_function(norms):
    f = WeightedSamples(np.array([3.0, 2.0, 1.0]), np.ones(3))
    assert norms.distribution_function(f, 2.0) == 2.0
    assert norms.distribution_function(f, 0.0) == f.total_weight == 3.0
    assert norms.distribution_function(f, 4.0) == 0.0
    with pytest.raises(PreconditionError):
        norms.distribution_function(f, -1.0)


def test_lorentz_small_example(norms):
    f = WeightedSamples(np.array([3.0, 2.0, 1.0]), np.ones(3))
    assert norms.lorentz_norm(f, LorentzParams(alpha=2, beta=2)) == pytest.approx(math.sqrt(14.0))
    # single step: |a| T^{1/alpha}
    g = WeightedSamples(np.array([2.0]), np.array([4.0]))
    assert norms.lorentz_norm(g, LorentzParams.weak(2.0)) == pytest.approx(4.0)


def test_lorentz_equals_lebesgue_on_diagonal(norms, alpha):
    for seed in range(50):
        f = random_samples(seed)
        lorentz = norms.lorentz_norm(f, LorentzParams.lebesgue(alpha))
        assert lorentz == pytest.approx(norms.lebesgue_norm(f, alpha), rel=1e-12)


@pytest.mark.parametrize("beta", [1.0, 1.5, 3.0, math.inf])
def test_distribution_form_factor(norms, alpha, beta):
    f = random_samples(1)
    params = LorentzParams(alpha=alpha, beta=beta)
    factor = 1.0 if math.isinf(beta) else alpha ** (1.0 / beta)
    expected = factor * norms.lorentz_norm_distribution(f, params)
    assert norms.lorentz_norm(f, params) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("cells", [10, 100, 1000])
def test_radial_power_is_weak_normalized(norms, cells):
    # n = 2, p' = 6, q = 2: r^{(n-2)/q - n/p'} = r^{-1/3} lies in L^{3,∞}
    n, p_prime, q = 2, 6.0, 2.0
    alpha = 1.0 / (1.0 / q - 1.0 / p_prime)
    h = 0.01
    r = h * np.arange(1, cells + 1)
    f = WeightedSamples(r ** ((n - 2) / q - n / p_prime), np.full(cells, h))
    assert norms.lorentz_norm(f, LorentzParams.weak(alpha)) == pytest.approx(1.0, rel=1e-12)


def test_lorentz_ignores_sample_order(norms):
    f = random_samples(2)
    order = np.random.default_rng(0).permutation(f.values.size)
    params = LorentzParams(alpha=1.5, beta=4.0)
    assert norms.lorentz_norm(f.permuted(order), params) == pytest.approx(norms.lorentz_norm(f, params), rel=1e-14)


@pytest.mark.parametrize("beta1, beta2", [(1.0, 2.0), (1.5, 4.0), (2.0, math.inf)])
def test_lorentz_embedding(norms, alpha, beta1, beta2):
    c = embedding_constant(alpha, beta1, beta2)
    for seed in range(20):
        f = random_samples(seed)
        lhs = norms.lorentz_norm(f, LorentzParams(alpha=alpha, beta=beta2))
        rhs = norms.lorentz_norm(f, LorentzParams(alpha=alpha, beta=beta1))
        assert lhs <= c * rhs * (1.0 + 1e-12)


def test_embedding_constant_order():
    assert embedding_constant(2.0, 2.0, 2.0) == 1.0
    with pytest.raises(PreconditionError):
        embedding_constant(2.0, 3.0, 2.0)


def test_dual():
    assert dual(2.0) == 2.0
    assert dual(1.0) == math.inf
    assert dual(math.inf) == 1.0
    assert dual(1.5) == pytest.approx(3.0)


def test_samples_validation():
    with pytest.raises(DomainError):
        WeightedSamples(np.ones(3), np.array([1.0, 0.0, 1.0]))
    with pytest.raises(DomainError):
        WeightedSamples(np.ones(3), np.ones(3), measure=2.0)
    with pytest.raises(DomainError):
        ProductGridFunction(np.ones((2, 3)), np.ones(3), np.ones(2))


def test_holder_exponent_mismatch(norms):
    f = random_samples(3)
    with pytest.raises(PreconditionError):
        norms.check_holder(f, f, LorentzParams.lebesgue(2.0), LorentzParams.lebesgue(2.0),
                           LorentzParams.lebesgue(2.0))


def test_holder_lebesgue_case(norms):
    f, g = random_samples(4), random_samples(5)
    g = WeightedSamples(g.values, f.weights)
    ratio = norms.check_holder(f, g, LorentzParams.lebesgue(2.0), LorentzParams.lebesgue(2.0),
                               LorentzParams.lebesgue(1.0))
    assert ratio <= 1.0 + 1e-12


def test_parseval(norms):
    for row in norms.census("hausdorff_young", 2.0, 20):
        assert row.ratio == pytest.approx(1.0, abs=1e-8)


def test_hausdorff_young_needs_uniform_grid(norms):
    u = WeightedSamples(np.ones(4), np.array([0.25, 0.25, 0.25, 0.5]))
    with pytest.raises(DomainError):
        norms.check_hausdorff_young(u, 1.5)


def test_hausdorff_young_refinement_settles(norms):
    gaussian = lambda x: np.exp(-math.pi * x**2)  # noqa: E731
    value, size = norms.hausdorff_young_refined(gaussian, 2.0, half_width=4.0)
    assert value == pytest.approx(1.0, abs=1e-8)
    assert size == 512


def test_hausdorff_young_refinement_gives_up(norms):
    gaussian = lambda x: np.exp(-math.pi * x**2)  # noqa: E731
    with pytest.raises(RefinementError):
        norms.hausdorff_young_refined(gaussian, 1.5, half_width=4.0, start=64, max_size=64)


def test_mixed_norm_of_rank_one(norms):
    rng = np.random.default_rng(5)
    g, h = rng.standard_normal(6), rng.standard_normal(4)
    wx, wy = rng.uniform(0.5, 1.5, 6), rng.uniform(0.5, 1.5, 4)
    u = ProductGridFunction.rank_one(g, h, wx, wy)
    outer, inner = LorentzParams.lebesgue(3.0), LorentzParams.lebesgue(1.5)
    expected = np.sum(wx * np.abs(g) ** 3) ** (1 / 3) * np.sum(wy * np.abs(h) ** 1.5) ** (1 / 1.5)
    assert norms.mixed_lorentz_norm(u, outer, inner) == pytest.approx(expected, rel=1e-12)


def test_mixed_norm_with_equal_exponents_is_plain(norms):
    rng = np.random.default_rng(9)
    wx, wy = rng.uniform(0.5, 1.5, 5), rng.uniform(0.5, 1.5, 3)
    u = ProductGridFunction(rng.standard_normal((5, 3)), wx, wy)
    lp = LorentzParams.lebesgue(2.5)
    plain = np.sum(u.weights * np.abs(u.values) ** 2.5) ** (1 / 2.5)
    assert norms.mixed_lorentz_norm(u, lp, lp, "y") == pytest.approx(plain, rel=1e-12)
    assert norms.mixed_lorentz_norm(u, lp, lp, "x") == pytest.approx(plain, rel=1e-12)


def test_minkowski_rank_one_equality(norms):
    rng = np.random.default_rng(6)
    wx, wy = rng.uniform(0.5, 1.5, 5), rng.uniform(0.5, 1.5, 7)
    u = ProductGridFunction.rank_one(rng.standard_normal(5), rng.standard_normal(7), wx, wy)
    assert norms.check_minkowski(u, 1.5) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("p", [4.0 / 3.0, 1.5])
def test_minkowski_census(norms, p):
    assert max(row.ratio for row in norms.census("minkowski", p, 50)) <= 1.0 + 1e-12


def test_interchange_census_bounded(norms):
    assert max(row.ratio for row in norms.census("interchange", 1.5, 50)) <= 10.0


def test_census_is_worker_independent():
    serial = Norms(LabConfig(seed=5, workers=1)).census("interchange", 1.5, 16)
    parallel = Norms(LabConfig(seed=5, workers=4)).census("interchange", 1.5, 16)
    assert [row.ratio for row in serial] == [row.ratio for row in parallel]
    assert [row.seed for row in serial] == list(range(16))


def test_census_unknown_checker(norms):
    with pytest.raises(PreconditionError):
        norms.census("young", 1.5, 3)
