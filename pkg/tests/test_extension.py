import math

import numpy as np
import pytest

from restriction_lab import DomainError, EvalGrid, RefinementError, SampledDensity
from restriction_lab.resources.extension import circle_transform


@pytest.fixture
def arc_length(lab):
    circle = lab.surfaces.sphere(2)
    return SampledDensity.from_grid(circle, lab.surfaces.grid(circle, 4096), 1.0)


def test_bessel_oracle(lab, arc_length):
    rng = np.random.default_rng(0)
    radius = 10.0 * np.sqrt(rng.uniform(0.0, 1.0, 200))
    angle = rng.uniform(0.0, 2.0 * math.pi, 200)
    points = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
    values = lab.extension.extend(arc_length, EvalGrid.scattered(points))
    assert np.max(np.abs(values - circle_transform(points))) <= 1e-6


def test_value_at_origin_is_measure(lab, arc_length):
    value = lab.extension.extend(arc_length, EvalGrid.scattered(np.zeros((1, 2))))[0]
    assert value == pytest.approx(2.0 * math.pi, rel=1e-12)


def test_modulation_translates(lab, arc_length):
    x0 = np.array([0.7, -1.3])
    modulated = arc_length.with_values(np.exp(2j * math.pi * (arc_length.ambient @ x0)))
    grid = EvalGrid.box(3.0, 5, 2)
    shifted = lab.extension.extend(arc_length, grid.translated(x0))
    assert np.allclose(lab.extension.extend(modulated, grid), shifted, atol=1e-10)


def test_extend_is_linear(lab, arc_length):
    angle = np.arctan2(arc_length.ambient[:, 1], arc_length.ambient[:, 0])
    u = arc_length.with_values(np.cos(3.0 * angle) + 0.5j * np.sin(angle))
    v = arc_length.with_values(np.exp(-np.cos(angle) ** 2))
    alpha, beta = 1.5 - 0.5j, -2.0
    grid = EvalGrid.box(3.0, 7, 2)
    combined = lab.extension.extend(arc_length.with_values(alpha * u.values + beta * v.values), grid)
    expected = alpha * lab.extension.extend(u, grid) + beta * lab.extension.extend(v, grid)
    assert np.allclose(combined, expected, rtol=1e-12, atol=1e-12)


def test_l2_norm_grows_with_the_box(lab, arc_length):
    # no L² restriction estimate: doubling the side multiplies ‖(dσ)∨‖_{L²(box)} by about √2
    small = lab.extension.box_norm(arc_length, EvalGrid.box(8.0, 64, 2), 2.0)
    large = lab.extension.box_norm(arc_length, EvalGrid.box(16.0, 128, 2), 2.0)
    assert large / small == pytest.approx(math.sqrt(2.0), rel=0.05)


def test_worker_count_does_not_change_values(arc_length):
    from restriction_lab import LabConfig, RestrictionLab

    grid = EvalGrid.box(4.0, 16, 2)
    serial = RestrictionLab(config=LabConfig(seed=0, workers=1, chunk_size=7)).extension.extend(arc_length, grid)
    threaded = RestrictionLab(config=LabConfig(seed=0, workers=4, chunk_size=7)).extension.extend(arc_length, grid)
    assert np.array_equal(serial, threaded)


def test_aliasing_is_refused(lab):
    circle = lab.surfaces.sphere(2)
    coarse = SampledDensity.from_grid(circle, lab.surfaces.grid(circle, 64), 1.0)
    with pytest.raises(RefinementError):
        lab.extension.extend(coarse, EvalGrid.box(50.0, 4, 2))


def test_dimension_mismatch(lab, arc_length):
    with pytest.raises(DomainError):
        lab.extension.extend(arc_length, EvalGrid.box(1.0, 3, 3))


def test_extension_ratio_skips_zero_density(lab, arc_length):
    family = [("one", arc_length), ("zero", arc_length.with_values(np.zeros(arc_length.size)))]
    report = lab.extension.extension_ratio(family, 6.0, 2.0, EvalGrid.box(2.0, 8, 2))
    assert report.best == "one"
    assert report.skipped == ["zero"]
    assert report.ratio > 0


def test_trial_family_is_seeded(lab):
    circle = lab.surfaces.sphere(2)
    chart = lab.surfaces.grid(circle, 256)
    first = lab.extension.trial_family(circle, chart, seed=3)
    second = lab.extension.trial_family(circle, chart, seed=3)
    assert [name for name, _ in first] == [name for name, _ in second]
    assert all(np.array_equal(a.values, b.values) for (_, a), (_, b) in zip(first, second))


def test_circle_decay(lab):
    circle = lab.surfaces.sphere(2)
    res = lab.extension.resolution_for(circle, 100.5, start=4096)
    density = SampledDensity.from_grid(circle, lab.surfaces.grid(circle, res), 1.0)
    fit = lab.extension.decay_fit(density, (math.cos(0.3), math.sin(0.3)), 10.0, 100.0, samples=32)
    assert fit.slope == pytest.approx(-0.5, abs=0.05)


def test_flat_patch_does_not_decay(lab):
    plane = lab.surfaces.finite_type(2, coefficients={"0,0": 0.0}, half_width=0.05)
    res = lab.extension.resolution_for(plane, 10.5)
    density = SampledDensity.from_grid(plane, lab.surfaces.grid(plane, res), 1.0)
    fit = lab.extension.decay_fit(density, (0.0, 0.0, 1.0), 1.0, 10.0)
    assert fit.slope == pytest.approx(0.0, abs=0.05)


def test_decay_fit_arguments(lab, arc_length):
    with pytest.raises(DomainError):
        lab.extension.decay_fit(arc_length, (1.0, 0.0), 2.0, 3.0, count=5)
    with pytest.raises(DomainError):
        lab.extension.decay_fit(arc_length, (0.0, 0.0), 2.0, 3.0)
    with pytest.raises(DomainError):
        lab.extension.decay_fit(arc_length, (1.0, 0.0), 0.2, 3.0)
