import math

import numpy as np
import pytest

from restriction_lab import ConfigurationError, DomainError, SingularPointError, SurfaceKind


def test_grid_measures(lab):
    surfaces = lab.surfaces
    circle = surfaces.grid(surfaces.sphere(2), 64)
    assert circle.size == 64
    assert np.sum(circle.weights) == pytest.approx(2.0 * math.pi, rel=1e-12)

    sphere = surfaces.grid(surfaces.sphere(3), 32)
    assert np.sum(sphere.weights) == pytest.approx(4.0 * math.pi, rel=1e-10)

    parabola = surfaces.grid(surfaces.paraboloid(2), 16)
    assert np.sum(parabola.weights) == pytest.approx(2.0, rel=1e-12)

    cone = surfaces.cone(2, 0.5, 2.0)
    # dξ/|ξ| = dr dω in the plane
    assert np.sum(surfaces.grid(cone, (32, 64)).weights) == pytest.approx(1.5 * 2.0 * math.pi, rel=1e-12)


def test_measure_weights(lab):
    surfaces = lab.surfaces
    assert surfaces.measure_weight(surfaces.paraboloid(2), [0.3]) == 1.0
    assert surfaces.measure_weight(surfaces.hyperboloid(2), [0.5]) == pytest.approx(1.0 / math.sqrt(1.25))
    assert surfaces.measure_weight(surfaces.cone(2), [1.0, 0.0]) == pytest.approx(1.0)
    assert surfaces.measure_weight(surfaces.sphere(2), [1.0]) == pytest.approx(1.0)
    # flat finite-type patch has unit area element
    plane = surfaces.finite_type(2, coefficients={"0,0": 0.0})
    assert surfaces.measure_weight(plane, [0.1, 0.2]) == pytest.approx(1.0)


def test_measure_weight_errors(lab):
    surfaces = lab.surfaces
    with pytest.raises(SingularPointError):
        surfaces.measure_weight(surfaces.cone(2), [0.0, 0.0])
    with pytest.raises(DomainError):
        surfaces.measure_weight(surfaces.paraboloid(2), [3.0])
    with pytest.raises(DomainError):
        surfaces.measure_weight(surfaces.paraboloid(2), [0.1, 0.1])


def test_gaussian_curvature(lab):
    f = lambda x1, x2: 0.5 * (x1**2 + x2**2)  # noqa: E731
    assert lab.surfaces.gaussian_curvature(f, [0.0, 0.0]) == pytest.approx(1.0, abs=1e-6)
    assert lab.surfaces.gaussian_curvature(f, [0.3, 0.0]) == pytest.approx(1.0 / 1.09**2, abs=1e-6)
    cylinder = lambda x1, x2: x1**2 + 0.0 * x2  # noqa: E731
    assert lab.surfaces.gaussian_curvature(cylinder, [0.2, 0.1]) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("k", [2, 3])
def test_contact_order(lab, k):
    surface = lab.surfaces.finite_type(k)
    order = lab.surfaces.contact_order(surface.graph, diameter=surface.diameter)
    assert order.exact
    assert order.order == k


def test_contact_order_of_plane(lab):
    order = lab.surfaces.contact_order(lambda x1, x2: 0.0 * x1 + 0.0 * x2, max_k=6)
    assert not order.exact
    assert order.order == 6


def test_known_range(lab):
    assert lab.surfaces.known_range(SurfaceKind.CONE, 2) == pytest.approx(10.0 / 3.0)
    assert lab.surfaces.known_range("sphere", 3) == pytest.approx(10.0 / 3.0)
    assert lab.surfaces.known_range(SurfaceKind.HYPERBOLOID, 2) is None


def test_from_config(lab):
    surface = lab.surfaces.from_config({
        "surface.kind": "finitetype",
        "surface.k": 3,
        "surface.a_0_0": 2.0,
        "surface.a_0_1": "0.5",
    })
    assert surface.kind is SurfaceKind.FINITE_TYPE
    assert surface.k == 3
    assert surface.coefficients == {"0,0": 2.0, "0,1": 0.5}
    assert float(surface.graph(np.array(0.5), np.array(0.0))) == pytest.approx(0.25)

    cone = lab.surfaces.from_config({"kind": "cone", "r0": 1.0, "r1": 3.0}, section="unused")
    assert (cone.r0, cone.r1) == (1.0, 3.0)


@pytest.mark.parametrize("data", [
    {"surface.kind": "torus"},
    {"surface.kind": "finitetype", "surface.a_1": 1.0},
    {"surface.kind": "finitetype", "surface.a_x_0": 1.0},
    {"surface.kind": "cone", "surface.r0": 2.0, "surface.r1": 1.0},
])
def test_from_config_errors(lab, data):
    with pytest.raises(ConfigurationError):
        lab.surfaces.from_config(data)
