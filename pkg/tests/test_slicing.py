import math

import numpy as np
import pytest

from restriction_lab import (
    ChainId,
    ChainMode,
    DomainError,
    EvalGrid,
    ExponentPair,
    ModeError,
    PreconditionError,
    RefinementError,
    SampledDensity,
    SliceProblem,
    SurfaceKind,
)
from restriction_lab.models.chain import NullCoords
from restriction_lab.resources.slicing import (
    CALIBRATION_STREAM,
    cone_from_null,
    from_null,
    null_measure_weight,
    partition_of_unity,
    to_null,
)


SCALE_INVARIANT = ExponentPair.from_primes(6.0, 2.0)


def test_null_coordinates():
    rng = np.random.default_rng(0)
    xi = rng.standard_normal((10, 3))
    tau = np.linalg.norm(xi, axis=-1)
    coords = to_null(xi, tau)
    back_xi, back_tau = from_null(coords)
    assert np.allclose(back_xi, xi, atol=1e-14)
    assert np.allclose(back_tau, tau, atol=1e-14)
    # on the cone, 2 a_n b = |a'|²
    assert np.allclose(2.0 * coords.a_n * coords.b, np.sum(coords.a_prime**2, axis=-1))
    assert coords.stacked.shape == (10, 4)


def test_null_coordinates_examples():
    forward = to_null(np.array([0.0, 1.0]), np.array(1.0))
    assert forward.a_prime.tolist() == [0.0]
    assert forward.a_n == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert forward.b == pytest.approx(0.0, abs=1e-15)

    side = to_null(np.array([1.0, 0.0]), np.array(1.0))
    assert side.a_prime.tolist() == [1.0]
    assert side.a_n == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    assert side.b == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    assert side.b == pytest.approx(np.sum(side.a_prime**2) / (2.0 * side.a_n), abs=1e-15)


def test_null_coordinates_are_orthogonal_off_the_cone():
    rng = np.random.default_rng(3)
    xi, tau = rng.standard_normal((20, 3)), rng.standard_normal(20)
    eta, sigma = rng.standard_normal((20, 3)), rng.standard_normal(20)
    first, second = to_null(xi, tau), to_null(eta, sigma)
    ambient = np.sum(xi * eta, axis=-1) + tau * sigma
    assert np.allclose(np.sum(first.stacked * second.stacked, axis=-1), ambient, atol=1e-12)
    # τ² - |ξ|² = 2 a_n b - |a'|²
    lorentz = tau**2 - np.sum(xi**2, axis=-1)
    assert np.allclose(2.0 * first.a_n * first.b - np.sum(first.a_prime**2, axis=-1), lorentz, atol=1e-12)


def test_cone_from_null_lies_on_cone():
    a_prime = np.array([[0.3, -0.2], [0.0, 0.5]])
    a_n = np.array([1.2, 1.7])
    xi = cone_from_null(a_prime, a_n)
    b = np.sum(a_prime**2, axis=-1) / (2.0 * a_n)
    _, tau = from_null(NullCoords(a_prime, a_n, b))
    assert np.allclose(np.linalg.norm(xi, axis=-1), tau)


def test_null_measure_weight():
    assert np.allclose(null_measure_weight(np.array([0.5, 2.0])), [2.0, 0.5])
    with pytest.raises(DomainError):
        null_measure_weight(np.array([1.0, 0.0]))


def test_partition_of_unity():
    rng = np.random.default_rng(1)
    points = rng.standard_normal((50, 3))
    chi = partition_of_unity(points, sectors=4)
    assert chi.shape == (4, 50)
    assert np.all(chi >= 0.0)
    assert np.allclose(np.sum(chi, axis=0), 1.0)
    with pytest.raises(PreconditionError):
        partition_of_unity(points, sectors=2, overlap=1.5)


def test_polar_slices_reassemble_extension(lab):
    cone = lab.surfaces.cone(2)
    grid = lab.surfaces.grid(cone, (16, 128))
    u = lambda pts: np.exp(-np.sum((pts - 1.0) ** 2, axis=-1)).astype(complex)  # noqa: E731
    slices = lab.slicing.polar_slices(cone, grid, u)
    assert slices.values.shape == (16, 128)
    assert slices.nonzero == list(range(16))

    points = np.array([[0.0, 0.0, 0.0], [0.1, -0.05, 0.1], [-0.1, 0.1, 0.05]])
    density = SampledDensity.from_grid(cone, grid, u)
    expected = lab.extension.extend(density, EvalGrid.scattered(points))
    assert np.allclose(slices.extend(points), expected, rtol=1e-12, atol=1e-12)


def test_polar_slices_need_cone(lab):
    circle = lab.surfaces.sphere(2)
    with pytest.raises(DomainError):
        lab.slicing.polar_slices(circle, lab.surfaces.grid(circle, 16), np.ones(16))


def test_slice_surfaces(lab):
    assert lab.slicing.slice_surface(ChainId.SPHERE, 2).kind is SurfaceKind.SPHERE
    assert lab.slicing.slice_surface(ChainId.PARAB, 2).kind is SurfaceKind.PARABOLOID
    hyperboloid = lab.slicing.slice_surface("hyperb", 3)
    assert hyperboloid.kind is SurfaceKind.HYPERBOLOID and hyperboloid.n == 3
    with pytest.raises(DomainError):
        lab.slicing.slice_surface(ChainId.FINITE_TYPE)


def test_has_type(lab):
    assert lab.slicing.has_type(lambda t: t**3, 3, 1.0)
    assert not lab.slicing.has_type(lambda t: t**3, 2, 1.0)
    assert lab.slicing.has_type(lambda t: t**2 + t**5, 2, 1.0)


def test_slice_oracle_preconditions(lab):
    sp = SliceProblem(psi=lambda t: t**3, k=3, a=0.5, delta=0.5, p_prime=8.0, q=2.0)
    with pytest.raises(PreconditionError):
        lab.slicing.slice_oracle(sp)
    coarse = SliceProblem(psi=lambda t: t**3, k=3, a=1.0, delta=0.5, p_prime=8.0, q=2.0, box=8.0, nodes=8)
    with pytest.raises(RefinementError):
        lab.slicing.slice_oracle(coarse)


def test_slice_oracle(lab):
    sp = SliceProblem(psi=lambda t: t**3, k=3, a=1.0, delta=0.5, p_prime=8.0, q=2.0,
                      box=2.0, resolution=8, nodes=64, count=2)
    verdict = lab.slicing.slice_oracle(sp, sweep=lab.slicing.phase_family([0.5, 1.0]))
    assert verdict.admissible
    assert verdict.type_ok
    assert verdict.constant > 0
    assert set(verdict.sweep) == {"s=0.5", "s=1"}
    assert verdict.sweep_spread >= 1.0


def test_chain_modes(lab):
    u = lambda pts: np.ones(len(pts), dtype=complex)  # noqa: E731
    with pytest.raises(ModeError):
        lab.slicing.verify_chain(ChainId.FINITE_TYPE, u, ExponentPair.from_primes(8.0, 2.0), 1.0,
                                 mode=ChainMode.WHOLE)
    with pytest.raises(ModeError):
        lab.slicing.verify_chain(ChainId.SPHERE, u, ExponentPair.from_primes(8.0, 2.0), 1.0,
                                 mode=ChainMode.WHOLE)
    with pytest.raises(PreconditionError):
        lab.slicing.verify_chain(ChainId.SPHERE, u, ExponentPair.from_primes(5.0, 2.0), 1.0,
                                 mode=ChainMode.COMPACT)


def test_chain_corpus_is_seeded(lab):
    first = lab.slicing.chain_corpus(ChainId.SPHERE, 2, 4)
    second = lab.slicing.chain_corpus(ChainId.SPHERE, 2, 4)
    points = np.array([[1.0, 0.2], [-0.4, 1.1]])
    assert [name for name, _ in first] == ["u0", "u1", "u2", "u3"]
    for (_, a), (_, b) in zip(first, second):
        assert np.array_equal(a(points), b(points))


def test_chain_corpus_streams_are_disjoint(lab):
    check = lab.slicing.chain_corpus(ChainId.SPHERE, 2, 3)
    calibration = lab.slicing.chain_corpus(ChainId.SPHERE, 2, 3, stream=CALIBRATION_STREAM)
    assert [name for name, _ in calibration] == ["cal0", "cal1", "cal2"]
    points = np.array([[1.0, 0.2], [-0.4, 1.1], [0.3, -1.2]])
    for (_, a), (_, b) in zip(check, calibration):
        assert not np.allclose(a(points), b(points))


def test_zero_density_gives_trivial_report(lab):
    zero = lambda pts: np.zeros(len(pts), dtype=complex)  # noqa: E731
    report = lab.slicing.verify_chain(ChainId.SPHERE, zero, SCALE_INVARIANT, 1.0, name="zero")
    assert report.trivial
    assert report.ok
    assert report.u_norm == 0.0
    assert all(link.lhs == 0.0 and link.rhs == 0.0 and link.ratio == 0.0 for link in report.links)


def test_rank_one_density_interchanges_exactly(lab):
    # on a ≡ 1 the slices H(x, ξ₂) = ρ(ξ₂) Φ(x) factor, so the interchange step is an equality
    def u(pts):
        t, s = pts[:, 0], pts[:, 1]
        return (1.0 + 0.5 * s) * np.exp(-4.0 * t**2) * (1.0 + 0.3j * t)

    pair = ExponentPair.from_primes(8.0, 2.0)
    report = lab.slicing.verify_chain(ChainId.FINITE_TYPE, u, pair, 1.0, mode=ChainMode.COMPACT)
    assert report.link("minkowski").ratio == pytest.approx(1.0, abs=1e-10)


def test_sphere_chain_identities(lab):
    name, u = lab.slicing.chain_corpus(ChainId.SPHERE, 2, 1)[0]
    report = lab.slicing.verify_chain(ChainId.SPHERE, u, SCALE_INVARIANT, 1.0, name=name)
    assert not report.trivial
    assert [link.name for link in report.links] == [
        "hausdorff_young", "interchange", "slice_restriction", "regrouping",
        "embedding", "holder", "measure_identity",
    ]
    for link in report.links:
        if link.identity:
            assert link.ratio == pytest.approx(1.0, abs=1e-10)
    embedding = report.link("embedding")
    assert embedding.ratio <= embedding.nominal * (1.0 + 1e-12)


def test_transfer_needs_reports(lab):
    with pytest.raises(PreconditionError):
        lab.slicing.transfer_constant(1.0, SCALE_INVARIANT, ChainId.SPHERE, [])


@pytest.mark.slow
def test_sphere_sandwich(lab):
    c_slice = lab.slicing.slice_constant(ChainId.SPHERE, 2, SCALE_INVARIANT)
    assert c_slice > 0
    corpus = lab.slicing.chain_corpus(ChainId.SPHERE, 2, 5)
    bound, reports = lab.slicing.sandwich(ChainId.SPHERE, SCALE_INVARIANT, c_slice, corpus)
    assert len(reports) == 5
    assert bound.holds
    assert bound.bound == pytest.approx(
        c_slice * math.prod(bound.link_constants.values()), rel=1e-12)


@pytest.mark.slow
def test_finite_type_chain_compact(lab):
    pair = ExponentPair.from_primes(8.0, 2.0)
    corpus = lab.slicing.chain_corpus(ChainId.FINITE_TYPE, 2, 3)
    c_slice = lab.slicing.slice_constant(ChainId.FINITE_TYPE, 2, pair)
    bound, reports = lab.slicing.sandwich(ChainId.FINITE_TYPE, pair, c_slice, corpus, ChainMode.COMPACT)
    assert [link.name for link in reports[0].links] == [
        "hausdorff_young", "minkowski", "slice_restriction", "holder_lp", "density_weight",
    ]
    assert bound.holds


@pytest.mark.slow
def test_under_calibrated_link_breaks_sandwich(lab):
    corpus = lab.slicing.chain_corpus(ChainId.SPHERE, 2, 1)
    reports = lab.slicing.calibrate(ChainId.SPHERE, SCALE_INVARIANT, 1.0, corpus)

    def shrink(link):
        if link.name != "interchange":
            return link
        return link.model_copy(update={"ratio": 1e-3 * link.ratio})

    weak = [report.model_copy(update={"links": [shrink(link) for link in report.links]}) for report in reports]
    bound, checked = lab.slicing.sandwich(ChainId.SPHERE, SCALE_INVARIANT, 1.0, corpus, calibration=weak)
    assert [report.density for report in checked] == ["u0"]
    assert bound.link_constants["interchange"] == pytest.approx(1e-3 * reports[0].link("interchange").ratio)
    assert bound.lower_bound > 0
    assert bound.holds is False
