"""
Acceptance suite: quantitative oracles for every resource, run as one table.

Each criterion returns an AcceptanceItem; a criterion that raises a
LabError is recorded as failed with the error text. ``full=True`` runs
the full census sizes; the default runs reduced corpora with the same
tolerances.
"""

from __future__ import annotations

import logging
import math
from dataclasses import replace
from typing import TYPE_CHECKING, Callable

import numpy as np

from restriction_lab._compat import canonical_json, model_dump
from restriction_lab.exceptions import LabError
from restriction_lab.models.chain import ChainId, ChainMode
from restriction_lab.models.common import AcceptanceItem
from restriction_lab.models.knapp import KnappParams, NecessityStatus
from restriction_lab.models.lorentz import LorentzParams
from restriction_lab.models.normal_form import NormalFormSurface, OdeSolution
from restriction_lab.models.surface import ExponentPair
from restriction_lab.resources.extension import EvalGrid, SampledDensity, circle_transform
from restriction_lab.resources.knapp import EPS_GRID
from restriction_lab.resources.norms import WeightedSamples

if TYPE_CHECKING:
    from restriction_lab.lab import RestrictionLab


logger = logging.getLogger(__name__)

BESSEL_TOL = 1e-6
SLOPE_TOL = 0.05
ANCHOR_TOL = 1e-12
MINKOWSKI_TOL = 1e-12
INTERCHANGE_BOUND = 10.0
DOUBLING_TOL = 0.2
PARSEVAL_TOL = 1e-8
IDENTITY_TOL = 1e-10
DILATION_TOL = 1e-6
KNAPP_TOL = 0.1
ODE_TOL = 1e-10
CURVATURE_TOL = 1e-6

KNAPP_LAMBDAS = (4.0, 8.0, 16.0, 32.0)
SCALE_INVARIANT = ExponentPair.from_primes(6.0, 2.0)

Criterion = Callable[["RestrictionLab", bool], AcceptanceItem]


def run_acceptance(lab: RestrictionLab, full: bool = False) -> list[AcceptanceItem]:
    """Run every criterion in order."""
    items = []
    for number, (name, criterion) in enumerate(CRITERIA, start=1):
        try:
            item = criterion(lab, full)
        except LabError as e:
            logger.warning("Acceptance criterion %d (%s) raised: %s", number, name, e)
            item = AcceptanceItem(criterion=number, name=name, passed=False, detail=str(e))
        logger.info("Acceptance %d %s: %s", number, name, "pass" if item.passed else "FAIL")
        items.append(item)
    return items


def bessel_oracle(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    circle = lab.surfaces.sphere(2)
    density = SampledDensity.from_grid(circle, lab.surfaces.grid(circle, 4096), 1.0)
    rng = np.random.default_rng([lab.config.seed, 7])
    radius = 10.0 * np.sqrt(rng.uniform(0.0, 1.0, 2000))
    angle = rng.uniform(0.0, 2.0 * math.pi, 2000)
    points = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
    points[0] = 0.0
    values = lab.extension.extend(density, EvalGrid.scattered(points))
    error = float(np.max(np.abs(values - circle_transform(points))))
    return AcceptanceItem(criterion=1, name="bessel_oracle", passed=error <= BESSEL_TOL, value=error,
                          tolerance=BESSEL_TOL, detail="sup |E1 - 2πJ₀(2π|x|)| on |x| <= 10, N = 4096")


def decay_slopes(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    circle = lab.surfaces.sphere(2)
    res = lab.extension.resolution_for(circle, 100.5, start=4096)
    density = SampledDensity.from_grid(circle, lab.surfaces.grid(circle, res), 1.0)
    curved = lab.extension.decay_fit(density, (math.cos(0.3), math.sin(0.3)), 10.0, 100.0, samples=32)

    plane = lab.surfaces.finite_type(2, coefficients={"0,0": 0.0}, half_width=0.05)
    res = lab.extension.resolution_for(plane, 10.5)
    flat_density = SampledDensity.from_grid(plane, lab.surfaces.grid(plane, res), 1.0)
    flat = lab.extension.decay_fit(flat_density, (0.0, 0.0, 1.0), 1.0, 10.0)

    error = max(abs(curved.slope + 0.5), abs(flat.slope))
    return AcceptanceItem(criterion=2, name="decay_slope", passed=error <= SLOPE_TOL, value=error,
                          tolerance=SLOPE_TOL,
                          detail=f"circle slope {curved.slope:.4f}, plane slope {flat.slope:.4f}")


def lorentz_anchor(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    worst = 0.0
    for alpha in (1.2, 2.0, 3.7):
        for i in range(1000):
            rng = np.random.default_rng([lab.config.seed, 8, i])
            size = int(rng.integers(1, 40))
            f = WeightedSamples(rng.standard_normal(size) + 1j * rng.standard_normal(size),
                                rng.uniform(0.1, 2.0, size))
            lorentz = lab.norms.lorentz_norm(f, LorentzParams(alpha=alpha, beta=alpha))
            lebesgue = lab.norms.lebesgue_norm(f, alpha)
            worst = max(worst, abs(lorentz - lebesgue) / lebesgue)
    return AcceptanceItem(criterion=3, name="lorentz_anchor", passed=worst <= ANCHOR_TOL, value=worst,
                          tolerance=ANCHOR_TOL, detail="max relative gap of L^{α,α} and L^α")


def minkowski_links(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    count = 1000 if full else 200
    minkowski = interchange = 0.0
    drift = 0.0
    for p in (4.0 / 3.0, 1.5):
        minkowski = max(minkowski, max(r.ratio for r in lab.norms.census("minkowski", p, count)))
        coarse = max(r.ratio for r in lab.norms.census("interchange", p, count))
        fine = max(r.ratio for r in lab.norms.census("interchange", p, count, shape=(16, 16)))
        interchange = max(interchange, coarse, fine)
        drift = max(drift, abs(fine - coarse) / coarse)
    passed = minkowski <= 1.0 + MINKOWSKI_TOL and interchange <= INTERCHANGE_BOUND and drift <= DOUBLING_TOL
    return AcceptanceItem(criterion=4, name="minkowski_link", passed=passed, value=minkowski,
                          tolerance=1.0 + MINKOWSKI_TOL,
                          detail=f"interchange constant {interchange:.4f}, doubling drift {drift:.3f}")


def parseval(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    rows = lab.norms.census("hausdorff_young", 2.0, 100)
    error = max(abs(r.ratio - 1.0) for r in rows)
    return AcceptanceItem(criterion=5, name="parseval", passed=error <= PARSEVAL_TOL, value=error,
                          tolerance=PARSEVAL_TOL, detail="Hausdorff-Young at p = 2 on 100 densities")


def chain_sandwich(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    slicing = lab.slicing
    count = 100 if full else 20
    c_slice = slicing.slice_constant(ChainId.SPHERE, 2, SCALE_INVARIANT)
    corpus = slicing.chain_corpus(ChainId.SPHERE, 2, count)
    bound, reports = slicing.sandwich(ChainId.SPHERE, SCALE_INVARIANT, c_slice, corpus, ChainMode.WHOLE)
    identity = max(
        (abs(link.ratio - 1.0) for r in reports if not r.trivial for link in r.links if link.identity),
        default=0.0,
    )

    dilation = 0.0
    cone = lab.surfaces.cone(2)
    for name, u in corpus[:3]:
        base = None
        for lam in (1.0, 2.0, 4.0):
            ring = lab.surfaces.cone(2, cone.r0 / lam, cone.r1 / lam)
            scaled = (lambda g, s: lambda xi: g(s * xi))(u, lam)
            report = slicing.verify_chain(ChainId.SPHERE, scaled, SCALE_INVARIANT, c_slice,
                                          box=0.5 * lam, surface=ring, name=name)
            ratios = np.array([link.ratio for link in report.links])
            if base is None:
                base = ratios
            else:
                dilation = max(dilation, float(np.max(np.abs(ratios - base) / np.maximum(base, 1e-300))))

    passed = bool(bound.holds) and identity <= IDENTITY_TOL and dilation <= DILATION_TOL
    return AcceptanceItem(criterion=6, name="chain_sandwich", passed=passed, value=bound.margin,
                          tolerance=1.0,
                          detail=(f"{'full' if full else 'quick'}: {count} densities against {count} calibration "
                                  f"densities; lower {bound.lower_bound:.6g} <= bound {bound.bound:.6g}; "
                                  f"identity gap {identity:.2e}; dilation drift {dilation:.2e}"))


def knapp_necessity(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    knapp = lab.knapp
    census_ok = True
    for k in (2, 3, 4):
        for p_prime in (5.0, 6.0, 8.0):
            for q in (1.0, 2.0):
                verdict = knapp.necessity_verdict(k, p_prime, q)
                negative = min(knapp.knapp_exponent(KnappParams(k=k, eps=e, p_prime=p_prime, q=q))
                               for e in EPS_GRID) < 0
                census_ok &= (verdict.status is NecessityStatus.VIOLATED) == negative

    full_cases = [(k, p, q, e) for k in (2, 3, 4) for p in (5.0, 6.0, 8.0) for q in (1.0, 2.0) for e in (0.5, 1.0)]
    cases = full_cases if full else [(2, 6.0, 2.0, 1.0)]
    worst = 0.0
    for k, p_prime, q, eps in cases:
        surface = lab.surfaces.finite_type(k)
        fit = knapp.knapp_slope_fit(surface, KnappParams(k=k, eps=eps, p_prime=p_prime, q=q), KNAPP_LAMBDAS)
        worst = max(worst, fit.error)
    return AcceptanceItem(criterion=7, name="knapp_necessity", passed=census_ok and worst <= KNAPP_TOL,
                          value=worst, tolerance=KNAPP_TOL,
                          detail=(f"{'full' if full else 'quick'}: {len(cases)} of {len(full_cases)} slope fits; "
                                  f"sign census {'matches' if census_ok else 'differs'}"))


def ode_suite(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    normal_form = lab.normal_form
    t = np.linspace(0.0, 10.0, 100)
    residual = max(
        normal_form.ode_residual(OdeSolution(k=k, sign=sign, A=1.0, B=1.0), t)
        for k in (3, 4, 5, 6) for sign in (1, -1)
    )
    falsified = sum(not v.supports_claim for v in normal_form.ode_sweep(5, 100))
    return AcceptanceItem(criterion=8, name="ode_suite", passed=residual <= ODE_TOL and falsified == 0,
                          value=residual, tolerance=ODE_TOL, detail=f"{falsified} falsifying runs of 100")


def normal_form_suite(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    normal_form = lab.normal_form
    cylinder = normal_form.verify_normal_form(NormalFormSurface(k=3, coefficients={"0,0": 1.0}))
    developable = normal_form.tangent_developable()
    tangent = normal_form.verify_normal_form(developable, k=2, half_width=0.5)

    axis = np.linspace(-0.25, 0.25, 9)
    X1, X2 = np.meshgrid(axis, axis, indexing="ij")
    points = np.stack([X1.ravel(), X2.ravel()], axis=-1)
    flat = normal_form.curvature_residual(developable, points)
    paraboloid = normal_form.curvature_residual(lambda x1, x2: 0.5 * (x1**2 + x2**2), points)

    passed = (cylinder.passed and tangent.passed and flat <= CURVATURE_TOL
              and abs(paraboloid - 1.0) <= CURVATURE_TOL)
    failures = cylinder.failures + tangent.failures
    return AcceptanceItem(criterion=9, name="normal_form", passed=passed, value=flat, tolerance=CURVATURE_TOL,
                          detail=f"paraboloid residual {paraboloid:.6f}; failures: {', '.join(failures) or 'none'}")


def determinism(lab: RestrictionLab, full: bool) -> AcceptanceItem:
    from restriction_lab.lab import RestrictionLab

    def snapshot(workers: int) -> str:
        other = RestrictionLab(config=replace(lab.config, workers=workers))
        slicing = other.slicing
        corpus = slicing.chain_corpus(ChainId.SPHERE, 2, 3)
        bound, reports = slicing.sandwich(ChainId.SPHERE, SCALE_INVARIANT, 1.0, corpus)
        payload = {
            "census": [model_dump(r) for r in other.norms.census("interchange", 1.5, 50)],
            "ode": [model_dump(v) for v in other.normal_form.ode_sweep(4, 10)],
            "chain": [model_dump(r) for r in reports],
            "bound": model_dump(bound),
        }
        return canonical_json(payload)

    first, second, parallel = snapshot(1), snapshot(1), snapshot(max(2, lab.config.workers))
    passed = first == second == parallel
    return AcceptanceItem(criterion=10, name="determinism", passed=passed,
                          detail="repeat and worker-count runs byte-identical" if passed else "outputs differ")


CRITERIA: list[tuple[str, Criterion]] = [
    ("bessel_oracle", bessel_oracle),
    ("decay_slope", decay_slopes),
    ("lorentz_anchor", lorentz_anchor),
    ("minkowski_link", minkowski_links),
    ("parseval", parseval),
    ("chain_sandwich", chain_sandwich),
    ("knapp_necessity", knapp_necessity),
    ("ode_suite", ode_suite),
    ("normal_form", normal_form_suite),
    ("determinism", determinism),
]
