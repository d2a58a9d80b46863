"""
Knapp resource: exponent conditions and anisotropic scaling experiments.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from restriction_lab._numerics import gradient, lp_norm, ordered_map, smooth_step
from restriction_lab.exceptions import PreconditionError
from restriction_lab.models.knapp import (
    Admissibility,
    KnappFit,
    KnappParams,
    KnappSample,
    NecessityStatus,
    NecessityVerdict,
)
from restriction_lab.models.surface import SurfaceDescriptor, SurfaceKind
from restriction_lab.resources.extension import EvalGrid, Extension, SampledDensity, bump
from restriction_lab.resources.surfaces import Surfaces, product_grid

if TYPE_CHECKING:
    from restriction_lab.config import LabConfig


logger = logging.getLogger(__name__)

EXPONENT_RTOL = 1e-12
EPS_GRID: tuple[float, ...] = tuple(2.0**j for j in range(-10, 2))
MIN_LAMBDAS = 4
MOLLIFIER_WIDTH = 0.1


def knapp_cap(points: np.ndarray, lam: float, eps: float, width: float = MOLLIFIER_WIDTH) -> np.ndarray:
    """Smoothed indicator of [0, 1/λ] x [0, 1/λ^ε] in chart coordinates.

    Each edge is mollified over ``width`` times the side length.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.ones(pts.shape[0])
    for j, side in enumerate((1.0 / lam, 1.0 / lam**eps)):
        s = pts[:, j] / side
        out *= smooth_step(s / width) * smooth_step((1.0 - s) / width)
    return out


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= EXPONENT_RTOL * max(1.0, abs(a), abs(b))


class Knapp:
    """Exponent predicates, Knapp exponents and λ-sweeps.

    Example:
        lab.knapp.scale_invariant(2, 6.0, 2.0)        # True
        lab.knapp.necessity_verdict(2, 5.0, 2.0)      # violated, witness ε
    """

    def __init__(self, config: LabConfig, extension: Extension, surfaces: Surfaces) -> None:
        self._config = config
        self._extension = extension
        self._surfaces = surfaces

    # -- exponent conditions -----------------------------------------------

    def admissible_compact(self, n: int, p_prime: float, q: float) -> bool:
        """p'/(n+1) >= q/(n-1) and p' > 2n/(n-1)."""
        if n < 2 or p_prime <= 1 or q < 1:
            return False
        lhs, rhs = p_prime / (n + 1), q / (n - 1)
        return (lhs > rhs or _close(lhs, rhs)) and p_prime > 2.0 * n / (n - 1)

    def scale_invariant(self, n: int, p_prime: float, q: float) -> bool:
        """p'/(n+1) = q/(n-1) within 1e-12 relative, and p' > 2n/(n-1)."""
        if n < 2 or p_prime <= 1 or q < 1:
            return False
        return _close(p_prime / (n + 1), q / (n - 1)) and p_prime > 2.0 * n / (n - 1)

    def admissibility(self, n: int, p_prime: float, q: float,
                      kind: SurfaceKind | str = SurfaceKind.CONE) -> Admissibility:
        known = self._surfaces.known_range(kind, n)
        return Admissibility(
            n=n, p_prime=p_prime, q=q,
            admissible=self.admissible_compact(n, p_prime, q),
            scale_invariant=self.scale_invariant(n, p_prime, q),
            known_range=known,
            in_known_range=None if known is None else p_prime > known,
        )

    # -- Knapp exponents ---------------------------------------------------

    def knapp_exponent(self, kp: KnappParams) -> float:
        """(1 + ε)/q - (1 + k + ε)/p'."""
        return (1.0 + kp.eps) / kp.q - (1.0 + kp.k + kp.eps) / kp.p_prime

    def necessity_verdict(self, k: int, p_prime: float, q: float) -> NecessityVerdict:
        """Check p' >= (k + 1) q; the witness is the ε of the grid with the most negative exponent."""
        if k < 2:
            raise PreconditionError("k must be at least 2")
        violated = p_prime < (k + 1) * q
        sufficient = p_prime > 4 and p_prime >= k + 2 and p_prime >= (k + 1) * q
        verdict = NecessityVerdict(
            k=k, p_prime=p_prime, q=q,
            status=NecessityStatus.VIOLATED if violated else NecessityStatus.CONSISTENT,
            sufficient_range=sufficient,
        )
        if violated:
            exponents = [self.knapp_exponent(KnappParams(k=k, eps=e, p_prime=p_prime, q=q)) for e in EPS_GRID]
            j = int(np.argmin(exponents))
            verdict.witness_eps = EPS_GRID[j]
            verdict.witness_exponent = exponents[j]
            logger.info("p'=%g < (k+1)q=%g: witness eps=%g, exponent %.6g",
                        p_prime, (k + 1) * q, EPS_GRID[j], exponents[j])
        return verdict

    # -- scaling experiments -----------------------------------------------

    def rescaled_surface(self, surface: SurfaceDescriptor, lam: float, eps: float,
                         half_width: float = 0.5) -> SurfaceDescriptor:
        """Graph of λ^k f(η₁/λ, η₂/λ^ε) = a(η₁/λ, η₂/λ^ε) η₁^k."""
        _require_finite_type(surface)
        return SurfaceDescriptor.finite_type(
            surface.k, a_fn=lambda x1, x2: surface.a(x1 / lam, x2 / lam**eps), half_width=half_width,
        )

    def rescaled_deviation(self, surface: SurfaceDescriptor, lam: float, eps: float,
                           radius: float = 1.0, resolution: int = 64) -> float:
        """max |λ^k f(η₁/λ, η₂/λ^ε) - a(0,0) η₁^k| over the square of half-width ``radius``."""
        _require_finite_type(surface)
        axis = np.linspace(-radius, radius, resolution)
        x1, x2 = np.meshgrid(axis, axis, indexing="ij")
        scaled = lam**surface.k * surface.graph(x1 / lam, x2 / lam**eps)
        limit = float(surface.a(np.zeros(1), np.zeros(1))[0]) * x1**surface.k
        return float(np.max(np.abs(scaled - limit)))

    def knapp_slope_fit(
        self,
        surface: SurfaceDescriptor,
        kp: KnappParams,
        lambdas: Sequence[float],
        u: Callable[[np.ndarray], np.ndarray] | None = None,
        box: float = 0.3,
        resolution: int = 8,
        nodes: int = 32,
        support: float = 0.5,
    ) -> KnappFit:
        """Fit the λ-exponent of ‖(u_λ dσ)∨‖_{p'} / ‖u_λ‖_{L^{q'}(dσ)}, u_λ = u(λξ₁, λ^ε ξ₂).

        After the change of variables the ratio is

            λ^{-e} ‖∫ e^{2πi(y₁η₁ + y₂η₂ + y₃ λ^k f(η₁/λ, η₂/λ^ε))} u φ_λ dη‖_{p'} / ‖u φ_λ^{1/q'}‖_{q'}

        with e = knapp_exponent and φ_λ the area element at (η₁/λ, η₂/λ^ε).
        The η grid and the y box are fixed, which is the original-variable
        ratio on the box scaled by (λ, λ^ε, λ^k); the returned ``fitted`` is
        minus the slope of its logarithm.

        Raises:
            PreconditionError: Fewer than four λ, or u vanishes.
            RefinementError: The box is too large for the η grid.
        """
        _require_finite_type(surface)
        if kp.k != surface.k:
            raise PreconditionError(f"Knapp parameters have k={kp.k}, the surface has k={surface.k}")
        if len(lambdas) < MIN_LAMBDAS:
            raise PreconditionError(f"A slope fit needs at least {MIN_LAMBDAS} values of lambda")
        if u is None:
            u = lambda pts: bump(np.linalg.norm(pts, axis=-1) / support)  # noqa: E731
        k, eps = surface.k, kp.eps
        q_prime = math.inf if kp.q == 1 else kp.q / (kp.q - 1)
        h = self._config.fd_step * surface.diameter
        grid = EvalGrid.box(box, resolution, 3)

        def measure(lam: float) -> KnappSample:
            scaled = self.rescaled_surface(surface, lam, eps, support)
            chart = self._surfaces.grid(scaled, nodes)
            _, plain, _ = product_grid(chart.axes, chart.axis_weights, chart.periodic)
            f1, f2 = gradient(surface.graph, chart.points[:, 0] / lam, chart.points[:, 1] / lam**eps, h)
            phi = np.sqrt(1.0 + f1**2 + f2**2)
            values = np.asarray(u(chart.points), dtype=complex)
            density = SampledDensity(scaled, chart.points, values * phi, plain, chart.spacing(scaled))
            inner = self._extension.box_norm(density, grid, kp.p_prime)
            norm_u = float(lp_norm(values, plain * phi, q_prime))
            if norm_u == 0.0 or inner == 0.0:
                raise PreconditionError("Test function vanishes; the slope fit is undefined")
            # back to the original variables
            lhs = lam ** (-1.0 - eps + (1.0 + k + eps) / kp.p_prime) * inner
            rhs = lam ** (-(1.0 + eps) / q_prime) * norm_u
            ratio = lhs / rhs
            return KnappSample(lam=lam, lhs_norm=lhs, ratio=ratio, log_ratio=math.log(ratio))

        samples = ordered_map(measure, [float(v) for v in lambdas], self._config.workers)
        slope = np.polyfit(np.log([s.lam for s in samples]), [s.log_ratio for s in samples], 1)[0]
        predicted = self.knapp_exponent(kp)
        logger.info("Knapp fit k=%d eps=%g: fitted %.4f, predicted %.4f", k, eps, -slope, predicted)
        return KnappFit(k=k, eps=eps, p_prime=kp.p_prime, q=kp.q,
                        predicted=predicted, fitted=float(-slope), samples=samples)


def _require_finite_type(surface: SurfaceDescriptor) -> None:
    if surface.kind is not SurfaceKind.FINITE_TYPE:
        raise PreconditionError("Knapp scaling needs a finite-type surface a(ξ) ξ₁^k")
