"""
Extension resource: direct-sum evaluation of (u dσ)∨ on a physical grid.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

import numpy as np
from scipy import special

from restriction_lab._numerics import box_grid, lp_norm, ordered_map
from restriction_lab.exceptions import DomainError, RefinementError
from restriction_lab.models.common import DecayFit, ExtensionRatioReport
from restriction_lab.models.surface import SurfaceDescriptor, SurfaceKind

from restriction_lab.resources.surfaces import ChartGrid, Surfaces

if TYPE_CHECKING:
    from restriction_lab.config import LabConfig


logger = logging.getLogger(__name__)

ZERO_DENSITY = 1e-14
# cap on (eval points x surface nodes) per chunk
CHUNK_CELLS = 4_000_000
MIN_DECAY_RADII = 20

Density = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SampledDensity:
    """A density u sampled on a quadrature grid of a surface patch.

    Attributes:
        surface: Surface the samples live on.
        points: Chart points (M, chart_dim).
        values: Complex samples of u (M,).
        weights: Quadrature weights including the measure weight (M,).
        spacing: Largest neighbour distance on the embedded surface.
    """

    surface: SurfaceDescriptor
    points: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    spacing: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex).ravel()
        if values.shape[0] != self.points.shape[0] or self.weights.shape != values.shape:
            raise DomainError("points, values and weights must have matching lengths")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_grid(cls, surface: SurfaceDescriptor, grid: ChartGrid, u: Density | np.ndarray | complex) -> SampledDensity:
        """Sample ``u`` (a callable of chart points, an array or a constant) on ``grid``."""
        if callable(u):
            values = np.asarray(u(grid.points), dtype=complex)
        else:
            values = np.broadcast_to(np.asarray(u, dtype=complex), (grid.size,))
        return cls(surface, grid.points, values, grid.weights, grid.spacing(surface))

    @property
    def ambient(self) -> np.ndarray:
        return self.surface.embed(self.points)

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def with_values(self, values: np.ndarray) -> SampledDensity:
        return replace(self, values=np.asarray(values, dtype=complex))

    def norm(self, q_prime: float) -> float:
        """‖u‖_{L^{q'}(dσ)}."""
        return float(lp_norm(self.values, self.weights, q_prime))

    def dilated(self, lam: float) -> SampledDensity:
        """u(λ ·) on the cone, sampled on the grid dilated by 1/λ.

        Raises:
            DomainError: The surface is not dilation invariant.
        """
        if self.surface.kind is not SurfaceKind.CONE:
            raise DomainError("Only the cone is invariant under dilations")
        n = self.surface.n
        surface = self.surface.model_copy(update={
            "r0": self.surface.r0 / lam, "r1": self.surface.r1 / lam,
            "lower": [v / lam for v in self.surface.lower],
            "upper": [v / lam for v in self.surface.upper],
        })
        # dξ/|ξ| is homogeneous of degree n - 1
        return SampledDensity(surface, self.points / lam, self.values,
                              self.weights * lam ** (1 - n), self.spacing / lam)


@dataclass(frozen=True)
class EvalGrid:
    """Physical evaluation points with cell volumes.

    Attributes:
        points: Points (M, ambient_dim).
        volumes: Cell volumes (M,).
        shape: Grid shape, or (M,) for scattered points.
        half_width: Half width of the box, 0 for scattered points.
    """

    points: np.ndarray
    volumes: np.ndarray
    shape: tuple[int, ...]
    half_width: float = 0.0

    @classmethod
    def box(cls, half_width: float, resolution: int | Sequence[int], dim: int,
            center: Sequence[float] | None = None) -> EvalGrid:
        points, volumes, shape = box_grid(half_width, resolution, dim, center)
        return cls(points, volumes, shape, float(half_width))

    @classmethod
    def scattered(cls, points: np.ndarray) -> EvalGrid:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(pts, np.ones(pts.shape[0]), (pts.shape[0],))

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def max_radius(self) -> float:
        return float(np.max(np.linalg.norm(self.points, axis=-1))) if self.size else 0.0

    def scaled(self, lam: float) -> EvalGrid:
        return EvalGrid(self.points * lam, self.volumes * lam ** self.points.shape[1],
                        self.shape, self.half_width * lam)

    def translated(self, offset: Sequence[float]) -> EvalGrid:
        return replace(self, points=self.points + np.asarray(offset, dtype=float))


def circle_transform(points: np.ndarray) -> np.ndarray:
    """(dσ)∨ of the unit circle: 2π J₀(2π|x|)."""
    r = np.linalg.norm(np.atleast_2d(np.asarray(points, dtype=float)), axis=-1)
    return 2.0 * math.pi * special.j0(2.0 * math.pi * r)


def bump(rho: np.ndarray) -> np.ndarray:
    """Smooth bump exp(1 - 1/(1 - ρ²)) supported in ρ < 1, equal to 1 at 0."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros(rho.shape)
    inside = rho < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - rho[inside] ** 2))
    return out


class Extension:
    """Extension operator (u dσ)∨(x) = ∫ e^{2πi⟨x, P(ξ)⟩} u(ξ) dσ(ξ).

    Every output value is a dot product over the surface nodes in a fixed
    order, so results are bit-identical for any worker count.

    Example:
        circle = lab.surfaces.sphere(n=2)
        density = SampledDensity.from_grid(circle, lab.surfaces.grid(circle, 4096), 1.0)
        values = lab.extension.extend(density, EvalGrid.box(5.0, 64, 2))
    """

    def __init__(self, config: LabConfig) -> None:
        self._config = config

    def check_resolution(self, density: SampledDensity, grid: EvalGrid) -> None:
        """Anti-aliasing rule: spacing · max|x| · 2π must stay below alias_bound.

        Raises:
            RefinementError: The surface grid is too coarse for the box.
        """
        phase_step = 2.0 * math.pi * density.spacing * grid.max_radius
        if phase_step > self._config.alias_bound:
            needed = self._config.alias_bound / (2.0 * math.pi * grid.max_radius)
            raise RefinementError(
                f"Surface spacing {density.spacing:.3g} too coarse for |x| <= {grid.max_radius:.3g}",
                hint=f"Refine the surface grid to spacing <= {needed:.3g}",
            )

    def extend(self, density: SampledDensity, grid: EvalGrid) -> np.ndarray:
        """Evaluate (u dσ)∨ at every grid point.

        Raises:
            DomainError: Empty evaluation grid or dimension mismatch.
            RefinementError: Anti-aliasing rule violated.
        """
        if grid.size == 0:
            raise DomainError("Evaluation grid is empty")
        nodes = density.ambient
        if grid.points.shape[1] != nodes.shape[1]:
            raise DomainError(f"Grid has dimension {grid.points.shape[1]}, surface lives in R^{nodes.shape[1]}")
        self.check_resolution(density, grid)

        mass = density.values * density.weights
        chunk = max(1, min(self._config.chunk_size, CHUNK_CELLS // max(1, density.size)))
        starts = range(0, grid.size, chunk)

        def run(start: int) -> np.ndarray:
            phase = (2.0 * math.pi) * (grid.points[start:start + chunk] @ nodes.T)
            return np.exp(1j * phase) @ mass

        return np.concatenate(ordered_map(run, starts, self._config.workers))

    def box_norm(self, density: SampledDensity, grid: EvalGrid, p_prime: float) -> float:
        """‖(u dσ)∨‖_{L^{p'}} over the cells of ``grid``."""
        return float(lp_norm(self.extend(density, grid), grid.volumes, p_prime))

    def extension_ratio(
        self,
        family: Iterable[tuple[str, SampledDensity]],
        p_prime: float,
        q_prime: float,
        grid: EvalGrid,
    ) -> ExtensionRatioReport:
        """Largest ‖(u dσ)∨‖_{L^{p'}(box)} / ‖u‖_{L^{q'}(dσ)} over a trial family."""
        ratios: dict[str, float] = {}
        skipped: list[str] = []
        for name, density in family:
            denominator = density.norm(q_prime)
            if denominator < ZERO_DENSITY:
                logger.warning("Skipping trial density %s: norm %.3g", name, denominator)
                skipped.append(name)
                continue
            ratios[name] = self.box_norm(density, grid, p_prime) / denominator
        best = max(ratios, key=ratios.__getitem__) if ratios else ""
        logger.debug("Extension ratio %.6g attained by %s over %d densities", ratios.get(best, 0.0), best, len(ratios))
        return ExtensionRatioReport(
            p_prime=p_prime, q_prime=q_prime, box=grid.half_width,
            ratio=ratios.get(best, 0.0), best=best, ratios=ratios, skipped=skipped,
        )

    def trial_family(
        self,
        surface: SurfaceDescriptor,
        grid: ChartGrid,
        box: float = 1.0,
        caps: int = 5,
        bumps: int = 20,
        modulations: int = 10,
        seed: int | None = None,
    ) -> list[tuple[str, SampledDensity]]:
        """Seeded trial densities: nested caps, random bumps and modulated caps.

        Caps are centred at the first grid node with radii halving from half
        the surface diameter. Modulated caps carry e^{2πi⟨x₀, P(ξ)⟩} with x₀
        drawn from the box, which translates the extension by x₀.
        """
        seed = self._config.seed if seed is None else seed
        base = SampledDensity.from_grid(surface, grid, 1.0)
        emb = base.ambient
        scale = float(np.max(np.ptp(emb, axis=0)))
        family: list[tuple[str, SampledDensity]] = []

        def cap(center: np.ndarray, radius: float) -> np.ndarray:
            return bump(np.linalg.norm(emb - center, axis=-1) / radius).astype(complex)

        for j in range(caps):
            family.append((f"cap{j}", base.with_values(cap(emb[0], 0.5 * scale / 2**j))))
        for j in range(bumps):
            rng = np.random.default_rng([seed, 1, j])
            center = emb[rng.integers(grid.size)]
            radius = scale * rng.uniform(0.1, 0.5)
            amplitude = rng.normal() + 1j * rng.normal()
            family.append((f"bump{j}", base.with_values(amplitude * cap(center, radius))))
        for j in range(modulations):
            rng = np.random.default_rng([seed, 2, j])
            center = emb[rng.integers(grid.size)]
            x0 = rng.uniform(-box, box, size=emb.shape[1])
            wave = np.exp(2j * math.pi * (emb @ x0))
            family.append((f"mod{j}", base.with_values(wave * cap(center, 0.25 * scale))))
        return family

    def decay_fit(
        self,
        density: SampledDensity,
        direction: Sequence[float],
        r_min: float,
        r_max: float,
        count: int = 24,
        window: float = 1.0,
        samples: int = 8,
    ) -> DecayFit:
        """Fit log max|(u dσ)∨| against log R along a ray.

        The envelope at R is the maximum over ``samples`` points of the
        radial window [R - window/2, R + window/2].

        Raises:
            DomainError: Fewer than 20 radii, a zero direction, or r_min <= window/2.
        """
        if count < MIN_DECAY_RADII:
            raise DomainError(f"Decay fits need at least {MIN_DECAY_RADII} radii")
        omega = np.asarray(direction, dtype=float)
        norm = float(np.linalg.norm(omega))
        if norm == 0.0:
            raise DomainError("Direction must be nonzero")
        if r_min <= 0.5 * window or r_max <= r_min:
            raise DomainError("Radii must satisfy window/2 < r_min < r_max")
        omega = omega / norm
        radii = np.geomspace(r_min, r_max, count)
        offsets = np.linspace(-0.5 * window, 0.5 * window, samples)
        points = (radii[:, None] + offsets[None, :]).ravel()[:, None] * omega[None, :]
        values = np.abs(self.extend(density, EvalGrid.scattered(points))).reshape(count, samples)
        envelope = np.max(values, axis=1)
        if np.any(envelope <= 0.0):
            raise DomainError("Extension vanishes identically on a window")
        slope, intercept = np.polyfit(np.log(radii), np.log(envelope), 1)
        logger.debug("Decay slope %.4f along %s", slope, omega.tolist())
        return DecayFit(slope=float(slope), intercept=float(intercept), direction=omega.tolist(),
                        radii=radii.tolist(), envelope=envelope.tolist())

    def resolution_for(self, surface: SurfaceDescriptor, max_radius: float, start: int = 64) -> int:
        """Smallest doubling of ``start`` whose grid passes the anti-aliasing rule."""
        limit = 1 << 16 if surface.chart_dim == 1 else 1 << 10
        surfaces = Surfaces(self._config)
        res = start
        while res <= limit:
            if 2.0 * math.pi * surfaces.grid(surface, res).spacing(surface) * max_radius <= self._config.alias_bound:
                return res
            res *= 2
        raise RefinementError(f"No grid up to resolution {limit} resolves |x| <= {max_radius:.3g}")
