"""
Surfaces resource: measures, charts and differential-geometric probes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Sequence

import numpy as np
from pydantic import ValidationError

from restriction_lab._compat import model_validate
from restriction_lab._numerics import (
    GraphFn,
    fan,
    gauss_legendre,
    gradient,
    hessian,
    periodic_nodes,
    taylor_coefficients,
)
from restriction_lab.exceptions import ConfigurationError, DomainError, SingularPointError
from restriction_lab.models.surface import (
    ContactOrder,
    MeasureWeight,
    SurfaceDescriptor,
    SurfaceKind,
    sphere_embed,
    sphere_jacobian,
)

if TYPE_CHECKING:
    from restriction_lab.config import LabConfig


logger = logging.getLogger(__name__)

# threshold on probed Taylor coefficients, relative to the probe scale
CONTACT_REL_TOL = 1e-7
FAN_SIZE = 32

# p' thresholds of the ranges quoted as known, as functions of n
_KNOWN_RANGE: dict[SurfaceKind, Callable[[int], float]] = {
    SurfaceKind.CONE: lambda n: 2.0 * (n + 3) / (n + 1),
    SurfaceKind.SPHERE: lambda n: 2.0 * (n + 2) / n,
    SurfaceKind.PARABOLOID: lambda n: 2.0 * (n + 2) / n,
}


@dataclass(frozen=True)
class ChartGrid:
    """Product quadrature grid on a chart.

    Attributes:
        points: Chart points (M, chart_dim), C order over ``shape``.
        weights: Quadrature weights with the measure weight folded in (M,).
        axes: Nodes per axis.
        axis_weights: Plain quadrature weights per axis.
        periodic: Whether each axis wraps around.
        shape: Grid shape.
    """

    points: np.ndarray
    weights: np.ndarray
    axes: tuple[np.ndarray, ...]
    axis_weights: tuple[np.ndarray, ...]
    periodic: tuple[bool, ...]
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def spacing(self, surface: SurfaceDescriptor) -> float:
        """Largest distance between grid neighbours on the embedded surface."""
        emb = surface.embed(self.points).reshape(self.shape + (-1,))
        h = 0.0
        for axis, wraps in enumerate(self.periodic):
            if self.shape[axis] < 2:
                continue
            step = np.diff(emb, axis=axis)
            h = max(h, float(np.max(np.linalg.norm(step, axis=-1))))
            if wraps:
                first = np.take(emb, 0, axis=axis)
                last = np.take(emb, -1, axis=axis)
                h = max(h, float(np.max(np.linalg.norm(first - last, axis=-1))))
        return h


def product_grid(
    axes: Sequence[np.ndarray],
    axis_weights: Sequence[np.ndarray],
    periodic: Sequence[bool],
) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    """Points and product weights of a tensor grid (C order)."""
    mesh = np.meshgrid(*axes, indexing="ij")
    wmesh = np.meshgrid(*axis_weights, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)
    return points, weights, tuple(len(a) for a in axes)


def midpoint_nodes(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform midpoint nodes on [a, b]."""
    step = (b - a) / n
    return a + step * (np.arange(n) + 0.5), np.full(n, step)


def sphere_axes(n: int, resolution: int) -> tuple[list[np.ndarray], list[np.ndarray], list[bool]]:
    """Angular axes of S^{n-1}: Gauss-Legendre on [0, π], periodic last angle."""
    axes, weights, periodic = [], [], []
    for _ in range(n - 2):
        x, w = gauss_legendre(0.0, math.pi, max(2, resolution // 2))
        axes.append(x)
        weights.append(w)
        periodic.append(False)
    x, w = periodic_nodes(resolution)
    axes.append(x)
    weights.append(w)
    periodic.append(True)
    return axes, weights, periodic


class Surfaces:
    """Surface definitions, measure weights and geometric probes.

    Example:
        cone = lab.surfaces.cone(n=2)
        lab.surfaces.measure_weight(cone, [2.0, 0.0])   # 0.5

        K = lab.surfaces.gaussian_curvature(lambda x, y: 0.5 * (x**2 + y**2), [0, 0])
    """

    def __init__(self, config: LabConfig) -> None:
        self._config = config

    # -- construction ------------------------------------------------------

    def sphere(self, n: int = 2) -> SurfaceDescriptor:
        return SurfaceDescriptor.sphere(n)

    def paraboloid(self, n: int = 2, half_width: float = 1.0) -> SurfaceDescriptor:
        return SurfaceDescriptor.paraboloid(n, half_width)

    def hyperboloid(self, n: int = 2, half_width: float = 1.0) -> SurfaceDescriptor:
        return SurfaceDescriptor.hyperboloid(n, half_width)

    def cone(self, n: int = 2, r0: float = 0.5, r1: float = 2.0) -> SurfaceDescriptor:
        return SurfaceDescriptor.cone(n, r0, r1)

    def finite_type(self, k: int, coefficients: dict[str, float] | None = None,
                    a_fn: GraphFn | None = None, half_width: float = 0.5) -> SurfaceDescriptor:
        return SurfaceDescriptor.finite_type(k, coefficients, a_fn, half_width)

    def from_config(self, data: dict[str, Any], section: str = "surface") -> SurfaceDescriptor:
        """Build a descriptor from parsed key-value data.

        Keys (optionally under ``[surface]``): ``kind``, ``n``, ``patch``
        (half-width, or ``lo, hi`` for every axis), ``lower``/``upper``
        (per-axis lists), ``r0``, ``r1``, ``k`` and ``a_i_j`` for the
        coefficient of ξ₁^i ξ₂^j in a.

        Raises:
            ConfigurationError: Unknown kind, malformed coefficients or
                a patch violating the descriptor invariants.
        """
        prefix = f"{section}."
        entries = {key[len(prefix):] if key.startswith(prefix) else key: value
                   for key, value in data.items()}
        kind = str(entries.get("kind", "")).strip()
        if kind not in {k.value for k in SurfaceKind}:
            raise ConfigurationError(
                f"Unknown surface kind '{kind}'",
                hint=", ".join(k.value for k in SurfaceKind),
                key=prefix + "kind",
            )

        n = int(entries.get("n", 3 if kind == SurfaceKind.FINITE_TYPE.value else 2))
        coefficients = {}
        for key, value in entries.items():
            if key.startswith("a_"):
                parts = key.split("_")
                if len(parts) != 3:
                    raise ConfigurationError("Coefficient keys read a_i_j", key=prefix + key)
                try:
                    coefficients[f"{int(parts[1])},{int(parts[2])}"] = float(value)
                except ValueError:
                    raise ConfigurationError("Malformed coefficient", key=prefix + key)

        payload: dict[str, Any] = {"kind": kind, "n": n}
        for key in ("r0", "r1", "k"):
            if key in entries:
                payload[key] = entries[key]
        if coefficients:
            payload["coefficients"] = coefficients
        if kind == SurfaceKind.FINITE_TYPE.value and not coefficients:
            payload["coefficients"] = {"0,0": 1.0}

        defaults = {
            SurfaceKind.SPHERE.value: lambda: SurfaceDescriptor.sphere(n),
            SurfaceKind.PARABOLOID.value: lambda: SurfaceDescriptor.paraboloid(n),
            SurfaceKind.HYPERBOLOID.value: lambda: SurfaceDescriptor.hyperboloid(n),
            SurfaceKind.CONE.value: lambda: SurfaceDescriptor.cone(
                n, float(entries.get("r0", 0.5)), float(entries.get("r1", 2.0))),
            SurfaceKind.FINITE_TYPE.value: lambda: SurfaceDescriptor.finite_type(int(entries.get("k", 2))),
        }
        try:
            template = defaults[kind]()
            dim = template.chart_dim
            lower, upper = template.lower, template.upper
            if "patch" in entries:
                lower, upper = _patch_bounds(entries["patch"], dim)
            if "lower" in entries:
                lower = _float_list(entries["lower"], dim)
            if "upper" in entries:
                upper = _float_list(entries["upper"], dim)
            payload["lower"], payload["upper"] = lower, upper
            return model_validate(SurfaceDescriptor, payload)
        except (ValidationError, ValueError) as e:
            raise ConfigurationError(f"Invalid surface: {e}", key=prefix.rstrip("."))

    # -- measures ----------------------------------------------------------

    def weight(self, surface: SurfaceDescriptor) -> MeasureWeight:
        return MeasureWeight(surface=surface)

    def measure_weight(self, surface: SurfaceDescriptor, chart_pt: Sequence[float]) -> float:
        """Density of dσ in the chart at one point.

        Raises:
            SingularPointError: Cone chart at ξ = 0.
            DomainError: Point outside the patch.
        """
        pt = np.asarray(chart_pt, dtype=float)
        if pt.shape != (surface.chart_dim,):
            raise DomainError(f"Chart point must have {surface.chart_dim} coordinates")
        if surface.kind is SurfaceKind.CONE and np.linalg.norm(pt) == 0.0:
            raise SingularPointError("Cone chart evaluated at the vertex")
        if not surface.in_patch(pt)[0]:
            raise DomainError(f"Point {pt.tolist()} outside the {surface.kind.value} patch")
        return float(MeasureWeight(surface=surface)(pt)[0])

    def grid(self, surface: SurfaceDescriptor, resolution: int | Sequence[int] = 64) -> ChartGrid:
        """Quadrature grid on the patch with the measure weight folded in.

        sphere: angular grid (periodic trapezoid in the last angle);
        graphs: Gauss-Legendre product rule; cone: uniform midpoint radii
        on [r0, r1] times the angular grid of the sphere.
        """
        kind = surface.kind
        if kind is SurfaceKind.SPHERE:
            res = int(np.max(resolution))
            axes, aw, periodic = sphere_axes(surface.n, res)
        elif kind is SurfaceKind.CONE:
            nr, nw = _pair(resolution)
            r, wr = midpoint_nodes(surface.r0, surface.r1, nr)
            ang, angw, angp = sphere_axes(surface.n, nw)
            axes, aw, periodic = [r] + ang, [wr] + angw, [False] + angp
        else:
            res = np.broadcast_to(np.asarray(resolution, dtype=int), (surface.chart_dim,))
            axes, aw, periodic = [], [], []
            for lo, hi, m in zip(surface.lower, surface.upper, res):
                x, w = gauss_legendre(lo, hi, int(m))
                axes.append(x)
                aw.append(w)
                periodic.append(False)

        coords, weights, shape = product_grid(axes, aw, periodic)
        if kind is SurfaceKind.CONE:
            # polar (r, angles) -> ξ; dξ/|ξ| = r^{n-2} dr dω
            radius = coords[:, 0]
            omega = sphere_embed(coords[:, 1:])
            points = radius[:, None] * omega
            weights = weights * radius ** (surface.n - 2) * sphere_jacobian(coords[:, 1:])
        else:
            points = coords
            weights = weights * MeasureWeight(surface=surface)(coords)
        return ChartGrid(points, weights, tuple(axes), tuple(aw), tuple(periodic), shape)

    def known_range(self, kind: SurfaceKind | str, n: int) -> float | None:
        """Threshold on p' above which the estimate is quoted as known."""
        rule = _KNOWN_RANGE.get(SurfaceKind(kind))
        return None if rule is None else rule(n)

    # -- geometry ----------------------------------------------------------

    def gaussian_curvature(
        self,
        f: GraphFn,
        pt: Sequence[float] | np.ndarray,
        diameter: float = 1.0,
        derivatives: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, ...]] | None = None,
    ) -> float | np.ndarray:
        """K = (f₁₁f₂₂ - f₁₂²) / (1 + |∇f|²)² of the graph of f.

        Args:
            f: Graph function f(ξ₁, ξ₂), vectorized.
            pt: One point (2,) or points (M, 2).
            diameter: Patch diameter; the step is fd_step · diameter.
            derivatives: Optional analytic (f₁, f₂, f₁₁, f₁₂, f₂₂).

        Raises:
            NumericalError: Non-finite finite-difference estimate.
        """
        pts = np.asarray(pt, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        x1, x2 = pts[:, 0], pts[:, 1]
        if derivatives is not None:
            f1, f2, f11, f12, f22 = (np.asarray(d, dtype=float) for d in derivatives(x1, x2))
        else:
            h = self._config.fd_step * diameter
            f1, f2 = gradient(f, x1, x2, h)
            f11, f12, f22 = hessian(f, x1, x2, h)
        curvature = (f11 * f22 - f12**2) / (1.0 + f1**2 + f2**2) ** 2
        return float(curvature[0]) if single else curvature

    def contact_order(
        self,
        f: GraphFn,
        pt: Sequence[float] = (0.0, 0.0),
        max_k: int = 8,
        diameter: float = 1.0,
    ) -> ContactOrder:
        """Type of the point (pt, f(pt)): order of contact with the tangent plane.

        The tangent plane is removed with a fourth-order gradient; the
        contact function is probed along a fan of directions by a
        Chebyshev least-squares Taylor fit on a disc of radius 0.1 · diameter.
        """
        x0 = np.asarray(pt, dtype=float)
        h = self._config.fd_step * diameter
        grad = np.array([float(g[0]) for g in gradient(f, x0[:1], x0[1:2], h)])
        base = float(np.asarray(f(x0[:1], x0[1:2]))[0])
        radius = 0.1 * diameter
        directions = fan(FAN_SIZE)
        slope = directions @ grad

        def contact(s: np.ndarray) -> np.ndarray:
            p1 = x0[0] + s[:, None] * directions[None, :, 0]
            p2 = x0[1] + s[:, None] * directions[None, :, 1]
            return np.asarray(f(p1, p2), dtype=float) - base - s[:, None] * slope[None, :]

        coeffs = np.abs(taylor_coefficients(contact, radius, max_k + 4))
        scale = float(np.max(coeffs))
        floor = 1e-9 * (abs(base) + radius * float(np.linalg.norm(grad)))
        threshold = max(CONTACT_REL_TOL * scale, floor)
        if scale == 0.0 or scale <= floor:
            logger.debug("contact function vanishes to max_k=%d", max_k)
            return ContactOrder(order=max_k, exact=False, max_k=max_k)

        orders = []
        for column in coeffs[1:max_k + 1].T:
            hits = np.nonzero(column > threshold)[0]
            if hits.size:
                orders.append(int(hits[0]) + 1)
        if not orders:
            return ContactOrder(order=max_k, exact=False, max_k=max_k)
        return ContactOrder(order=min(orders), exact=True, max_k=max_k)


def _pair(resolution: int | Sequence[int]) -> tuple[int, int]:
    if isinstance(resolution, (int, np.integer)):
        return int(resolution), int(resolution)
    first, second = resolution
    return int(first), int(second)


def _float_list(value: Any, dim: int) -> list[float]:
    items = value if isinstance(value, list) else [value]
    numbers = [float(item) for item in items]
    if len(numbers) == 1:
        numbers = numbers * dim
    if len(numbers) != dim:
        raise ValueError(f"expected {dim} bounds, got {len(numbers)}")
    return numbers


def _patch_bounds(value: Any, dim: int) -> tuple[list[float], list[float]]:
    items = value if isinstance(value, list) else [value]
    numbers = [float(item) for item in items]
    if len(numbers) == 1:
        return [-numbers[0]] * dim, [numbers[0]] * dim
    if len(numbers) == 2:
        return [numbers[0]] * dim, [numbers[1]] * dim
    raise ValueError("patch is a half-width or 'lo, hi'")
