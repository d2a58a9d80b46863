"""
Slicing resource: coordinates slicing the cone, inequality chains and
transferred constants.

Every chain writes the cone extension as a one-dimensional Fourier integral

    E(x, y) = ∫ e^{2πi y s} H(x, s) ds

over a transverse variable s (radius, null coordinate a_n, height ξ_n, or
ξ₂ on a finite-type surface) sampled on uniform midpoint nodes, so E is
evaluated over one period in y by an FFT. The links then bound E by
norms of the slices H(·, s) and finally by ‖u‖_{L^{q'}(dσ)}. The right-hand
side of every link is the left-hand side of the next one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Mapping, Sequence

import numpy as np

from restriction_lab._numerics import gauss_legendre, lp_norm, ordered_map, smooth_step, taylor_coefficients
from restriction_lab.exceptions import DomainError, ModeError, PreconditionError, RefinementError
from restriction_lab.models.chain import (
    ChainId,
    ChainLink,
    ChainMode,
    ChainReport,
    NullCoords,
    SliceProblem,
    SliceVerdict,
    TransferBound,
)
from restriction_lab.models.lorentz import LorentzParams
from restriction_lab.models.surface import ExponentPair, MeasureWeight, SurfaceDescriptor, SurfaceKind
from restriction_lab.resources.extension import EvalGrid, Extension, SampledDensity, bump
from restriction_lab.resources.knapp import Knapp
from restriction_lab.resources.norms import Norms, ProductGridFunction, embedding_constant, lorentz_rows, ratio
from restriction_lab.resources.surfaces import ChartGrid, Surfaces, midpoint_nodes, product_grid

if TYPE_CHECKING:
    from restriction_lab.config import LabConfig


logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
ZERO_DENSITY = 1e-14
IDENTITY_TOL = 1e-10
FFT_OVERSAMPLE = 4
SECTOR_OVERLAP = 0.1
TYPE_REL_TOL = 1e-7

DEFAULT_BOX = 0.5
DEFAULT_NODES = 40
DEFAULT_X_RESOLUTION = 8
# transverse interval of the null and hyperbolic slicings
TRANSVERSE = (1.0, 2.0)
PARAB_HALF_WIDTH = 1.0
HYPERB_HALF_WIDTH = 0.5
FINITE_TYPE_DELTA = 0.5

# seed streams of chain corpora
CALIBRATION_STREAM = 1
CHECK_STREAM = 2

ConeDensity = Callable[[np.ndarray], np.ndarray]


# -- coordinates -----------------------------------------------------------

def to_null(xi: np.ndarray, tau: np.ndarray) -> NullCoords:
    """(ξ, τ) -> (a', a_n, b) with a_n = (τ + ξ_n)/√2, b = (τ - ξ_n)/√2."""
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return NullCoords(
        a_prime=xi[..., :-1],
        a_n=(tau + xi[..., -1]) / SQRT2,
        b=(tau - xi[..., -1]) / SQRT2,
    )


def from_null(coords: NullCoords) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of to_null."""
    a_n = np.asarray(coords.a_n, dtype=float)
    b = np.asarray(coords.b, dtype=float)
    xi = np.concatenate([coords.a_prime, ((a_n - b) / SQRT2)[..., None]], axis=-1)
    return xi, (a_n + b) / SQRT2


def cone_from_null(a_prime: np.ndarray, a_n: np.ndarray) -> np.ndarray:
    """The cone point over (a', a_n): b = |a'|²/(2a_n)."""
    a_prime = np.asarray(a_prime, dtype=float)
    a_n = np.asarray(a_n, dtype=float)
    b = np.sum(a_prime**2, axis=-1) / (2.0 * a_n)
    xi, _ = from_null(NullCoords(a_prime, a_n, b))
    return xi


def null_measure_weight(a_n: np.ndarray) -> np.ndarray:
    """Density of dξ/|ξ| in the coordinates (a', a_n) of the cone: 1/a_n."""
    a_n = np.asarray(a_n, dtype=float)
    if np.any(a_n <= 0):
        raise DomainError("The cone is parametrized by a_n > 0")
    return 1.0 / a_n


def partition_of_unity(points: np.ndarray, sectors: int = 2, overlap: float = SECTOR_OVERLAP) -> np.ndarray:
    """Smooth angular cutoffs χ_j, one row per sector, with Σ_j χ_j = 1.

    Sectors split the angle of (ξ₁, ξ_n) into equal arcs; neighbouring
    cutoffs overlap on ``overlap`` times the arc length.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if sectors < 1 or not 0 < overlap < 1:
        raise PreconditionError("Need at least one sector and 0 < overlap < 1")
    theta = np.mod(np.arctan2(pts[:, -1], pts[:, 0]), 2.0 * math.pi)
    arc = 2.0 * math.pi / sectors
    band = overlap * arc
    raw = np.empty((sectors, pts.shape[0]))
    for j in range(sectors):
        center = (j + 0.5) * arc
        dist = np.abs(np.mod(theta - center + math.pi, 2.0 * math.pi) - math.pi)
        raw[j] = smooth_step((0.5 * arc + 0.5 * band - dist) / band)
    return raw / np.sum(raw, axis=0, keepdims=True)


# -- polar slices ----------------------------------------------------------

@dataclass(frozen=True)
class PolarSlices:
    """u on a ring of the cone as a family of functions on S^{n-1}.

    Attributes:
        radii: Radial nodes r_j.
        radial_weights: Radial weights Δr · r_j^{n-2}.
        directions: Unit vectors ω_k (K, n).
        direction_weights: Weights of dω (K,).
        values: u(r_j ω_k), shape (len(radii), K).
    """

    radii: np.ndarray
    radial_weights: np.ndarray
    directions: np.ndarray
    direction_weights: np.ndarray
    values: np.ndarray

    @property
    def nonzero(self) -> list[int]:
        """Indices of slices that do not vanish identically."""
        return [int(j) for j in np.nonzero(np.any(self.values != 0, axis=1))[0]]

    def slice_norms(self, q_prime: float) -> np.ndarray:
        """‖u(r_j ·)‖_{L^{q'}(dω)} per slice."""
        return lp_norm(self.values, self.direction_weights[None, :], q_prime, axis=1)

    def extend(self, points: np.ndarray) -> np.ndarray:
        """Reassemble the slices: Σ_j e^{2πi t r_j} Δr r_j^{n-2} Σ_k e^{2πi r_j x·ω_k} u_jk w_k."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, t = pts[:, :-1], pts[:, -1]
        phase = 2.0 * math.pi * (x @ self.directions.T)
        out = np.zeros(pts.shape[0], dtype=complex)
        for r, wr, row in zip(self.radii, self.radial_weights, self.values):
            inner = np.exp(1j * r * phase) @ (row * self.direction_weights)
            out += wr * np.exp(2j * math.pi * t * r) * inner
        return out


# -- chain data ------------------------------------------------------------

@dataclass(frozen=True)
class ChainData:
    """Discretized slicing of one density.

    Attributes:
        chain: Chain identifier.
        n: ξ-dimension of the cone (2 on a finite-type surface in R³).
        step: Spacing of the transverse nodes.
        transverse: Transverse nodes s_j.
        slices: H(x_i, s_j), shape (len(cells), len(transverse)).
        slice_points: Slice-variable points x_i.
        cells: Cell volumes of the slice-variable box.
        slice_norms: Norm of the j-th slice density in its slice measure.
        slice_weight: Power weight in front of the slice norm.
        F: Weight kept in the Lorentz space (1 for the finite-type chain).
        G: Weight regrouped with the slice norm.
        u_norm: ‖u‖_{L^{q'}(dσ)}.
        density: The same samples as a density on the surface.
        to_ambient: Maps (slice points, transverse frequencies) to ambient points.
        weight_sup: sup of the area element (finite-type chain only).
    """

    chain: ChainId
    n: int
    step: float
    transverse: np.ndarray
    slices: np.ndarray
    slice_points: np.ndarray
    cells: np.ndarray
    slice_norms: np.ndarray
    slice_weight: np.ndarray
    F: np.ndarray
    G: np.ndarray
    u_norm: float
    density: SampledDensity
    to_ambient: Callable[[np.ndarray, np.ndarray], np.ndarray]
    weight_sup: float = 1.0

    @property
    def measure(self) -> float:
        """Length of the transverse interval."""
        return self.step * self.transverse.size

    @property
    def period(self) -> float:
        return 1.0 / self.step

    def transform(self) -> tuple[np.ndarray, float]:
        """|E| at the FFT samples of one period, with the cell length in y."""
        m = FFT_OVERSAMPLE * self.transverse.size
        values = self.step * m * np.fft.ifft(self.slices, n=m, axis=1)
        return np.abs(values), 1.0 / (m * self.step)


def _slice_box(n: int, box: float, resolution: int) -> EvalGrid:
    return EvalGrid.box(box, resolution, n)


def _exponent_checks(knapp: Knapp, chain: ChainId, mode: ChainMode, n: int, pair: ExponentPair) -> None:
    if chain is ChainId.FINITE_TYPE:
        if mode is ChainMode.WHOLE:
            raise ModeError("The finite-type chain has no whole-cone route", hint="Use mode=compact")
    elif mode is ChainMode.WHOLE:
        if not knapp.scale_invariant(n, pair.p_prime, pair.q):
            raise ModeError(
                f"(p', q) = ({pair.p_prime:g}, {pair.q:g}) is not scale invariant for n={n}",
                hint="Use mode=compact or p'/(n+1) = q/(n-1)",
            )
    elif not knapp.admissible_compact(n, pair.p_prime, pair.q):
        raise PreconditionError(f"(p', q) = ({pair.p_prime:g}, {pair.q:g}) is not admissible for n={n}")
    if mode is ChainMode.COMPACT and not pair.q_prime > pair.p:
        raise PreconditionError("The compact route needs q' > p")


class Slicing:
    """Cone slicings, chain verification and constant transfer.

    Example:
        pair = ExponentPair.from_primes(6.0, 2.0)
        c = lab.slicing.slice_constant(ChainId.SPHERE, 2, pair)
        report = lab.slicing.verify_chain(ChainId.SPHERE, u, pair, c)
        report.link("regrouping").ratio    # 1.0
    """

    def __init__(self, config: LabConfig, surfaces: Surfaces, norms: Norms,
                 extension: Extension, knapp: Knapp) -> None:
        self._config = config
        self._surfaces = surfaces
        self._norms = norms
        self._extension = extension
        self._knapp = knapp

    # -- polar slices ------------------------------------------------------

    def polar_slices(self, surface: SurfaceDescriptor, grid: ChartGrid,
                     u: ConeDensity | np.ndarray) -> PolarSlices:
        """Split u on a polar cone grid into spherical slices.

        Raises:
            DomainError: Not a cone, or not a polar product grid.
        """
        if surface.kind is not SurfaceKind.CONE:
            raise DomainError("Polar slices live on the cone")
        if len(grid.shape) != surface.n or int(np.prod(grid.shape)) != grid.size:
            raise DomainError("Polar slices need a product grid (radius x angles)")
        nr = grid.shape[0]
        values = np.asarray(u(grid.points) if callable(u) else u, dtype=complex).reshape(nr, -1)
        radii = np.asarray(grid.axes[0], dtype=float)
        points = grid.points.reshape(nr, -1, surface.n)
        if not np.allclose(np.linalg.norm(points, axis=-1), radii[:, None], rtol=1e-12, atol=0.0):
            raise DomainError("Grid is not a polar product grid")
        radial = np.asarray(grid.axis_weights[0]) * radii ** (surface.n - 2)
        directions = points[0] / radii[0]
        direction_weights = grid.weights.reshape(nr, -1)[0] / radial[0]
        return PolarSlices(radii, radial, directions, direction_weights, values)

    # -- chain data --------------------------------------------------------

    def chain_data(
        self,
        chain: ChainId | str,
        u: ConeDensity,
        pair: ExponentPair,
        n: int = 2,
        box: float = DEFAULT_BOX,
        nodes: int = DEFAULT_NODES,
        slice_resolution: int | None = None,
        x_resolution: int = DEFAULT_X_RESOLUTION,
        surface: SurfaceDescriptor | None = None,
    ) -> ChainData:
        """Sample u on the grid of a slicing and compute its slices H(x, s)."""
        chain = ChainId(chain)
        res = slice_resolution or _default_resolution(chain, n)
        if chain is ChainId.SPHERE:
            return self._sphere_data(u, pair, n, box, nodes, res, x_resolution, surface)
        if chain is ChainId.PARAB:
            return self._parab_data(u, pair, n, box, nodes, res, x_resolution)
        if chain is ChainId.HYPERB:
            return self._hyperb_data(u, pair, n, box, nodes, res, x_resolution)
        return self._finite_type_data(u, pair, box, nodes, res, x_resolution, surface)

    def _sphere_data(self, u, pair, n, box, nodes, res, x_res, surface) -> ChainData:
        surface = surface or self._surfaces.cone(n)
        if surface.kind is not SurfaceKind.CONE:
            raise DomainError("The sphere chain slices a cone ring")
        grid = self._surfaces.grid(surface, (nodes, res))
        density = SampledDensity.from_grid(surface, grid, u)
        polar = self.polar_slices(surface, grid, density.values)
        xbox = _slice_box(n, box, x_res)
        phase = 2.0 * math.pi * (xbox.points @ polar.directions.T)
        mass = polar.values * polar.direction_weights[None, :]
        r = polar.radii
        slices = np.stack(
            [r[j] ** (n - 2) * (np.exp(1j * r[j] * phase) @ mass[j]) for j in range(r.size)], axis=1,
        )
        p_prime, q, q_prime = pair.p_prime, pair.q, pair.q_prime
        norms = polar.slice_norms(q_prime)
        return ChainData(
            chain=ChainId.SPHERE, n=n, step=float(grid.axis_weights[0][0]), transverse=r,
            slices=slices, slice_points=xbox.points, cells=xbox.volumes,
            slice_norms=norms,
            slice_weight=r ** (n - 2 - n / p_prime),
            F=r ** ((n - 2) / q - n / p_prime),
            G=r ** ((n - 2) / q_prime) * norms,
            u_norm=density.norm(q_prime),
            density=density,
            to_ambient=lambda x, y: np.concatenate([x, y[:, None]], axis=-1),
        )

    def _parab_data(self, u, pair, n, box, nodes, res, x_res) -> ChainData:
        a_n, wa = midpoint_nodes(*TRANSVERSE, nodes)
        axes, aw = [], []
        for _ in range(n - 1):
            x, w = gauss_legendre(-PARAB_HALF_WIDTH, PARAB_HALF_WIDTH, res)
            axes.append(x)
            aw.append(w)
        a_prime, w_prime, prime_shape = product_grid(axes, aw, [False] * (n - 1))
        an_all = np.repeat(a_n, a_prime.shape[0])
        ap_all = np.tile(a_prime, (nodes, 1))
        xi = cone_from_null(ap_all, an_all)
        weights = np.tile(w_prime, nodes) * wa[0] * null_measure_weight(an_all)
        values = np.asarray(u(xi), dtype=complex).reshape(nodes, -1)
        density = self._cone_density(n, xi, values.ravel(), weights, [a_n] + axes, [wa] + aw, (nodes,) + prime_shape)

        # slice variables (x', s); y pairs with a_n, s with b
        xbox = _slice_box(n, box, x_res)
        xp, s = xbox.points[:, :-1], xbox.points[:, -1]
        lin = 2.0 * math.pi * (xp @ a_prime.T)
        quad = math.pi * np.outer(s, np.sum(a_prime**2, axis=-1))
        slices = np.stack(
            [np.exp(1j * (lin + quad / a_n[j])) @ (values[j] * w_prime) / a_n[j] for j in range(nodes)], axis=1,
        )
        p, q_prime = pair.p, pair.q_prime
        norms = lp_norm(values, w_prime[None, :], q_prime, axis=1)

        def to_ambient(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            s_col = x[:, -1]
            return np.concatenate(
                [x[:, :-1], ((y - s_col) / SQRT2)[:, None], ((y + s_col) / SQRT2)[:, None]], axis=-1,
            )

        return ChainData(
            chain=ChainId.PARAB, n=n, step=float(wa[0]), transverse=a_n,
            slices=slices, slice_points=xbox.points, cells=xbox.volumes,
            slice_norms=norms,
            slice_weight=a_n ** (1.0 / pair.p_prime - 1.0),
            F=a_n ** (1.0 / q_prime - 1.0 / p),
            G=a_n ** (-1.0 / q_prime) * norms,
            u_norm=density.norm(q_prime),
            density=density,
            to_ambient=to_ambient,
        )

    def _hyperb_data(self, u, pair, n, box, nodes, res, x_res) -> ChainData:
        xi_n, wn = midpoint_nodes(*TRANSVERSE, nodes)
        axes, aw = [], []
        for _ in range(n - 1):
            x, w = gauss_legendre(-HYPERB_HALF_WIDTH, HYPERB_HALF_WIDTH, res)
            axes.append(x)
            aw.append(w)
        eta, w_eta, eta_shape = product_grid(axes, aw, [False] * (n - 1))
        lift = np.sqrt(1.0 + np.sum(eta**2, axis=-1))
        w_hyp = w_eta / lift
        xn_all = np.repeat(xi_n, eta.shape[0])
        xi = np.concatenate([np.tile(eta, (nodes, 1)) * xn_all[:, None], xn_all[:, None]], axis=-1)
        weights = np.tile(w_hyp, nodes) * wn[0] * xn_all ** (n - 2)
        values = np.asarray(u(xi), dtype=complex).reshape(nodes, -1)
        density = self._cone_density(n, xi, values.ravel(), weights, [xi_n] + axes, [wn] + aw, (nodes,) + eta_shape)

        # slice variables (x', t); y pairs with ξ_n
        xbox = _slice_box(n, box, x_res)
        xp, t = xbox.points[:, :-1], xbox.points[:, -1]
        phase = 2.0 * math.pi * (xp @ eta.T + np.outer(t, lift))
        slices = np.stack(
            [xi_n[j] ** (n - 2) * (np.exp(1j * xi_n[j] * phase) @ (values[j] * w_hyp)) for j in range(nodes)],
            axis=1,
        )
        p_prime, q, q_prime = pair.p_prime, pair.q, pair.q_prime
        norms = lp_norm(values, w_hyp[None, :], q_prime, axis=1)

        def to_ambient(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return np.concatenate([x[:, :-1], y[:, None], x[:, -1:]], axis=-1)

        return ChainData(
            chain=ChainId.HYPERB, n=n, step=float(wn[0]), transverse=xi_n,
            slices=slices, slice_points=xbox.points, cells=xbox.volumes,
            slice_norms=norms,
            slice_weight=xi_n ** (n - 2 - n / p_prime),
            F=xi_n ** ((n - 2) / q - n / p_prime),
            G=xi_n ** ((n - 2) / q_prime) * norms,
            u_norm=density.norm(q_prime),
            density=density,
            to_ambient=to_ambient,
        )

    def _finite_type_data(self, u, pair, box, nodes, res, x_res, surface) -> ChainData:
        surface = surface or self._surfaces.finite_type(2, half_width=FINITE_TYPE_DELTA)
        if surface.kind is not SurfaceKind.FINITE_TYPE:
            raise DomainError("The finite-type chain needs a finite-type surface")
        xi2, w2 = midpoint_nodes(surface.lower[1], surface.upper[1], nodes)
        xi1, w1 = gauss_legendre(surface.lower[0], surface.upper[0], res)
        points = np.stack([np.tile(xi1, nodes), np.repeat(xi2, res)], axis=-1)
        phi = MeasureWeight(surface=surface)(points)
        values = np.asarray(u(points), dtype=complex).reshape(nodes, res)
        weights = np.tile(w1, nodes) * w2[0] * phi
        grid = ChartGrid(points, weights, (xi2, xi1), (w2, w1), (False, False), (nodes, res))
        density = SampledDensity(surface, points, values.ravel(), weights, grid.spacing(surface))

        # slice variables (x₁, x₃); y pairs with ξ₂
        xbox = _slice_box(2, box, x_res)
        heights = surface.graph(points[:, 0], points[:, 1]).reshape(nodes, res)
        mass = values * phi.reshape(nodes, res) * w1[None, :]
        slices = np.stack(
            [np.exp(2j * math.pi * (np.outer(xbox.points[:, 0], xi1) + np.outer(xbox.points[:, 1], heights[j])))
             @ mass[j] for j in range(nodes)],
            axis=1,
        )
        norms = lp_norm(values * phi.reshape(nodes, res), w1[None, :], pair.q_prime, axis=1)

        def to_ambient(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return np.stack([x[:, 0], y, x[:, 1]], axis=-1)

        return ChainData(
            chain=ChainId.FINITE_TYPE, n=2, step=float(w2[0]), transverse=xi2,
            slices=slices, slice_points=xbox.points, cells=xbox.volumes,
            slice_norms=norms,
            slice_weight=np.ones(nodes),
            F=np.ones(nodes),
            G=norms,
            u_norm=density.norm(pair.q_prime),
            density=density,
            to_ambient=to_ambient,
            weight_sup=float(np.max(phi)),
        )

    def _cone_density(self, n, xi, values, weights, axes, axis_weights, shape) -> SampledDensity:
        radius = np.linalg.norm(xi, axis=-1)
        cone = self._surfaces.cone(n, r0=float(np.min(radius)) * 0.999, r1=float(np.max(radius)) * 1.001)
        grid = ChartGrid(xi, weights, tuple(axes), tuple(axis_weights), (False,) * len(shape), tuple(shape))
        return SampledDensity(cone, xi, values, weights, grid.spacing(cone))

    # -- chains ------------------------------------------------------------

    def verify_chain(
        self,
        chain: ChainId | str,
        u: ConeDensity,
        pair: ExponentPair,
        c_slice: float,
        mode: ChainMode | str = ChainMode.WHOLE,
        n: int = 2,
        name: str = "u",
        **grid_options: object,
    ) -> ChainReport:
        """Measure both sides of every link of a chain for one density.

        Raises:
            ModeError: Whole-cone mode without scale-invariant exponents, or
                the finite-type chain in whole mode.
            PreconditionError: Compact mode with inadmissible exponents or q' <= p.
        """
        chain, mode = ChainId(chain), ChainMode(mode)
        _exponent_checks(self._knapp, chain, mode, n, pair)
        data = self.chain_data(chain, u, pair, n=n, **grid_options)
        return self.links(data, pair, c_slice, mode, name)

    def links(self, data: ChainData, pair: ExponentPair, c_slice: float,
              mode: ChainMode, name: str = "u") -> ChainReport:
        """Evaluate the links of a chain on precomputed slices."""
        p, p_prime, q, q_prime = pair.p, pair.p_prime, pair.q, pair.q_prime
        finite_type = data.chain is ChainId.FINITE_TYPE
        transverse_norm = LorentzParams.lebesgue(p) if finite_type else LorentzParams(alpha=p, beta=p_prime)
        outer = LorentzParams.lebesgue(p_prime)
        wy = np.full(data.transverse.size, data.step)
        links: list[ChainLink] = []

        def add(link_name: str, rhs: float, identity: bool = False, nominal: float | None = None) -> None:
            lhs = links[-1].rhs if links else first_lhs
            links.append(ChainLink(
                name=link_name, lhs=lhs, rhs=rhs, ratio=ratio(lhs, rhs),
                identity=identity, nominal=nominal, violated=rhs == 0.0 and lhs > 0.0,
            ))

        def transverse(values: np.ndarray, params: LorentzParams) -> float:
            return float(lorentz_rows(values, wy, params.alpha, params.beta))

        modulus, dy = data.transform()
        first_lhs = float(lp_norm(modulus, data.cells[:, None] * dy, p_prime))
        slices = ProductGridFunction(data.slices, data.cells, wy)
        add("hausdorff_young",
            self._norms.mixed_lorentz_norm(slices, outer=outer, inner=transverse_norm, inner_axis="y"),
            nominal=1.0 if finite_type else None)
        add("minkowski" if finite_type else "interchange",
            self._norms.mixed_lorentz_norm(slices, outer=transverse_norm, inner=outer, inner_axis="x"),
            nominal=1.0 if finite_type else None)
        slice_bound = c_slice * data.slice_weight * data.slice_norms
        add("slice_restriction", transverse(slice_bound, transverse_norm))

        if finite_type:
            hold = data.measure ** (1.0 / p - 1.0 / q_prime)
            add("holder_lp", c_slice * hold * transverse(data.G, LorentzParams.lebesgue(q_prime)), nominal=1.0)
            route = hold * data.weight_sup ** (1.0 / q)
            add("density_weight", c_slice * route * data.u_norm, nominal=1.0)
        else:
            FG = data.F * data.G
            add("regrouping", c_slice * transverse(FG, transverse_norm), identity=True, nominal=1.0)
            g_norm = transverse(data.G, LorentzParams.lebesgue(q_prime))
            if mode is ChainMode.WHOLE:
                add("embedding", c_slice * transverse(FG, LorentzParams(alpha=p, beta=q_prime)),
                    nominal=embedding_constant(p, q_prime, p_prime))
                alpha = 1.0 / (1.0 / p - 1.0 / q_prime)
                route = transverse(data.F, LorentzParams.weak(alpha))
                add("holder", c_slice * route * g_norm)
            else:
                add("embedding_lp", c_slice * transverse(FG, LorentzParams.lebesgue(p)), nominal=1.0)
                hold = data.measure ** (1.0 / p - 1.0 / q_prime)
                add("holder_lp", c_slice * hold * transverse(FG, LorentzParams.lebesgue(q_prime)), nominal=1.0)
                route = hold * float(np.max(data.F))
                add("ring_weight", c_slice * route * g_norm, nominal=1.0)
            add("measure_identity", c_slice * route * data.u_norm, identity=True, nominal=1.0)

        trivial = data.u_norm < ZERO_DENSITY
        for link in links:
            if link.identity and not trivial and abs(link.ratio - 1.0) > IDENTITY_TOL:
                logger.warning("Identity link %s off by %.3g", link.name, link.ratio - 1.0)
            if link.violated:
                logger.warning("Link %s violated: rhs vanishes, lhs %.3g", link.name, link.lhs)
        return ChainReport(
            chain=data.chain, mode=mode, n=data.n, exponents=pair, c_slice=c_slice,
            links=links, density=name, u_norm=data.u_norm, route_factor=route, trivial=trivial,
        )

    # -- slice constants ---------------------------------------------------

    def slice_surface(self, chain: ChainId | str, n: int = 2) -> SurfaceDescriptor:
        """Surface the slices of a chain live on."""
        chain = ChainId(chain)
        if chain is ChainId.SPHERE:
            return self._surfaces.sphere(n)
        if chain is ChainId.PARAB:
            return self._surfaces.paraboloid(n, half_width=PARAB_HALF_WIDTH)
        if chain is ChainId.HYPERB:
            return self._surfaces.hyperboloid(n, half_width=HYPERB_HALF_WIDTH)
        raise DomainError("Finite-type slices are curves; use slice_oracle")

    def slice_constant(
        self,
        chain: ChainId | str,
        n: int,
        pair: ExponentPair,
        box: float = DEFAULT_BOX,
        x_resolution: int = DEFAULT_X_RESOLUTION,
        surface: SurfaceDescriptor | None = None,
        seed: int | None = None,
    ) -> float:
        """Measured restriction constant of the slices, on the largest box a slice link meets.

        Sphere slices at radius r meet the box r·B, hyperboloid slices at
        height ξ_n the box ξ_n·B, paraboloid slices a box inside B. For the
        finite-type chain the constant is the largest slice_oracle constant
        over five values of ξ₂.
        """
        chain = ChainId(chain)
        if chain is ChainId.FINITE_TYPE:
            ft = surface or self._surfaces.finite_type(2, half_width=FINITE_TYPE_DELTA)
            delta = ft.upper[0]
            constants = []
            for xi2 in np.linspace(ft.lower[1], ft.upper[1], 5):
                psi = (lambda c: lambda t: ft.graph(t, np.full_like(t, c)))(float(xi2))
                sp = SliceProblem(psi=psi, k=ft.k, a=2.0 * delta, delta=delta, p_prime=pair.p_prime,
                                  q=pair.q, box=box, resolution=x_resolution,
                                  seed=self._config.seed if seed is None else seed)
                constants.append(self.slice_oracle(sp, check_type=False).constant)
            return float(max(constants))

        reach = {ChainId.SPHERE: (surface.r1 if surface else self._surfaces.cone(n).r1),
                 ChainId.PARAB: 1.0, ChainId.HYPERB: TRANSVERSE[1]}[chain]
        target = self.slice_surface(chain, n)
        grid = EvalGrid.box(reach * box, x_resolution, n)
        res = self._extension.resolution_for(target, grid.max_radius)
        chart = self._surfaces.grid(target, res)
        family = self._extension.trial_family(target, chart, box=reach * box, seed=seed)
        report = self._extension.extension_ratio(family, pair.p_prime, pair.q_prime, grid)
        logger.info("Slice constant for %s (n=%d): %.6g from %s", chain.value, n, report.ratio, report.best)
        return report.ratio

    # -- slice oracle ------------------------------------------------------

    def slice_oracle(
        self,
        sp: SliceProblem,
        sweep: Mapping[str, Callable[[np.ndarray], np.ndarray]] | None = None,
        family: Sequence[tuple[str, Callable[[np.ndarray], np.ndarray]]] | None = None,
        check_type: bool = True,
    ) -> SliceVerdict:
        """Largest ‖∫ e^{2πi(t x₁ + ψ(t) x₂)} g(t) dt‖_{L^{p'}(box)} / ‖g‖_{L^{q'}(-δ, δ)} over trial g.

        The measured value is a lower bound for the constant of the curve.
        ``sweep`` maps names to further phases measured with the same family.

        Raises:
            PreconditionError: δ >= a.
            RefinementError: Too few quadrature nodes for the box.
        """
        if sp.delta >= sp.a:
            raise PreconditionError(f"delta={sp.delta:g} must be below a={sp.a:g}")
        admissible = sp.p_prime > 4 and sp.p_prime >= sp.k + 2 and sp.p_prime >= (sp.k + 1) * sp.q
        type_ok = self.has_type(sp.psi, sp.k, sp.a) if check_type else True
        trials = list(family) if family is not None else self._slice_family(sp)

        constant, best = self._slice_constant(sp, sp.psi, trials)
        swept = {key: self._slice_constant(sp, psi, trials)[0] for key, psi in (sweep or {}).items()}
        verdict = "inside theorem" if admissible else "outside theorem"
        logger.info("Slice oracle k=%d p'=%g q=%g: C >= %.6g (%s)", sp.k, sp.p_prime, sp.q, constant, verdict)
        return SliceVerdict(constant=constant, admissible=admissible, verdict=verdict,
                            type_ok=type_ok, best=best, sweep=swept)

    def has_type(self, psi: Callable[[np.ndarray], np.ndarray], k: int, a: float) -> bool:
        """ψ^{(j)}(0) = 0 for 1 <= j < k and ψ^{(k)}(0) != 0, from a Taylor fit on [-a/10, a/10]."""
        coeffs = np.abs(taylor_coefficients(psi, 0.1 * a, k + 4))
        scale = float(np.max(coeffs[1:]))
        if scale == 0.0:
            return False
        threshold = TYPE_REL_TOL * scale
        return bool(np.all(coeffs[1:k] <= threshold) and coeffs[k] > threshold)

    def phase_family(self, s_values: Sequence[float]) -> dict[str, Callable[[np.ndarray], np.ndarray]]:
        """ψ_s(t) = t³ (1 + s t)."""
        return {f"s={s:g}": (lambda c: lambda t: t**3 * (1.0 + c * t))(float(s)) for s in s_values}

    def _slice_family(self, sp: SliceProblem) -> list[tuple[str, Callable[[np.ndarray], np.ndarray]]]:
        delta = sp.delta
        trials: list[tuple[str, Callable[[np.ndarray], np.ndarray]]] = [("one", np.ones_like)]
        for j in range(3):
            width = delta / 2**j
            trials.append((f"cap{j}", (lambda w: lambda t: bump(np.abs(t) / w))(width)))
        for j in range(sp.count):
            rng = np.random.default_rng([sp.seed, 3, j])
            center = rng.uniform(-0.5 * delta, 0.5 * delta)
            width = rng.uniform(0.5 * delta, delta)
            amplitude = complex(rng.normal(), rng.normal())
            trials.append((f"bump{j}", (lambda c, w, a: lambda t: a * bump(np.abs(t - c) / w))(center, width, amplitude)))
        return trials

    def _slice_constant(self, sp: SliceProblem, psi: Callable[[np.ndarray], np.ndarray],
                        trials: Sequence[tuple[str, Callable[[np.ndarray], np.ndarray]]]) -> tuple[float, str]:
        t, w = gauss_legendre(-sp.delta, sp.delta, sp.nodes)
        heights = np.asarray(psi(t), dtype=float)
        variation = 2.0 * math.pi * sp.box * (2.0 * sp.delta + float(np.ptp(heights)))
        if sp.nodes < 0.5 * variation + 10:
            raise RefinementError(f"{sp.nodes} nodes cannot resolve a phase variation of {variation:.3g}",
                                  hint=f"Use at least {int(0.5 * variation) + 10} nodes")
        grid = EvalGrid.box(sp.box, sp.resolution, 2)
        kernel = np.exp(2j * math.pi * (np.outer(grid.points[:, 0], t) + np.outer(grid.points[:, 1], heights)))
        best, best_name = 0.0, ""
        for trial_name, g in trials:
            values = np.asarray(g(t), dtype=complex)
            denominator = float(lp_norm(values, w, sp.q_prime))
            if denominator < ZERO_DENSITY:
                continue
            value = float(lp_norm(kernel @ (values * w), grid.volumes, sp.p_prime)) / denominator
            if value > best:
                best, best_name = value, trial_name
        return best, best_name

    # -- transfer ----------------------------------------------------------

    def lower_bound_grid(self, data: ChainData) -> EvalGrid:
        """Slice box times the leading FFT samples in y that pass the anti-aliasing rule."""
        _, dy = data.transform()
        limit = self._config.alias_bound / (2.0 * math.pi * data.density.spacing)
        x_radius = float(np.max(np.linalg.norm(data.slice_points, axis=-1)))
        if x_radius > limit:
            raise RefinementError("The slice box alone violates the anti-aliasing rule",
                                  hint="Refine the grid or shrink the box")
        count = int(math.floor(math.sqrt(limit**2 - x_radius**2) / dy)) + 1
        count = min(count, FFT_OVERSAMPLE * data.transverse.size)
        y = dy * np.arange(count)
        points = data.to_ambient(np.repeat(data.slice_points, count, axis=0), np.tile(y, data.cells.size))
        return EvalGrid(points, np.repeat(data.cells, count) * dy, (data.cells.size, count))

    def calibrate_links(self, reports: Sequence[ChainReport]) -> dict[str, float]:
        """Largest ratio per link over non-trivial reports."""
        constants: dict[str, float] = {}
        for report in reports:
            if report.trivial:
                continue
            for link in report.links:
                constants[link.name] = max(constants.get(link.name, 0.0), link.ratio)
        return constants

    def transfer_constant(
        self,
        c_slice: float,
        pair: ExponentPair,
        chain: ChainId | str,
        reports: Sequence[ChainReport],
        mode: ChainMode | str = ChainMode.WHOLE,
        n: int = 2,
    ) -> TransferBound:
        """Cone constant bound: C_slice · route factor · product of calibrated link constants.

        The route factor is ‖F‖_{L^{α,∞}(R⁺)} = 1 for the whole cone and the
        factor the compact route multiplied by otherwise.

        Raises:
            ModeError: Whole-cone mode without scale-invariant exponents.
            PreconditionError: No non-trivial report to calibrate from.
        """
        chain, mode = ChainId(chain), ChainMode(mode)
        _exponent_checks(self._knapp, chain, mode, n, pair)
        constants = self.calibrate_links(reports)
        if not constants:
            raise PreconditionError("Calibration needs at least one non-trivial chain report")
        route = 1.0 if mode is ChainMode.WHOLE else max(r.route_factor for r in reports if not r.trivial)
        bound = c_slice * route * math.prod(constants.values())
        return TransferBound(chain=chain, mode=mode, exponents=pair, c_slice=c_slice,
                             link_constants=constants, route_constant=c_slice * route, bound=bound)

    def chain_corpus(self, chain: ChainId | str, n: int = 2, count: int = 100,
                     seed: int | None = None, stream: int = CHECK_STREAM) -> list[tuple[str, ConeDensity]]:
        """Seeded smooth modulated bumps in the region a chain samples.

        Density i of ``stream`` is drawn from ``default_rng([seed, stream, i])``;
        the calibration stream names its densities ``cal{i}``, any other ``u{i}``.
        """
        chain = ChainId(chain)
        base = self._config.seed if seed is None else seed
        prefix = "cal" if stream == CALIBRATION_STREAM else "u"
        corpus: list[tuple[str, ConeDensity]] = []
        for i in range(count):
            rng = np.random.default_rng([base, stream, i])
            dim = 2 if chain is ChainId.FINITE_TYPE else n
            if chain is ChainId.SPHERE:
                omega = rng.standard_normal(n)
                center = rng.uniform(0.75, 1.75) * omega / np.linalg.norm(omega)
                width = rng.uniform(0.3, 1.0)
            elif chain is ChainId.PARAB:
                a_n = rng.uniform(1.2, 1.8)
                center = cone_from_null(rng.uniform(-0.5, 0.5, n - 1), np.array(a_n))
                width = rng.uniform(0.3, 1.0)
            elif chain is ChainId.HYPERB:
                xi_n = rng.uniform(1.2, 1.8)
                center = np.append(xi_n * rng.uniform(-0.25, 0.25, n - 1), xi_n)
                width = rng.uniform(0.3, 1.0)
            else:
                center = rng.uniform(-0.5 * FINITE_TYPE_DELTA, 0.5 * FINITE_TYPE_DELTA, 2)
                width = rng.uniform(0.3, 1.0) * FINITE_TYPE_DELTA
            wave = rng.uniform(-1.0, 1.0, dim)
            amplitude = complex(rng.normal(), rng.normal())
            corpus.append((f"{prefix}{i}", _modulated_bump(center, width, wave, amplitude)))
        return corpus

    def calibrate(
        self,
        chain: ChainId | str,
        pair: ExponentPair,
        c_slice: float,
        corpus: Sequence[tuple[str, ConeDensity]],
        mode: ChainMode | str = ChainMode.WHOLE,
        n: int = 2,
        **grid_options: object,
    ) -> list[ChainReport]:
        """Chain reports of a calibration corpus, in corpus order."""
        chain, mode = ChainId(chain), ChainMode(mode)
        _exponent_checks(self._knapp, chain, mode, n, pair)

        def run(item: tuple[str, ConeDensity]) -> ChainReport:
            name, u = item
            return self.links(self.chain_data(chain, u, pair, n=n, **grid_options), pair, c_slice, mode, name)

        return ordered_map(run, list(corpus), self._config.workers)

    def sandwich(
        self,
        chain: ChainId | str,
        pair: ExponentPair,
        c_slice: float,
        corpus: Sequence[tuple[str, ConeDensity]],
        mode: ChainMode | str = ChainMode.WHOLE,
        n: int = 2,
        calibration: Sequence[ChainReport] | None = None,
        **grid_options: object,
    ) -> tuple[TransferBound, list[ChainReport]]:
        """Transferred bound against the extension-ratio lower bound of ``corpus``.

        Link constants come from ``calibration``; without it they are
        calibrated on a corpus of the same size drawn from the calibration
        stream, disjoint from the check stream. The returned reports belong
        to ``corpus``.
        """
        chain, mode = ChainId(chain), ChainMode(mode)
        _exponent_checks(self._knapp, chain, mode, n, pair)
        if calibration is None:
            seeded = self.chain_corpus(chain, n, len(corpus), stream=CALIBRATION_STREAM)
            calibration = self.calibrate(chain, pair, c_slice, seeded, mode, n, **grid_options)

        def run(item: tuple[str, ConeDensity]) -> tuple[ChainReport, float]:
            name, u = item
            data = self.chain_data(chain, u, pair, n=n, **grid_options)
            report = self.links(data, pair, c_slice, mode, name)
            lower = self._extension.extension_ratio([(name, data.density)], pair.p_prime, pair.q_prime,
                                                    self.lower_bound_grid(data))
            return report, lower.ratio

        results = ordered_map(run, list(corpus), self._config.workers)
        reports = [r for r, _ in results]
        bound = self.transfer_constant(c_slice, pair, chain, calibration, mode, n)
        bound.lower_bound = max((value for _, value in results), default=0.0)
        if not bound.holds:
            logger.warning("Sandwich fails for %s: lower %.6g > bound %.6g", chain.value, bound.lower_bound, bound.bound)
        else:
            logger.info("Sandwich %s (%s): lower %.6g <= bound %.6g", chain.value, mode.value,
                        bound.lower_bound, bound.bound)
        return bound, reports


def _modulated_bump(center: np.ndarray, width: float, wave: np.ndarray, amplitude: complex) -> ConeDensity:
    def u(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        envelope = bump(np.linalg.norm(pts - center, axis=-1) / width)
        return amplitude * envelope * np.exp(2j * math.pi * (pts @ wave))
    return u


def _default_resolution(chain: ChainId, n: int) -> int:
    if chain is ChainId.SPHERE:
        return 288 if n == 2 else 48
    if chain is ChainId.FINITE_TYPE:
        return 64
    return 128 if n == 2 else 24
