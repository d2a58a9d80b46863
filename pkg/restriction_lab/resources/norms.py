"""
Norms resource: discrete Lorentz spaces, mixed norms and inequality checkers.

Mixed norms are written outer-first: ‖u‖_{L^A_x L^B_y} takes the L^B norm
in y for every x, then the L^A norm in x of that profile.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Literal, Sequence

import numpy as np

from restriction_lab._numerics import ordered_map
from restriction_lab.exceptions import DomainError, PreconditionError, RefinementError, UnsupportedError
from restriction_lab.models.lorentz import CensusRow, LorentzParams

if TYPE_CHECKING:
    from restriction_lab.config import LabConfig


logger = logging.getLogger(__name__)

EXPONENT_TOL = 1e-12
HY_OVERSAMPLE = 4

Checker = Literal["holder", "hausdorff_young", "minkowski", "interchange"]
CHECKERS: tuple[str, ...] = ("holder", "hausdorff_young", "minkowski", "interchange")


@dataclass(frozen=True)
class WeightedSamples:
    """Samples of a function on a discretized measure space.

    Attributes:
        values: Sample values, real or complex (M,).
        weights: Positive cell measures (M,).
        nodes: Optional 1-D coordinates of the samples.
        measure: Optional measure of the underlying patch; the weights must
            add up to it within 1e-10.
    """

    values: np.ndarray
    weights: np.ndarray
    nodes: np.ndarray | None = None
    measure: float | None = None

    def __post_init__(self) -> None:
        values = np.atleast_1d(np.asarray(self.values))
        weights = np.broadcast_to(np.asarray(self.weights, dtype=float), values.shape).copy()
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if values.ndim != 1:
            raise DomainError("WeightedSamples holds a flat sample set")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise DomainError("Weights must be positive and finite")
        if self.nodes is not None:
            nodes = np.asarray(self.nodes, dtype=float)
            if nodes.shape != values.shape:
                raise DomainError("nodes and values must have the same length")
            object.__setattr__(self, "nodes", nodes)
        if self.measure is not None:
            total = float(np.sum(weights))
            if abs(total - self.measure) > 1e-10 * max(1.0, abs(self.measure)):
                raise DomainError(f"Weights add up to {total}, expected {self.measure}")

    @classmethod
    def uniform(cls, values: Sequence[complex] | np.ndarray, step: float, start: float = 0.0) -> WeightedSamples:
        """Samples on the uniform grid start + step · j."""
        values = np.asarray(values)
        return cls(values, np.full(values.shape, float(step)), nodes=start + step * np.arange(values.size))

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def scaled(self, c: complex) -> WeightedSamples:
        return WeightedSamples(self.values * c, self.weights, self.nodes, self.measure)

    def permuted(self, order: np.ndarray) -> WeightedSamples:
        nodes = None if self.nodes is None else self.nodes[order]
        return WeightedSamples(self.values[order], self.weights[order], nodes, self.measure)

    def multiply(self, other: WeightedSamples) -> WeightedSamples:
        if other.values.shape != self.values.shape or not np.array_equal(other.weights, self.weights):
            raise PreconditionError("Products need samples on the same cells")
        return WeightedSamples(self.values * other.values, self.weights, self.nodes, self.measure)


@dataclass(frozen=True)
class ProductGridFunction:
    """Values u(x_i, y_j) on a product grid with separable weights wx_i · wy_j."""

    values: np.ndarray
    wx: np.ndarray
    wy: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        wx = np.asarray(self.wx, dtype=float)
        wy = np.asarray(self.wy, dtype=float)
        if values.ndim != 2 or values.shape != (wx.size, wy.size):
            raise DomainError("values must have shape (len(wx), len(wy))")
        if np.any(wx <= 0) or np.any(wy <= 0):
            raise DomainError("Weights must be positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "wx", wx)
        object.__setattr__(self, "wy", wy)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.wx, self.wy)

    @classmethod
    def rank_one(cls, g: np.ndarray, h: np.ndarray, wx: np.ndarray, wy: np.ndarray) -> ProductGridFunction:
        return cls(np.outer(g, h), wx, wy)


# -- kernels ---------------------------------------------------------------

def ratio(lhs: float, rhs: float) -> float:
    """lhs / rhs with 0/0 = 0 and c/0 = inf."""
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return lhs / rhs


def rearrangement(values: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Step-function decreasing rearrangement along the last axis.

    Returns the sorted moduli a_i with their weights. Ties are broken by
    weight so the result does not depend on the sample order.
    """
    mod = np.abs(np.asarray(values))
    w = np.broadcast_to(np.asarray(weights, dtype=float), mod.shape)
    order = np.lexsort((-w, -mod), axis=-1)
    a = np.take_along_axis(mod, order, axis=-1)
    w_sorted = np.take_along_axis(w, order, axis=-1)
    return a, w_sorted


def lorentz_rows(values: np.ndarray, weights: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """‖t^{1/α} f*(t)‖_{L^β(dt/t)} along the last axis, in closed form per step."""
    if math.isinf(alpha):
        raise UnsupportedError("Lorentz norms need a finite alpha")
    a, w = rearrangement(values, weights)
    T = np.cumsum(w, axis=-1)
    if math.isinf(beta):
        return np.max(a * T ** (1.0 / alpha), axis=-1)
    s = beta / alpha
    if s == 1.0:
        increments = w
    else:
        T_prev = np.concatenate([np.zeros(T.shape[:-1] + (1,)), T[..., :-1]], axis=-1)
        increments = (T**s - T_prev**s) / s
    return np.sum(a**beta * increments, axis=-1) ** (1.0 / beta)


def distribution_rows(values: np.ndarray, weights: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """‖λ μ(|f| >= λ)^{1/α}‖_{L^β(dλ/λ)} along the last axis."""
    a, w = rearrangement(values, weights)
    T = np.cumsum(w, axis=-1)
    if math.isinf(beta):
        return np.max(a * T ** (1.0 / alpha), axis=-1)
    a_next = np.concatenate([a[..., 1:], np.zeros(a.shape[:-1] + (1,))], axis=-1)
    terms = T ** (beta / alpha) * (a**beta - a_next**beta) / beta
    return np.sum(terms, axis=-1) ** (1.0 / beta)


def embedding_constant(alpha: float, beta1: float, beta2: float) -> float:
    """Sharp C in ‖f‖_{α,β₂} <= C ‖f‖_{α,β₁} for β₁ <= β₂."""
    if beta1 > beta2:
        raise PreconditionError("Lorentz embedding needs beta1 <= beta2")
    inv2 = 0.0 if math.isinf(beta2) else 1.0 / beta2
    return (beta1 / alpha) ** (1.0 / beta1 - inv2)


def _inverse(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def dual(p: float) -> float:
    """Conjugate exponent, with 1' = inf."""
    return math.inf if p == 1 else (1.0 if math.isinf(p) else p / (p - 1))


def _mixed(values: np.ndarray, wx: np.ndarray, wy: np.ndarray,
           outer: LorentzParams, inner: LorentzParams, inner_axis: str) -> float:
    if inner_axis == "y":
        profile = lorentz_rows(values, wy[None, :], inner.alpha, inner.beta)
        return float(lorentz_rows(profile, wx, outer.alpha, outer.beta))
    if inner_axis == "x":
        profile = lorentz_rows(values.T, wx[None, :], inner.alpha, inner.beta)
        return float(lorentz_rows(profile, wy, outer.alpha, outer.beta))
    raise ValueError("inner_axis must be 'x' or 'y'")


class Norms:
    """Lorentz norms, mixed norms and empirical-constant checkers.

    Example:
        f = WeightedSamples(np.array([3.0, 2.0, 1.0]), np.ones(3))
        lab.norms.distribution_function(f, 2.0)                       # 2.0
        lab.norms.lorentz_norm(f, LorentzParams(alpha=2, beta=2))     # sqrt(14)
    """

    def __init__(self, config: LabConfig) -> None:
        self._config = config

    # -- Lorentz norms -----------------------------------------------------

    def distribution_function(self, f: WeightedSamples, lam: float) -> float:
        """μ({|f| >= λ}): total weight of samples with modulus at least λ."""
        if lam < 0:
            raise PreconditionError("lambda must be nonnegative")
        return float(np.sum(f.weights[np.abs(f.values) >= lam]))

    def lorentz_norm(self, f: WeightedSamples, lp: LorentzParams) -> float:
        """Rearrangement-form norm ‖t^{1/α} f*(t)‖_{L^β(dt/t)}.

        Exact on the step-function rearrangement; L^{α,α} = L^α.
        """
        return float(lorentz_rows(f.values, f.weights, lp.alpha, lp.beta))

    def lorentz_norm_distribution(self, f: WeightedSamples, lp: LorentzParams) -> float:
        """Distribution-form norm; equals lorentz_norm / α^{1/β}."""
        return float(distribution_rows(f.values, f.weights, lp.alpha, lp.beta))

    def lebesgue_norm(self, f: WeightedSamples, p: float) -> float:
        mod = np.abs(f.values)
        if math.isinf(p):
            return float(np.max(mod))
        return float(np.sum(f.weights * mod**p) ** (1.0 / p))

    def mixed_lorentz_norm(
        self,
        f: ProductGridFunction,
        outer: LorentzParams,
        inner: LorentzParams,
        inner_axis: Literal["x", "y"] = "y",
    ) -> float:
        """Inner norm along ``inner_axis`` for every slice, then the outer norm."""
        return _mixed(f.values, f.wx, f.wy, outer, inner, inner_axis)

    # -- checkers ----------------------------------------------------------

    def check_holder(
        self,
        f: WeightedSamples,
        g: WeightedSamples,
        first: LorentzParams,
        second: LorentzParams,
        target: LorentzParams,
    ) -> float:
        """‖fg‖_{α,β} / (‖f‖_{α₁,β₁} ‖g‖_{α₂,β₂}).

        Raises:
            PreconditionError: 1/α ≠ 1/α₁ + 1/α₂ or 1/β ≠ 1/β₁ + 1/β₂.
        """
        if abs(1 / target.alpha - 1 / first.alpha - 1 / second.alpha) > EXPONENT_TOL:
            raise PreconditionError("Hölder needs 1/alpha = 1/alpha1 + 1/alpha2")
        if abs(_inverse(target.beta) - _inverse(first.beta) - _inverse(second.beta)) > EXPONENT_TOL:
            raise PreconditionError("Hölder needs 1/beta = 1/beta1 + 1/beta2")
        lhs = self.lorentz_norm(f.multiply(g), target)
        rhs = self.lorentz_norm(f, first) * self.lorentz_norm(g, second)
        return ratio(lhs, rhs)

    def check_hausdorff_young(
        self,
        u: WeightedSamples,
        p: float,
        band: float | None = None,
        oversample: int = HY_OVERSAMPLE,
    ) -> float:
        """‖û‖_{p'} / ‖u‖_{L^{p,p'}} on a uniform 1-D grid.

        û is the zero-padded DFT of the samples, evaluated over one period
        1/h of the frequency axis.

        Raises:
            DomainError: Grid is not uniform.
            RefinementError: Declared band exceeds 1/(2h).
        """
        if not 1 < p <= 2:
            raise PreconditionError("Hausdorff-Young needs 1 < p <= 2")
        h = _uniform_step(u)
        if band is not None and band > 1.0 / (2.0 * h):
            raise RefinementError(
                f"Band {band:g} exceeds the grid Nyquist frequency {1 / (2 * h):g}"
            )
        p_prime = dual(p)
        m = oversample * u.values.size
        spectrum = h * np.abs(np.fft.fft(u.values, n=m))
        lhs = float(np.sum(spectrum**p_prime / (m * h)) ** (1.0 / p_prime))
        rhs = self.lorentz_norm(u, LorentzParams(alpha=p, beta=p_prime))
        return ratio(lhs, rhs)

    def hausdorff_young_refined(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        p: float,
        half_width: float,
        start: int = 256,
        tol: float = 1e-4,
        max_size: int = 2**18,
    ) -> tuple[float, int]:
        """Refine a midpoint grid on [-L, L] until successive ratios agree.

        Returns:
            The ratio on the finest grid and its number of nodes.

        Raises:
            RefinementError: No agreement within ``max_size`` nodes.
        """
        previous = None
        size = start
        while size <= max_size:
            step = 2.0 * half_width / size
            nodes = -half_width + step * (np.arange(size) + 0.5)
            current = self.check_hausdorff_young(WeightedSamples.uniform(fn(nodes), step, nodes[0]), p)
            if previous is not None and abs(current - previous) <= tol:
                logger.debug("Hausdorff-Young ratio %.8f settled at %d nodes", current, size)
                return current, size
            previous = current
            size *= 2
        raise RefinementError(f"Hausdorff-Young ratio did not settle to {tol:g}")

    def check_minkowski(self, u: ProductGridFunction, p: float) -> float:
        """‖u‖_{L^{p'}_x L¹_y} / ‖u‖_{L¹_y L^{p'}_x}, at most 1."""
        p_prime = dual(p)
        lp = LorentzParams.lebesgue(p_prime)
        one = LorentzParams.lebesgue(1.0)
        lhs = self.mixed_lorentz_norm(u, outer=lp, inner=one, inner_axis="y")
        rhs = self.mixed_lorentz_norm(u, outer=one, inner=lp, inner_axis="x")
        return ratio(lhs, rhs)

    def check_interchange(self, u: ProductGridFunction, p: float) -> float:
        """‖u‖_{L^{p'}_x L^{p,p'}_y} / ‖u‖_{L^{p,p'}_y L^{p'}_x}."""
        p_prime = dual(p)
        lp = LorentzParams.lebesgue(p_prime)
        lorentz = LorentzParams(alpha=p, beta=p_prime)
        lhs = self.mixed_lorentz_norm(u, outer=lp, inner=lorentz, inner_axis="y")
        rhs = self.mixed_lorentz_norm(u, outer=lorentz, inner=lp, inner_axis="x")
        return ratio(lhs, rhs)

    # -- censuses ----------------------------------------------------------

    def census(
        self,
        checker: Checker,
        p: float,
        count: int = 1000,
        shape: tuple[int, int] = (8, 8),
        seed: int | None = None,
    ) -> list[CensusRow]:
        """Run a checker on a seeded random corpus.

        Item i draws from ``default_rng([seed, i])``, so rows do not depend
        on the worker count.
        """
        if checker not in CHECKERS:
            raise PreconditionError(f"Unknown checker '{checker}'", hint=", ".join(CHECKERS))
        base = self._config.seed if seed is None else seed

        def run(i: int) -> CensusRow:
            rng = np.random.default_rng([base, i])
            return CensusRow(checker=checker, p=p, seed=i, ratio=self._census_item(checker, p, shape, rng))

        rows = ordered_map(run, range(count), self._config.workers)
        logger.info("%s census at p=%g: max ratio %.6g over %d items",
                    checker, p, max((r.ratio for r in rows), default=0.0), count)
        return rows

    def _census_item(self, checker: str, p: float, shape: tuple[int, int], rng: np.random.Generator) -> float:
        if checker in ("minkowski", "interchange"):
            u = random_product_function(rng, shape)
            return self.check_minkowski(u, p) if checker == "minkowski" else self.check_interchange(u, p)
        if checker == "hausdorff_young":
            return self.check_hausdorff_young(random_compact_samples(rng, 64), p)
        # f in L^{2,inf}, g in L^{2,2}, product in L^{1,2}
        size = shape[0] * shape[1]
        weights = rng.uniform(0.5, 1.5, size) / size
        f = WeightedSamples(rng.pareto(2.0, size) + 1.0, weights)
        g = WeightedSamples(rng.standard_normal(size), weights)
        return self.check_holder(
            f, g,
            LorentzParams.weak(2.0),
            LorentzParams.lebesgue(2.0),
            LorentzParams(alpha=1.0, beta=2.0),
        )


def _uniform_step(u: WeightedSamples) -> float:
    w = u.weights
    h = float(w[0])
    if not np.allclose(w, h, rtol=1e-12, atol=0.0):
        raise DomainError("Hausdorff-Young check needs a uniform grid", hint="Use equal weights")
    if u.nodes is not None and u.nodes.size > 1:
        steps = np.diff(u.nodes)
        if not np.allclose(steps, h, rtol=1e-9, atol=0.0):
            raise DomainError("Nodes are not equispaced with the cell width")
    return h


def random_product_function(rng: np.random.Generator, shape: tuple[int, int]) -> ProductGridFunction:
    """Random complex values with random positive separable weights."""
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    wx = rng.uniform(0.5, 1.5, shape[0])
    wy = rng.uniform(0.5, 1.5, shape[1])
    return ProductGridFunction(values, wx / wx.sum(), wy / wy.sum())


def random_compact_samples(rng: np.random.Generator, size: int) -> WeightedSamples:
    """Random values supported in the middle half of a uniform grid on [0, 1)."""
    values = np.zeros(size, dtype=complex)
    lo, hi = size // 4, 3 * size // 4
    values[lo:hi] = rng.standard_normal(hi - lo) + 1j * rng.standard_normal(hi - lo)
    return WeightedSamples.uniform(values, 1.0 / size)
