"""
Surface-related models.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from restriction_lab._numerics import gradient


class SurfaceKind(str, Enum):
    """The five surface families."""

    SPHERE = "sphere"
    PARABOLOID = "paraboloid"
    HYPERBOLOID = "hyperboloid"
    CONE = "cone"
    FINITE_TYPE = "finitetype"


DEFAULT_CONE_R0 = 0.5
DEFAULT_CONE_R1 = 2.0
AREA_STEP = 1e-4


def polynomial_coefficients(raw: dict[str, float] | None) -> dict[tuple[int, int], float]:
    """Parse ``{"i,j": c}`` into ``{(i, j): c}`` (c ξ₁^i ξ₂^j)."""
    parsed: dict[tuple[int, int], float] = {}
    for key, value in (raw or {}).items():
        i, j = (int(part) for part in str(key).split(","))
        if i < 0 or j < 0:
            raise ValueError(f"negative exponent in coefficient key '{key}'")
        parsed[(i, j)] = float(value)
    return parsed


class SurfaceDescriptor(BaseModel):
    """A parametrized hypersurface patch.

    Charts:
        sphere: iterated angles (θ₁..θ_{n-2} in [0, π], θ_{n-1} in [0, 2π]).
        paraboloid, hyperboloid: graph over ξ' in a box of R^{n-1}.
        cone: graph τ = |ξ| over ξ in R^n, restricted to r0 <= |ξ| <= r1.
        finitetype: graph ξ₃ = a(ξ₁, ξ₂) ξ₁^k over a box of R² (n = 3).

    Attributes:
        kind: Surface family.
        n: Ambient dimension (for the cone, the dimension of the ξ slice).
        lower: Lower corner of the chart box.
        upper: Upper corner of the chart box.
        r0: Inner cone radius.
        r1: Outer cone radius.
        k: Type exponent of the finite-type graph.
        coefficients: Polynomial coefficients of a, keys "i,j".
        a_fn: Callable a(ξ₁, ξ₂) used instead of coefficients.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: SurfaceKind
    n: int = Field(..., ge=2)
    lower: list[float]
    upper: list[float]
    r0: float = Field(DEFAULT_CONE_R0, gt=0)
    r1: float = Field(DEFAULT_CONE_R1, gt=0)
    k: int | None = Field(None, ge=2)
    coefficients: dict[str, float] | None = None
    a_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = Field(None, exclude=True)

    @field_validator("coefficients")
    @classmethod
    def _check_coefficients(cls, value: dict[str, float] | None) -> dict[str, float] | None:
        polynomial_coefficients(value)
        return value

    @model_validator(mode="after")
    def _check_patch(self) -> SurfaceDescriptor:
        if len(self.lower) != self.chart_dim or len(self.upper) != self.chart_dim:
            raise ValueError(f"{self.kind.value} patch needs {self.chart_dim} bounds per corner")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("patch box must have lower < upper on every axis")
        if self.kind is SurfaceKind.CONE:
            if self.r0 >= self.r1:
                raise ValueError("cone radii must satisfy r0 < r1")
        if self.kind is SurfaceKind.FINITE_TYPE:
            if self.n != 3:
                raise ValueError("finite-type surfaces live in R^3 (n = 3)")
            if self.k is None:
                raise ValueError("finite-type surfaces need k")
            if self.coefficients is None and self.a_fn is None:
                raise ValueError("finite-type surfaces need coefficients or a_fn")
        return self

    # -- constructors ------------------------------------------------------

    @classmethod
    def sphere(cls, n: int = 2) -> SurfaceDescriptor:
        lower = [0.0] * (n - 1)
        upper = [math.pi] * (n - 2) + [2.0 * math.pi]
        return cls(kind=SurfaceKind.SPHERE, n=n, lower=lower, upper=upper)

    @classmethod
    def paraboloid(cls, n: int = 2, half_width: float = 1.0) -> SurfaceDescriptor:
        return cls(kind=SurfaceKind.PARABOLOID, n=n,
                   lower=[-half_width] * (n - 1), upper=[half_width] * (n - 1))

    @classmethod
    def hyperboloid(cls, n: int = 2, half_width: float = 1.0) -> SurfaceDescriptor:
        return cls(kind=SurfaceKind.HYPERBOLOID, n=n,
                   lower=[-half_width] * (n - 1), upper=[half_width] * (n - 1))

    @classmethod
    def cone(cls, n: int = 2, r0: float = DEFAULT_CONE_R0, r1: float = DEFAULT_CONE_R1) -> SurfaceDescriptor:
        return cls(kind=SurfaceKind.CONE, n=n, lower=[-r1] * n, upper=[r1] * n, r0=r0, r1=r1)

    @classmethod
    def finite_type(
        cls,
        k: int,
        coefficients: dict[str, float] | None = None,
        a_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
        half_width: float = 0.5,
    ) -> SurfaceDescriptor:
        if coefficients is None and a_fn is None:
            coefficients = {"0,0": 1.0}
        return cls(kind=SurfaceKind.FINITE_TYPE, n=3, k=k, coefficients=coefficients, a_fn=a_fn,
                   lower=[-half_width] * 2, upper=[half_width] * 2)

    # -- geometry ----------------------------------------------------------

    @property
    def chart_dim(self) -> int:
        if self.kind is SurfaceKind.CONE:
            return self.n
        if self.kind is SurfaceKind.FINITE_TYPE:
            return 2
        return self.n - 1

    @property
    def ambient_dim(self) -> int:
        """Dimension of the space the surface sits in (n + 1 for the cone)."""
        return self.n + 1 if self.kind is SurfaceKind.CONE else self.n

    @property
    def diameter(self) -> float:
        """Euclidean diameter of the chart box."""
        return float(np.linalg.norm(np.subtract(self.upper, self.lower)))

    def a(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """The smooth factor a(ξ₁, ξ₂) of a finite-type graph."""
        if self.a_fn is not None:
            return np.asarray(self.a_fn(x1, x2), dtype=float)
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        total = np.zeros(np.broadcast(x1, x2).shape)
        for (i, j), c in polynomial_coefficients(self.coefficients).items():
            total = total + c * x1**i * x2**j
        return total

    def graph(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """f(ξ₁, ξ₂) = a(ξ₁, ξ₂) ξ₁^k."""
        if self.kind is not SurfaceKind.FINITE_TYPE:
            raise ValueError("graph() is defined for finite-type surfaces")
        return self.a(x1, x2) * np.asarray(x1, dtype=float) ** self.k

    def in_patch(self, chart_pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        """Boolean mask of chart points inside the patch."""
        pts = np.atleast_2d(np.asarray(chart_pts, dtype=float))
        inside = np.all((pts >= np.asarray(self.lower) - tol) & (pts <= np.asarray(self.upper) + tol), axis=-1)
        if self.kind is SurfaceKind.CONE:
            r = np.linalg.norm(pts, axis=-1)
            inside &= (r >= self.r0 - tol) & (r <= self.r1 + tol)
        return inside

    def embed(self, chart_pts: np.ndarray) -> np.ndarray:
        """Map chart points (..., chart_dim) to ambient points (..., ambient_dim)."""
        pts = np.asarray(chart_pts, dtype=float)
        if self.kind is SurfaceKind.SPHERE:
            return sphere_embed(pts)
        if self.kind is SurfaceKind.PARABOLOID:
            last = 0.5 * np.sum(pts**2, axis=-1, keepdims=True)
            return np.concatenate([pts, last], axis=-1)
        if self.kind is SurfaceKind.HYPERBOLOID:
            last = np.sqrt(1.0 + np.sum(pts**2, axis=-1, keepdims=True))
            return np.concatenate([pts, last], axis=-1)
        if self.kind is SurfaceKind.CONE:
            tau = np.linalg.norm(pts, axis=-1, keepdims=True)
            return np.concatenate([pts, tau], axis=-1)
        last = self.graph(pts[..., 0], pts[..., 1])[..., None]
        return np.concatenate([pts, last], axis=-1)


def sphere_embed(angles: np.ndarray) -> np.ndarray:
    """Iterated angular coordinates (..., n-1) to unit vectors (..., n)."""
    angles = np.asarray(angles, dtype=float)
    m = angles.shape[-1]
    out = np.empty(angles.shape[:-1] + (m + 1,))
    running = np.ones(angles.shape[:-1])
    for j in range(m):
        out[..., j] = running * np.cos(angles[..., j])
        running = running * np.sin(angles[..., j])
    out[..., m] = running
    return out


def sphere_jacobian(angles: np.ndarray) -> np.ndarray:
    """Angular Jacobian ∏ sin^{n-1-j}(θ_j); identically 1 for the circle."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    m = angles.shape[-1]
    jac = np.ones(angles.shape[:-1])
    for j in range(m - 1):
        jac = jac * np.sin(angles[..., j]) ** (m - 1 - j)
    return jac


class ExponentPair(BaseModel):
    """Exponents (p, q) of a restriction estimate R_S(p -> q).

    Attributes:
        p: Lebesgue exponent on the physical side, 1 < p <= 2.
        q: Lebesgue exponent on the surface, q >= 1.
    """

    model_config = ConfigDict(frozen=True)

    p: float = Field(..., gt=1, le=2)
    q: float = Field(..., ge=1)

    @classmethod
    def from_primes(cls, p_prime: float, q: float) -> ExponentPair:
        """Build from the extension-side exponent p' and q."""
        if p_prime < 2:
            raise ValueError("p' must be at least 2")
        return cls(p=p_prime / (p_prime - 1), q=q)

    @property
    def p_prime(self) -> float:
        return math.inf if self.p == 1 else self.p / (self.p - 1)

    @property
    def q_prime(self) -> float:
        return math.inf if self.q == 1 else self.q / (self.q - 1)


class ContactOrder(BaseModel):
    """Type of a surface point.

    Attributes:
        order: Smallest order with a nonzero derivative, or max_k.
        exact: False when every probe vanished up to max_k ("≥ max_k").
        max_k: Largest probed order.
    """

    order: int
    exact: bool
    max_k: int

    def at_least(self, k: int) -> bool:
        return self.order >= k

    def __str__(self) -> str:
        return str(self.order) if self.exact else f">= {self.max_k}"


class MeasureWeight(BaseModel):
    """Density of dσ against the coordinate measure of the chart.

    sphere: angular Jacobian; paraboloid: 1 (dξ'); hyperboloid:
    (1 + |ξ'|²)^{-1/2}; cone: 1/|ξ|; finite type: the area element
    (1 + |∇f|²)^{1/2}, differentiated with a step of 1e-4 times the patch diameter.
    """

    model_config = ConfigDict(frozen=True)

    surface: SurfaceDescriptor

    def __call__(self, chart_pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(chart_pts, dtype=float))
        kind = self.surface.kind
        if kind is SurfaceKind.SPHERE:
            return sphere_jacobian(pts)
        if kind is SurfaceKind.HYPERBOLOID:
            return 1.0 / np.sqrt(1.0 + np.sum(pts**2, axis=-1))
        if kind is SurfaceKind.CONE:
            return 1.0 / np.linalg.norm(pts, axis=-1)
        if kind is SurfaceKind.FINITE_TYPE:
            f1, f2 = gradient(self.surface.graph, pts[:, 0], pts[:, 1], AREA_STEP * self.surface.diameter)
            return np.sqrt(1.0 + f1**2 + f2**2)
        return np.ones(pts.shape[0])
