"""
Models for slicing chains and transferred constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from restriction_lab.models.surface import ExponentPair

# rounding slack of the upper bound against the measured lower bound
SANDWICH_RTOL = 1e-9


class ChainId(str, Enum):
    """Inequality chains, one per slicing."""

    SPHERE = "sphere"
    PARAB = "parab"
    HYPERB = "hyperb"
    FINITE_TYPE = "finitetype"


class ChainMode(str, Enum):
    """Whole cone (scale invariant exponents) or compact piece."""

    WHOLE = "whole"
    COMPACT = "compact"


@dataclass(frozen=True)
class NullCoords:
    """Null coordinates (a', a_n, b) of points of R^{n+1}.

    Arrays share their leading shape; ``a_prime`` has a trailing axis of
    length n - 1.
    """

    a_prime: np.ndarray
    a_n: np.ndarray
    b: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return np.concatenate([self.a_prime, np.asarray(self.a_n)[..., None]], axis=-1)

    @property
    def stacked(self) -> np.ndarray:
        """(a', a_n, b) as one array with a trailing axis of length n + 1."""
        return np.concatenate(
            [self.a_prime, np.asarray(self.a_n)[..., None], np.asarray(self.b)[..., None]], axis=-1
        )


class ChainLink(BaseModel):
    """One inequality (or identity) of a chain.

    Attributes:
        name: Link name.
        lhs: Measured left-hand side.
        rhs: Measured right-hand side.
        ratio: lhs / rhs, 0 when both vanish.
        identity: True for links that are exact equalities.
        nominal: Known constant of the inequality, if any.
        violated: RHS vanished while LHS did not.
    """

    name: str
    lhs: float
    rhs: float
    ratio: float
    identity: bool = False
    nominal: float | None = None
    violated: bool = False


class ChainReport(BaseModel):
    """Per-link record of a verified chain.

    Attributes:
        chain: Chain identifier.
        mode: Whole-cone or compact route.
        n: Dimension of the ξ variable of the cone.
        exponents: Exponent pair (p, q).
        c_slice: Slice restriction constant the slice link was measured against.
        links: Links in display order.
        density: Short description of the input density.
        u_norm: ‖u‖_{L^{q'}(dσ)} of the input density.
        route_factor: Factor the last links multiplied C_slice by.
        trivial: u vanished, every link is vacuous.
    """

    chain: ChainId
    mode: ChainMode
    n: int
    exponents: ExponentPair
    c_slice: float
    links: list[ChainLink] = Field(default_factory=list)
    density: str = ""
    u_norm: float = 0.0
    route_factor: float = 1.0
    trivial: bool = False

    @property
    def violations(self) -> list[str]:
        return [link.name for link in self.links if link.violated]

    @property
    def ok(self) -> bool:
        return not self.violations

    def link(self, name: str) -> ChainLink:
        for item in self.links:
            if item.name == name:
                return item
        raise KeyError(name)

    @property
    def lhs(self) -> float:
        """‖(u dσ)∨‖_{L^{p'}} measured by the first link."""
        return self.links[0].lhs if self.links else 0.0

    @property
    def rhs(self) -> float:
        """Right-hand side of the last link."""
        return self.links[-1].rhs if self.links else 0.0


class SliceProblem(BaseModel):
    """Oscillatory integral along a curve of finite type.

    Attributes:
        psi: Phase ψ on [-a, a] with type k at 0.
        k: Type of ψ at 0.
        a: Half-length of the domain of ψ.
        delta: Half-width of the integration interval, below a.
        p_prime: Exponent of the extension side.
        q: Exponent of the restriction side.
        box: Half-width of the evaluation box in (x₁, x₂).
        resolution: Evaluation points per axis.
        nodes: Quadrature nodes on (-δ, δ).
        count: Trial densities in the random family.
        seed: Seed of the random family.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    psi: Callable[[np.ndarray], np.ndarray] = Field(..., exclude=True)
    k: int = Field(..., ge=2)
    a: float = Field(1.0, gt=0)
    delta: float = Field(0.5, gt=0)
    p_prime: float = Field(..., gt=2)
    q: float = Field(..., ge=1)
    box: float = Field(8.0, gt=0)
    resolution: int = Field(24, ge=2)
    nodes: int = Field(256, ge=8)
    count: int = Field(12, ge=0)
    seed: int = 0

    @property
    def q_prime(self) -> float:
        return math.inf if self.q == 1 else self.q / (self.q - 1)


class SliceVerdict(BaseModel):
    """Result of the slice oracle.

    Attributes:
        constant: Largest measured ratio (a lower bound for the true constant).
        admissible: Exponents satisfy p' > 4, p' >= k + 2, p' >= (k + 1) q.
        verdict: "inside theorem" or "outside theorem".
        type_ok: ψ has type k at 0 to finite-difference tolerance.
        best: Name of the maximizing trial density.
        sweep: Constants of a parametrized phase family, if swept.
    """

    constant: float
    admissible: bool
    verdict: str
    type_ok: bool
    best: str = ""
    sweep: dict[str, float] = Field(default_factory=dict)

    @property
    def sweep_spread(self) -> float:
        """max / min of the swept constants (1 when nothing was swept)."""
        values = [v for v in self.sweep.values() if v > 0]
        return max(values) / min(values) if values else 1.0


class TransferBound(BaseModel):
    """Cone constant transferred from a slice constant.

    Attributes:
        chain: Chain identifier.
        mode: Whole-cone or compact route.
        exponents: Exponent pair (p, q).
        c_slice: Slice restriction constant.
        link_constants: Calibrated constant per link.
        route_constant: C_slice times the route factor (‖F‖_{α,∞} for the
            whole cone, |ring|^{1/p-1/q'} · sup F on a compact piece).
        bound: Transferred upper bound for the cone constant.
        lower_bound: Largest measured extension ratio on the cone, if compared.
    """

    chain: ChainId
    mode: ChainMode
    exponents: ExponentPair
    c_slice: float = Field(..., ge=0)
    link_constants: dict[str, float] = Field(default_factory=dict)
    route_constant: float
    bound: float
    lower_bound: float | None = None

    @model_validator(mode="after")
    def _finite(self) -> TransferBound:
        if not math.isfinite(self.bound):
            raise ValueError("transferred bound is not finite")
        return self

    @property
    def margin(self) -> float | None:
        """bound / lower_bound, above 1 when the sandwich holds."""
        if self.lower_bound is None:
            return None
        return math.inf if self.lower_bound == 0 else self.bound / self.lower_bound

    @property
    def holds(self) -> bool | None:
        if self.lower_bound is None:
            return None
        return self.lower_bound <= self.bound * (1.0 + SANDWICH_RTOL)
