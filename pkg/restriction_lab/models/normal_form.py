"""
Normal-form models: surfaces f = a·ξ₁^k and the singular Cauchy problem.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from restriction_lab.models.surface import SurfaceDescriptor, polynomial_coefficients


class NormalFormSurface(BaseModel):
    """Graph ξ₃ = a(ξ₁, ξ₂) ξ₁^k near the origin.

    Attributes:
        k: Exponent, at least 2.
        coefficients: Polynomial coefficients of a, keys "i,j".
        a_fn: Callable a(ξ₁, ξ₂) used instead of coefficients.
        half_width: Half-width of the square patch.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k: int = Field(..., ge=2)
    coefficients: dict[str, float] | None = None
    a_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = Field(None, exclude=True)
    half_width: float = Field(0.5, gt=0)

    @field_validator("coefficients")
    @classmethod
    def _check_coefficients(cls, value: dict[str, float] | None) -> dict[str, float] | None:
        polynomial_coefficients(value)
        return value

    @model_validator(mode="after")
    def _need_a(self) -> NormalFormSurface:
        if self.coefficients is None and self.a_fn is None:
            raise ValueError("a normal-form surface needs coefficients or a_fn")
        return self

    def to_descriptor(self) -> SurfaceDescriptor:
        return SurfaceDescriptor.finite_type(
            self.k, coefficients=self.coefficients, a_fn=self.a_fn, half_width=self.half_width
        )

    def a(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return self.to_descriptor().a(x1, x2)

    def f(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return self.a(x1, x2) * np.asarray(x1, dtype=float) ** self.k


class OdeSolution(BaseModel):
    """Closed-form solution φ(t) = s (At + B)^{1/(1-α)} of φφ'' = α φ'².

    ``sign = 0`` is the trivial solution φ ≡ 0.
    """

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=3)
    sign: int = 1
    A: float = 1.0
    B: float = 0.0

    @field_validator("sign")
    @classmethod
    def _check_sign(cls, value: int) -> int:
        if value not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        return value

    @field_validator("A")
    @classmethod
    def _check_a(cls, value: float) -> float:
        if value == 0:
            raise ValueError("A must be nonzero")
        return value

    @property
    def alpha_exact(self) -> Fraction:
        return Fraction(self.k - 1, self.k - 2)

    @property
    def alpha(self) -> float:
        return float(self.alpha_exact)

    @property
    def exponent(self) -> int:
        """1/(1 - α), always the integer -(k - 2)."""
        value = 1 / (1 - self.alpha_exact)
        assert value.denominator == 1
        return int(value)

    @property
    def singular_point(self) -> float:
        return -self.B / self.A

    @property
    def domain(self) -> tuple[float, float]:
        if self.A > 0:
            return (self.singular_point, float("inf"))
        return (float("-inf"), self.singular_point)

    def contains(self, t: np.ndarray) -> bool:
        lo, hi = self.domain
        t = np.asarray(t, dtype=float)
        return bool(np.all((t > lo) & (t < hi)))

    def phi(self, t: np.ndarray) -> np.ndarray:
        base = self.A * np.asarray(t, dtype=float) + self.B
        return self.sign * base ** float(self.exponent)

    def dphi(self, t: np.ndarray) -> np.ndarray:
        m = self.exponent
        base = self.A * np.asarray(t, dtype=float) + self.B
        return self.sign * m * self.A * base ** float(m - 1)

    def ddphi(self, t: np.ndarray) -> np.ndarray:
        m = self.exponent
        base = self.A * np.asarray(t, dtype=float) + self.B
        return self.sign * m * (m - 1) * self.A**2 * base ** float(m - 2)


class OdeStatus(str, Enum):
    BLOW_UP = "blow_up"
    REACHES_ZERO = "reaches_zero"
    FALSIFIED = "falsified"


class OdeVerdict(BaseModel):
    """Outcome of integrating φφ'' = α φ'² backward from t₀ toward 0.

    Attributes:
        status: blow_up, reaches_zero (with φ(0) >= margin) or falsified.
        t_star: Time where |(φ, φ')| exceeded the blow-up threshold.
        phi_at_zero: φ(0) when t = 0 was reached.
        margin: Threshold 1e-6 · c for reaching 0.
        underflow: Blow-up was inferred from a step-size underflow.
        steps: Accepted steps.
    """

    k: int
    t0: float
    c: float
    d: float
    status: OdeStatus
    t_star: float | None = None
    phi_at_zero: float | None = None
    margin: float
    underflow: bool = False
    steps: int = 0

    @property
    def supports_claim(self) -> bool:
        return self.status is not OdeStatus.FALSIFIED


class CheckResult(BaseModel):
    """One itemized check of a normal-form verification."""

    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""


class NormalFormReport(BaseModel):
    """Checks (i) contact order, (ii) bounded quotient, (iii) curvature, (iv) type along ξ₂."""

    k: int
    checks: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]
