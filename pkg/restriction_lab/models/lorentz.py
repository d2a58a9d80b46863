"""
Lorentz-space models.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator


class LorentzParams(BaseModel):
    """Indices (α, β) of a Lorentz space L^{α,β}.

    Attributes:
        alpha: Primary index, finite and positive.
        beta: Secondary index, positive; ``math.inf`` for weak L^α.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0)
    beta: float = Field(..., gt=0)

    @field_validator("alpha")
    @classmethod
    def _finite_alpha(cls, value: float) -> float:
        if math.isinf(value):
            raise ValueError("alpha must be finite")
        return value

    @classmethod
    def lebesgue(cls, p: float) -> LorentzParams:
        """L^{p,p} = L^p."""
        return cls(alpha=p, beta=p)

    @classmethod
    def weak(cls, alpha: float) -> LorentzParams:
        return cls(alpha=alpha, beta=math.inf)

    @property
    def is_weak(self) -> bool:
        return math.isinf(self.beta)

    def __str__(self) -> str:
        beta = "inf" if self.is_weak else f"{self.beta:g}"
        return f"L^({self.alpha:g},{beta})"


class CensusRow(BaseModel):
    """One row of an empirical-constant census.

    Attributes:
        checker: Checker name (holder, hausdorff_young, minkowski, interchange).
        p: Exponent the checker ran at.
        seed: Seed of the random input.
        ratio: Measured ratio.
    """

    checker: str
    p: float
    seed: int
    ratio: float
