"""
Knapp scaling models.
"""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class KnappParams(BaseModel):
    """Anisotropic Knapp scaling u(λξ₁, λ^ε ξ₂).

    Attributes:
        k: Type of the surface point.
        lam: Scale λ > 1.
        eps: Second-axis exponent ε > 0.
        p_prime: Extension-side exponent.
        q: Restriction-side exponent.
    """

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=2)
    lam: float = Field(2.0, gt=1)
    eps: float = Field(1.0, gt=0)
    p_prime: float = Field(..., gt=1)
    q: float = Field(..., ge=1)


class NecessityStatus(str, Enum):
    CONSISTENT = "consistent"
    VIOLATED = "violated"


class NecessityVerdict(BaseModel):
    """Verdict on p' >= (k + 1) q.

    Attributes:
        status: consistent or violated.
        witness_eps: ε with the most negative exponent when violated.
        witness_exponent: Exponent at the witness.
        sufficient_range: p' > 4, p' >= k + 2 and p' >= (k + 1) q all hold.
    """

    k: int
    p_prime: float
    q: float
    status: NecessityStatus
    witness_eps: float | None = None
    witness_exponent: float | None = None
    sufficient_range: bool = False


class KnappSample(BaseModel):
    """One λ of a slope fit (one CSV row, λ exported as ``lambda``)."""

    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(..., alias="lambda")
    lhs_norm: float
    ratio: float
    log_ratio: float


class KnappFit(BaseModel):
    """Fitted against predicted λ-exponent.

    Attributes:
        predicted: (1 + ε)/q - (1 + k + ε)/p'.
        fitted: Least-squares slope of log ratio against log λ.
        samples: Per-λ measurements.
    """

    k: int
    eps: float
    p_prime: float
    q: float
    predicted: float
    fitted: float
    samples: list[KnappSample] = Field(default_factory=list)

    @property
    def error(self) -> float:
        return abs(self.fitted - self.predicted)


class Admissibility(BaseModel):
    """Exponent conditions for a cone or surface of dimension n.

    Attributes:
        admissible: Necessary compact-case conditions hold.
        scale_invariant: p'/(n + 1) = q/(n - 1) and p' > 2n/(n - 1).
        known_range: Threshold on p' of the ranges quoted as known.
        in_known_range: p' lies above that threshold.
    """

    n: int
    p_prime: float
    q: float
    admissible: bool
    scale_invariant: bool
    known_range: float | None = None
    in_known_range: bool | None = None
