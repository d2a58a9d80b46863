"""
Common models used across the lab.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class DecayFit(BaseModel):
    """Least-squares decay rate of |(u dσ)∨(Rω)| along a ray.

    Attributes:
        slope: Fitted slope of log envelope against log R.
        intercept: Fitted intercept.
        radii: Sampled radii.
        envelope: Envelope values at the radii.
    """

    slope: float
    intercept: float
    direction: list[float]
    radii: list[float] = Field(default_factory=list)
    envelope: list[float] = Field(default_factory=list)


class ExtensionRatioReport(BaseModel):
    """Lower bound for the truncated extension constant.

    Attributes:
        ratio: max over the trial family of ‖(u dσ)∨‖_{L^{p'}(box)} / ‖u‖_{L^{q'}(dσ)}.
        best: Name of the maximizing density.
        ratios: Ratio per trial density.
        skipped: Densities with ‖u‖ below 1e-14.
    """

    p_prime: float
    q_prime: float
    box: float
    ratio: float
    best: str = ""
    ratios: dict[str, float] = Field(default_factory=dict)
    skipped: list[str] = Field(default_factory=list)


class RunManifest(BaseModel):
    """Header embedded in every JSON artifact.

    Attributes:
        subcommand: CLI subcommand that produced the artifact.
        version: Package version.
        config_hash: sha256 of the canonical config.
        seed: Seed of every random corpus of the run.
        parameters: Effective subcommand parameters.
    """

    subcommand: str
    version: str
    config_hash: str
    seed: int
    parameters: dict[str, object] = Field(default_factory=dict)


class AcceptanceItem(BaseModel):
    """One row of the acceptance table.

    Attributes:
        criterion: Criterion number.
        name: Short name.
        passed: Whether the criterion holds.
        value: Measured value the verdict was taken on.
        tolerance: Bound the value was compared with.
        detail: Human-readable summary.
    """

    criterion: int
    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""
