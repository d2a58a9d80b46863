"""
Restriction Lab

Numerical checks of Fourier restriction estimates for cones, conic
sections and surfaces of finite type.

Example usage:
    from restriction_lab import RestrictionLab, ExponentPair, ChainId

    lab = RestrictionLab(seed=0)
    pair = ExponentPair.from_primes(6.0, 2.0)
    c = lab.slicing.slice_constant(ChainId.SPHERE, 2, pair)
    report = lab.slicing.verify_chain(ChainId.SPHERE, lambda xi: 1.0 + 0 * xi[:, 0], pair, c)
    print(report.link("regrouping").ratio)
"""

from restriction_lab.lab import RestrictionLab
from restriction_lab.config import LabConfig
from restriction_lab.exceptions import (
    LabError,
    DomainError,
    SingularPointError,
    NumericalError,
    RefinementError,
    PreconditionError,
    ModeError,
    UnsupportedError,
    ConfigurationError,
    is_lab_error,
    is_refinement_error,
    exit_code_for,
)
from restriction_lab.models import (
    SurfaceKind,
    SurfaceDescriptor,
    MeasureWeight,
    ExponentPair,
    ContactOrder,
    LorentzParams,
    CensusRow,
    ChainId,
    ChainMode,
    ChainLink,
    ChainReport,
    NullCoords,
    SliceProblem,
    SliceVerdict,
    TransferBound,
    KnappParams,
    KnappFit,
    NecessityVerdict,
    Admissibility,
    NormalFormSurface,
    OdeSolution,
    OdeVerdict,
    NormalFormReport,
    DecayFit,
    ExtensionRatioReport,
)
from restriction_lab.resources.extension import EvalGrid, SampledDensity
from restriction_lab.resources.norms import ProductGridFunction, WeightedSamples

__version__ = "1.0.0"
__all__ = [
    # Lab
    "RestrictionLab",
    # Config
    "LabConfig",
    # Exceptions
    "LabError",
    "DomainError",
    "SingularPointError",
    "NumericalError",
    "RefinementError",
    "PreconditionError",
    "ModeError",
    "UnsupportedError",
    "ConfigurationError",
    "is_lab_error",
    "is_refinement_error",
    "exit_code_for",
    # Models
    "SurfaceKind",
    "SurfaceDescriptor",
    "MeasureWeight",
    "ExponentPair",
    "ContactOrder",
    "LorentzParams",
    "CensusRow",
    "ChainId",
    "ChainMode",
    "ChainLink",
    "ChainReport",
    "NullCoords",
    "SliceProblem",
    "SliceVerdict",
    "TransferBound",
    "KnappParams",
    "KnappFit",
    "NecessityVerdict",
    "Admissibility",
    "NormalFormSurface",
    "OdeSolution",
    "OdeVerdict",
    "NormalFormReport",
    "DecayFit",
    "ExtensionRatioReport",
    # Sample containers
    "SampledDensity",
    "EvalGrid",
    "WeightedSamples",
    "ProductGridFunction",
]
