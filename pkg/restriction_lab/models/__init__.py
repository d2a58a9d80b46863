"""
Pydantic models for Restriction Lab.
"""

from restriction_lab.models.surface import (
    ContactOrder,
    ExponentPair,
    MeasureWeight,
    SurfaceDescriptor,
    SurfaceKind,
)
from restriction_lab.models.lorentz import CensusRow, LorentzParams
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
from restriction_lab.models.knapp import (
    Admissibility,
    KnappFit,
    KnappParams,
    KnappSample,
    NecessityStatus,
    NecessityVerdict,
)
from restriction_lab.models.normal_form import (
    CheckResult,
    NormalFormReport,
    NormalFormSurface,
    OdeSolution,
    OdeStatus,
    OdeVerdict,
)
from restriction_lab.models.common import AcceptanceItem, DecayFit, ExtensionRatioReport, RunManifest

__all__ = [
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
    "KnappSample",
    "NecessityStatus",
    "NecessityVerdict",
    "Admissibility",
    "NormalFormSurface",
    "OdeSolution",
    "OdeStatus",
    "OdeVerdict",
    "CheckResult",
    "NormalFormReport",
    "AcceptanceItem",
    "DecayFit",
    "ExtensionRatioReport",
    "RunManifest",
]
