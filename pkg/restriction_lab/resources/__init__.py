"""
Resource modules for Restriction Lab.
"""

from restriction_lab.resources.surfaces import Surfaces
from restriction_lab.resources.norms import Norms
from restriction_lab.resources.extension import Extension
from restriction_lab.resources.knapp import Knapp
from restriction_lab.resources.slicing import Slicing
from restriction_lab.resources.normal_form import NormalForm

__all__ = [
    "Surfaces",
    "Norms",
    "Extension",
    "Knapp",
    "Slicing",
    "NormalForm",
]
