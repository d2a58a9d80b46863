"""
Main Restriction Lab entry point.
"""

from __future__ import annotations

from restriction_lab.config import (
    LabConfig,
    DEFAULT_ALIAS_BOUND,
    DEFAULT_FD_STEP,
    DEFAULT_FORMAT,
)
from restriction_lab.resources.surfaces import Surfaces
from restriction_lab.resources.norms import Norms
from restriction_lab.resources.extension import Extension
from restriction_lab.resources.knapp import Knapp
from restriction_lab.resources.slicing import Slicing
from restriction_lab.resources.normal_form import NormalForm


class RestrictionLab:
    """Numerical laboratory for Fourier restriction estimates.

    Measures extension ratios on spheres, conic sections, cones and
    surfaces of finite type, verifies the inequality chains that transfer
    slice constants to the cone, and checks the exponent conditions and
    normal forms behind them.

    Args:
        seed: Seed for every random corpus. Falls back to RESTRICTION_LAB_SEED.
        workers: Worker threads for sweeps. Falls back to RESTRICTION_LAB_WORKERS.
        out_dir: Artifact directory. Falls back to RESTRICTION_LAB_OUT_DIR.
        fd_step: Finite-difference step relative to the patch diameter.
        alias_bound: Bound on h · max|x| · 2π for extension sums.
        config: LabConfig instance (overrides other args).

    Example:
        from restriction_lab import RestrictionLab, SampledDensity, EvalGrid

        lab = RestrictionLab(seed=7)

        # Extension of arc length on the circle
        circle = lab.surfaces.sphere(n=2)
        density = SampledDensity.from_grid(circle, lab.surfaces.grid(circle, 4096), 1.0)
        values = lab.extension.extend(density, EvalGrid.box(5.0, 64, 2))

        # Exponent conditions for the cone
        lab.knapp.scale_invariant(2, 6.0, 2.0)     # True
    """

    def __init__(
        self,
        seed: int | None = None,
        workers: int | None = None,
        out_dir: str | None = None,
        fd_step: float | None = None,
        alias_bound: float | None = None,
        config: LabConfig | None = None,
    ) -> None:
        if config is not None:
            self._config = config
        else:
            self._config = LabConfig(
                seed=seed,
                workers=workers,
                out_dir=out_dir,
                format=DEFAULT_FORMAT,
                fd_step=fd_step if fd_step is not None else DEFAULT_FD_STEP,
                alias_bound=alias_bound if alias_bound is not None else DEFAULT_ALIAS_BOUND,
            )

        # Lazy-initialized resources
        self._surfaces: Surfaces | None = None
        self._norms: Norms | None = None
        self._extension: Extension | None = None
        self._knapp: Knapp | None = None
        self._slicing: Slicing | None = None
        self._normal_form: NormalForm | None = None

    @property
    def config(self) -> LabConfig:
        """Get the lab configuration."""
        return self._config

    @property
    def surfaces(self) -> Surfaces:
        """Surface descriptors, measures, grids, curvature and contact order."""
        if self._surfaces is None:
            self._surfaces = Surfaces(self._config)
        return self._surfaces

    @property
    def norms(self) -> Norms:
        """Lorentz and mixed norms, inequality checkers and censuses."""
        if self._norms is None:
            self._norms = Norms(self._config)
        return self._norms

    @property
    def extension(self) -> Extension:
        """Extension operator, extension ratios and decay fits."""
        if self._extension is None:
            self._extension = Extension(self._config)
        return self._extension

    @property
    def knapp(self) -> Knapp:
        """Exponent conditions, Knapp exponents and scaling fits."""
        if self._knapp is None:
            self._knapp = Knapp(self._config, self.extension, self.surfaces)
        return self._knapp

    @property
    def slicing(self) -> Slicing:
        """Cone slicings, chain verification and transferred constants."""
        if self._slicing is None:
            self._slicing = Slicing(self._config, self.surfaces, self.norms, self.extension, self.knapp)
        return self._slicing

    @property
    def normal_form(self) -> NormalForm:
        """Curvature residuals, the singular Cauchy problem and normal forms."""
        if self._normal_form is None:
            self._normal_form = NormalForm(self._config, self.surfaces)
        return self._normal_form
