"""
Normal-form resource: developability, the singular Cauchy problem and the
normal form f = a·ξ₁^k of surfaces of finite type.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Callable

import numpy as np

from restriction_lab._numerics import GraphFn, dopri54, fan, hessian, ordered_map, taylor_coefficients
from restriction_lab.exceptions import DomainError, NumericalError, PreconditionError
from restriction_lab.models.normal_form import (
    CheckResult,
    NormalFormReport,
    NormalFormSurface,
    OdeSolution,
    OdeStatus,
    OdeVerdict,
)
from restriction_lab.resources.surfaces import Surfaces

if TYPE_CHECKING:
    from restriction_lab.config import LabConfig


logger = logging.getLogger(__name__)

ODE_RTOL = 1e-10
ODE_BLOW_UP = 1e9
ODE_MIN_STEP = 1e-14
ODE_MARGIN = 1e-6
SWEEP_T0 = 0.1

CURVATURE_TOL = 1e-6
TAYLOR_TOL = 1e-5
FLAT_TOL = 1e-12
VANISHING_TOL = 1e-10
QUOTIENT_LEVELS = 12
QUOTIENT_GROWTH = 4.0
NEWTON_ITERATIONS = 50

Curve = Callable[[np.ndarray], np.ndarray]


def twisted_cubic() -> tuple[Curve, Curve, Curve]:
    """r(s) = (s, s², s³) with its first two derivatives."""
    def r(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.stack([s, s**2, s**3], axis=-1)

    def dr(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.stack([np.ones_like(s), 2 * s, 3 * s**2], axis=-1)

    def ddr(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.stack([np.zeros_like(s), 2 * np.ones_like(s), 6 * s], axis=-1)

    return r, dr, ddr


def random_quadratic_form(dim: int, kernel_dims: int, seed: int = 0, degree: int = 2) -> Callable[[np.ndarray], np.ndarray]:
    """f(ξ) = ⟨M(ξ) ξ', ξ'⟩ with ξ' the first ``kernel_dims`` coordinates.

    Entries of M are seeded random polynomials of total degree ``degree``
    in all of ξ.
    """
    if not 0 < kernel_dims <= dim:
        raise PreconditionError("Need 0 < kernel_dims <= dim")
    rng = np.random.default_rng([seed, 5])
    # one random coefficient per (row, column, monomial)
    powers = [p for p in np.ndindex(*(degree + 1,) * dim) if sum(p) <= degree]
    coeffs = rng.normal(size=(kernel_dims, kernel_dims, len(powers)))

    def f(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        monomials = np.stack([np.prod(pts ** np.asarray(p), axis=-1) for p in powers], axis=-1)
        M = np.einsum("ijm,km->kij", coeffs, monomials)
        x = pts[:, :kernel_dims]
        return np.einsum("ki,kij,kj->k", x, M, x)

    return f


class NormalForm:
    """Checks on developable surfaces and the ODE behind their normal form.

    Example:
        sol = OdeSolution(k=3, A=1.0, B=1.0)
        lab.normal_form.ode_residual(sol, np.linspace(0, 10, 100))    # ~1e-16
        cyl = NormalFormSurface(k=3, coefficients={"0,0": 1.0})
        lab.normal_form.verify_normal_form(cyl).passed                 # True
    """

    def __init__(self, config: LabConfig, surfaces: Surfaces) -> None:
        self._config = config
        self._surfaces = surfaces

    # -- developability ----------------------------------------------------

    def curvature_residual(
        self,
        f: GraphFn,
        points: np.ndarray,
        diameter: float = 1.0,
    ) -> float:
        """max |f₁₁f₂₂ - f₁₂²| / max(1, ½‖Hess f‖²_F) over ``points`` (M, 2).

        The residual lies in [0, 1]; it is 1 on the elliptic paraboloid.

        Raises:
            NumericalError: Non-finite finite differences.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        h = self._config.fd_step * diameter
        f11, f12, f22 = hessian(f, pts[:, 0], pts[:, 1], h)
        scale = np.maximum(1.0, 0.5 * (f11**2 + 2.0 * f12**2 + f22**2))
        return float(np.max(np.abs(f11 * f22 - f12**2) / scale))

    # -- singular Cauchy problem -------------------------------------------

    def ode_residual(self, sol: OdeSolution, t: np.ndarray) -> float:
        """max |φφ'' - α φ'²| with closed-form derivatives.

        Raises:
            PreconditionError: A node outside the domain of the solution.
        """
        t = np.asarray(t, dtype=float)
        if sol.sign == 0:
            return 0.0
        if not sol.contains(t):
            lo, hi = sol.domain
            raise PreconditionError(f"t-grid leaves the domain ({lo:g}, {hi:g})",
                                    hint=f"Exclude the singular point t = {sol.singular_point:g}")
        phi, dphi, ddphi = sol.phi(t), sol.dphi(t), sol.ddphi(t)
        return float(np.max(np.abs(phi * ddphi - sol.alpha * dphi**2)))

    def ode_no_nontrivial_solution(self, k: int, t0: float, c: float, d: float) -> OdeVerdict:
        """Integrate φφ'' = α φ'² backward from φ(t₀) = c, φ'(t₀) = d toward 0.

        Blowing up before 0, or reaching 0 with φ(0) >= 1e-6·c, is consistent
        with the absence of a nontrivial solution vanishing at 0; reaching 0
        with a smaller φ(0) falsifies it. A step-size underflow is reported
        as a blow-up with ``underflow`` set.
        """
        if k < 3:
            raise PreconditionError("The singular Cauchy problem needs k >= 3")
        if t0 <= 0 or c <= 0:
            raise PreconditionError("Need t0 > 0 and c > 0")
        alpha = (k - 1) / (k - 2)
        margin = ODE_MARGIN * c

        def rhs(_t: float, y: np.ndarray) -> np.ndarray:
            return np.array([y[1], alpha * y[1] ** 2 / y[0]])

        try:
            result = dopri54(rhs, t0, [c, d], 0.0, rtol=ODE_RTOL, h_min=ODE_MIN_STEP, blow_up=ODE_BLOW_UP)
        except NumericalError:
            logger.warning("Integrator gave up for k=%d c=%g d=%g", k, c, d)
            raise
        base = {"k": k, "t0": t0, "c": c, "d": d, "margin": margin, "steps": result.steps}
        if result.status == "blow_up":
            return OdeVerdict(status=OdeStatus.BLOW_UP, t_star=result.t, **base)
        if result.status == "step_underflow":
            logger.debug("step underflow at t=%g, reported as blow-up", result.t)
            return OdeVerdict(status=OdeStatus.BLOW_UP, t_star=result.t, underflow=True, **base)
        phi0 = float(result.y[0])
        status = OdeStatus.REACHES_ZERO if phi0 >= margin else OdeStatus.FALSIFIED
        if status is OdeStatus.FALSIFIED:
            logger.warning("k=%d c=%g d=%g reaches 0 with phi(0)=%.3g < %.3g", k, c, d, phi0, margin)
        return OdeVerdict(status=status, phi_at_zero=phi0, **base)

    def ode_sweep(self, k: int, count: int = 100, seed: int | None = None,
                  t0: float = SWEEP_T0) -> list[OdeVerdict]:
        """Seeded sweep over c in [0.1, 10], d in [-10, 10]."""
        base = self._config.seed if seed is None else seed
        initial = []
        for i in range(count):
            rng = np.random.default_rng([base, 6, i])
            initial.append((float(rng.uniform(0.1, 10.0)), float(rng.uniform(-10.0, 10.0))))
        verdicts = ordered_map(lambda cd: self.ode_no_nontrivial_solution(k, t0, *cd), initial,
                               self._config.workers)
        falsified = sum(v.status is OdeStatus.FALSIFIED for v in verdicts)
        logger.info("ODE sweep k=%d: %d runs, %d falsifying", k, count, falsified)
        return verdicts

    # -- normal form -------------------------------------------------------

    def verify_normal_form(
        self,
        surface: NormalFormSurface | GraphFn,
        k: int | None = None,
        half_width: float | None = None,
    ) -> NormalFormReport:
        """Itemized check that f has the form a·ξ₁^k near 0.

        (i) contact order at 0 is at least k; (ii) f/ξ₁^k stays bounded and
        Lipschitz as ξ₁ -> 0; (iii) the curvature residual vanishes on the
        patch; (iv) the contact order is exactly k at points (0, ξ₂).

        Raises:
            PreconditionError: k < 2, or a raw graph without k.
        """
        if isinstance(surface, NormalFormSurface):
            f: GraphFn = surface.f
            k = surface.k if k is None else k
            w = surface.half_width if half_width is None else half_width
        else:
            if k is None:
                raise PreconditionError("A raw graph needs the claimed k")
            f, w = surface, 0.5 if half_width is None else half_width
        if k < 2:
            raise PreconditionError("k must be at least 2")
        diameter = 2.0 * w
        checks = [
            self._contact_check(f, k, diameter),
            self._quotient_check(f, k, w),
            self._curvature_check(f, w, diameter),
            self._propagation_check(f, k, w, diameter),
        ]
        report = NormalFormReport(k=k, checks=checks)
        if report.passed:
            logger.info("Normal form with k=%d verified", k)
        else:
            logger.info("Normal form with k=%d fails: %s", k, ", ".join(report.failures))
        return report

    def _contact_check(self, f: GraphFn, k: int, diameter: float) -> CheckResult:
        order = self._surfaces.contact_order(f, (0.0, 0.0), max_k=k + 2, diameter=diameter)
        return CheckResult(name="contact_order", passed=order.at_least(k), value=float(order.order),
                           detail=f"order {order}")

    def _quotient_check(self, f: GraphFn, k: int, w: float) -> CheckResult:
        levels = w * 0.5 ** np.arange(1, QUOTIENT_LEVELS + 1)
        x2 = np.linspace(-0.5 * w, 0.5 * w, 9)
        x1 = np.concatenate([levels, -levels])
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.asarray(f(X1, X2), dtype=float) / X1**k
        if not np.all(np.isfinite(q)):
            return CheckResult(name="bounded_quotient", passed=False, detail="non-finite quotient")
        q = np.abs(np.stack([q[:QUOTIENT_LEVELS], q[QUOTIENT_LEVELS:]]))
        size = np.max(q, axis=(0, 2))
        slope = np.max(np.abs(np.diff(q, axis=1)), axis=(0, 2)) / levels[1:]
        half = QUOTIENT_LEVELS // 2
        bound = QUOTIENT_GROWTH * max(float(np.max(size[:half])), float(np.max(slope[:half])), 1e-300)
        deep = max(float(np.max(size[half:])), float(np.max(slope[half:])))
        return CheckResult(name="bounded_quotient", passed=deep <= bound, value=deep, tolerance=bound,
                           detail="sup of |f/ξ₁^k| and its first differences near ξ₁ = 0")

    def _curvature_check(self, f: GraphFn, w: float, diameter: float) -> CheckResult:
        axis = np.linspace(-0.5 * w, 0.5 * w, 9)
        X1, X2 = np.meshgrid(axis, axis, indexing="ij")
        residual = self.curvature_residual(f, np.stack([X1.ravel(), X2.ravel()], axis=-1), diameter)
        return CheckResult(name="curvature", passed=residual <= CURVATURE_TOL, value=residual,
                           tolerance=CURVATURE_TOL)

    def _propagation_check(self, f: GraphFn, k: int, w: float, diameter: float) -> CheckResult:
        orders = []
        for x2 in np.linspace(-0.5 * w, 0.5 * w, 5):
            order = self._surfaces.contact_order(f, (0.0, float(x2)), max_k=k + 2, diameter=diameter)
            orders.append(order)
        passed = all(o.exact and o.order == k for o in orders)
        return CheckResult(name="type_propagation", passed=passed,
                           value=float(max(o.order for o in orders)),
                           detail="orders along ξ₁ = 0: " + ", ".join(str(o) for o in orders))

    def flat_along_axis(self, surface: NormalFormSurface, resolution: int = 33) -> bool:
        """f(0, ξ₂) = 0 on the patch to 1e-12."""
        x2 = np.linspace(-surface.half_width, surface.half_width, resolution)
        return bool(np.max(np.abs(surface.f(np.zeros_like(x2), x2))) <= FLAT_TOL)

    def taylor_consistent(self, surface: NormalFormSurface) -> bool:
        """∂^β f(0) = 0 for |β| <= k - 1, probed along a fan of directions.

        A homogeneous polynomial of degree j vanishing on more than j
        directions vanishes, so the radial Taylor coefficients of order < k
        decide all partial derivatives of that order.
        """
        directions = fan()
        radius = 0.1 * 2.0 * surface.half_width

        def radial(s: np.ndarray) -> np.ndarray:
            return surface.f(s[:, None] * directions[None, :, 0], s[:, None] * directions[None, :, 1])

        coeffs = np.abs(taylor_coefficients(radial, radius, surface.k + 4))
        scale = float(np.max(coeffs))
        if scale == 0.0:
            return True
        return bool(np.all(coeffs[:surface.k] <= TAYLOR_TOL * scale))

    def tangent_developable(
        self,
        curve: tuple[Curve, Curve, Curve] | None = None,
        s0: float = 0.0,
        v0: float = 1.0,
    ) -> GraphFn:
        """Graph over the tangent plane of X(s, v) = r(s) + v r'(s) at X(s0, v0).

        The frame is read off the second fundamental form at the base
        point: the eigenvector of the zero eigenvalue (the ruling) becomes
        the ξ₂ axis, the other principal direction the ξ₁ axis. Graph values
        are found by Newton's method on the tangential coordinates.

        Raises:
            DomainError: The base point is singular (v0 = 0 or r' ∥ r'').
        """
        r, dr, ddr = curve or twisted_cubic()
        s_arr = np.array([s0])
        p0 = r(s_arr)[0] + v0 * dr(s_arr)[0]
        xs = dr(s_arr)[0] + v0 * ddr(s_arr)[0]
        xv = dr(s_arr)[0]
        normal = np.cross(xs, xv)
        if v0 == 0.0 or np.linalg.norm(normal) < 1e-12:
            raise DomainError("Tangent developable is singular at the base point")
        normal = normal / np.linalg.norm(normal)

        # second fundamental form in an orthonormal tangent basis
        e1 = xv / np.linalg.norm(xv)
        e2 = np.cross(normal, e1)
        h = 1e-4
        basis = np.stack([xs, xv])
        coords = np.stack([basis @ e1, basis @ e2], axis=1)   # tangent vectors in (e1, e2)
        # X_ss·n, X_sv·n, X_vv·n by central differences of X_s, X_v
        xss = ((dr(s_arr + h) + v0 * ddr(s_arr + h)) - (dr(s_arr - h) + v0 * ddr(s_arr - h)))[0] / (2 * h)
        xsv = ddr(s_arr)[0]
        raw = np.array([[xss @ normal, xsv @ normal], [xsv @ normal, 0.0]])
        inv = np.linalg.inv(coords)
        second = inv @ raw @ inv.T
        eigvals, eigvecs = np.linalg.eigh(second)
        ruling = eigvecs[:, int(np.argmin(np.abs(eigvals)))]
        axis2 = ruling[0] * e1 + ruling[1] * e2
        axis1 = np.cross(normal, axis2)
        logger.debug("Tangent developable frame: principal curvatures %s", eigvals.tolist())

        def f(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
            x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
            shape = x1.shape
            target = np.stack([x1.ravel(), x2.ravel()], axis=-1)
            s = np.full(target.shape[0], s0)
            v = np.full(target.shape[0], v0)
            for _ in range(NEWTON_ITERATIONS):
                point = r(s) + v[:, None] * dr(s) - p0
                residual = np.stack([point @ axis1, point @ axis2], axis=-1) - target
                ds_vec = dr(s) + v[:, None] * ddr(s)
                dv_vec = dr(s)
                J = np.stack([
                    np.stack([ds_vec @ axis1, dv_vec @ axis1], axis=-1),
                    np.stack([ds_vec @ axis2, dv_vec @ axis2], axis=-1),
                ], axis=-2)
                step = np.linalg.solve(J, residual[..., None])[..., 0]
                s = s - step[:, 0]
                v = v - step[:, 1]
                if np.max(np.abs(step)) < 1e-15:
                    break
            point = r(s) + v[:, None] * dr(s) - p0
            return (point @ normal).reshape(shape)

        return f

    # -- quadratic normal form ---------------------------------------------

    def second_order_vanishing(
        self,
        f: Callable[[np.ndarray], np.ndarray],
        dim: int,
        kernel_dims: int,
        half_width: float = 0.5,
        resolution: int = 5,
    ) -> bool:
        """f and ∇f vanish on {ξ' = 0}, ξ' the first ``kernel_dims`` coordinates.

        Tested on a grid of ξ'' in the cube of half-width ``half_width``
        against 1e-10 times the size of f on the cube.
        """
        if not 0 < kernel_dims <= dim:
            raise PreconditionError("Need 0 < kernel_dims <= dim")
        rest = dim - kernel_dims
        axis = np.linspace(-half_width, half_width, resolution)
        if rest:
            mesh = np.meshgrid(*([axis] * rest), indexing="ij")
            tail = np.stack([m.ravel() for m in mesh], axis=-1)
        else:
            tail = np.zeros((1, 0))
        base = np.concatenate([np.zeros((tail.shape[0], kernel_dims)), tail], axis=-1)

        cube = np.stack([m.ravel() for m in np.meshgrid(*([axis] * dim), indexing="ij")], axis=-1)
        scale = max(1.0, float(np.max(np.abs(f(cube)))))
        tol = VANISHING_TOL * scale

        if np.max(np.abs(f(base))) > tol:
            return False
        h = self._config.fd_step * 2.0 * half_width
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = h
            derivative = (-f(base + 2 * e) + 8 * f(base + e) - 8 * f(base - e) + f(base - 2 * e)) / (12 * h)
            if not np.all(np.isfinite(derivative)):
                raise NumericalError("Non-finite finite-difference gradient")
            if np.max(np.abs(derivative)) > tol:
                return False
        return True
