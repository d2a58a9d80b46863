"""
Internal numerical kernels for Restriction Lab.

Finite differences, quadrature rules, the ordered worker pool and the
embedded Runge-Kutta pair. Not intended for direct use - use
RestrictionLab instead.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np
from numpy.polynomial import legendre, polynomial

from restriction_lab.exceptions import NumericalError


logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

GraphFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


# -- worker pool -----------------------------------------------------------

def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Map ``fn`` over ``items`` and return results in submission order.

    The result is independent of ``workers``: each item is reduced by a
    single worker and results are never combined across workers.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- quadrature ------------------------------------------------------------

def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def periodic_nodes(n: int, length: float = 2.0 * math.pi) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced nodes on [0, length) with the periodic trapezoidal weight."""
    x = np.arange(n) * (length / n)
    return x, np.full(n, length / n)


def box_grid(
    half_width: float | Sequence[float],
    resolution: int | Sequence[int],
    dim: int,
    center: Sequence[float] | None = None,
) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    """Cell-centred uniform grid on a box.

    Returns:
        points (M, dim), cell volumes (M,), grid shape.
    """
    half = np.broadcast_to(np.asarray(half_width, dtype=float), (dim,))
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (dim,))
    ctr = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    axes = []
    for j in range(dim):
        step = 2.0 * half[j] / res[j]
        axes.append(ctr[j] - half[j] + step * (np.arange(res[j]) + 0.5))
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    volume = float(np.prod(2.0 * half / res))
    return points, np.full(points.shape[0], volume), tuple(int(r) for r in res)


def lp_norm(values: np.ndarray, weights: np.ndarray, p: float, axis: int | None = None) -> np.ndarray:
    """Weighted L^p norm, sup norm for p = inf."""
    mod = np.abs(values)
    if math.isinf(p):
        return np.max(mod, axis=axis)
    return np.sum(weights * mod**p, axis=axis) ** (1.0 / p)


# -- finite differences ----------------------------------------------------

def gradient(f: GraphFn, x1: np.ndarray, x2: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Fourth-order central gradient of a graph function."""
    def d(g: Callable[[float], np.ndarray]) -> np.ndarray:
        return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h)

    f1 = d(lambda s: f(x1 + s, x2))
    f2 = d(lambda s: f(x1, x2 + s))
    return f1, f2


def hessian(f: GraphFn, x1: np.ndarray, x2: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Second-order central Hessian entries (f11, f12, f22)."""
    f0 = f(x1, x2)
    f11 = (f(x1 + h, x2) - 2 * f0 + f(x1 - h, x2)) / h**2
    f22 = (f(x1, x2 + h) - 2 * f0 + f(x1, x2 - h)) / h**2
    f12 = (
        f(x1 + h, x2 + h) - f(x1 + h, x2 - h) - f(x1 - h, x2 + h) + f(x1 - h, x2 - h)
    ) / (4 * h**2)
    for name, arr in (("f11", f11), ("f12", f12), ("f22", f22)):
        if not np.all(np.isfinite(arr)):
            raise NumericalError(f"Non-finite finite-difference estimate of {name}")
    return f11, f12, f22


def fan(count: int = 32, offset: float = 0.1234) -> np.ndarray:
    """Unit directions in the plane; the offset avoids coordinate axes."""
    angles = offset + np.pi * np.arange(count) / count
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def taylor_coefficients(
    g: Callable[[np.ndarray], np.ndarray],
    radius: float,
    degree: int,
) -> np.ndarray:
    """Scaled Taylor coefficients c_j radius^j of g at 0.

    Least-squares fit on Chebyshev points of [-radius, radius]; exact for
    polynomials of degree <= ``degree``.
    """
    m = 2 * (degree + 1)
    s = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    values = g(radius * s)
    if not np.all(np.isfinite(values)):
        raise NumericalError("Non-finite samples in Taylor fit")
    return polynomial.polyfit(s, values, degree)


# -- cutoffs ---------------------------------------------------------------

def smooth_step(s: np.ndarray) -> np.ndarray:
    """C^∞ step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        left = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        right = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return left / (left + right)


# -- embedded Runge-Kutta pair ---------------------------------------------

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_BP = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass(frozen=True)
class IntegrationResult:
    """Outcome of :func:`dopri54`.

    status is one of ``"reached"``, ``"blow_up"``, ``"step_underflow"``.
    """

    status: str
    t: float
    y: np.ndarray
    steps: int
    rejected: int
    min_step: float


def dopri54(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence[float],
    t1: float,
    rtol: float = 1e-10,
    atol: float = 1e-14,
    h_min: float = 1e-14,
    blow_up: float = 1e9,
    max_steps: int = 1_000_000,
    safety: float = 0.9,
) -> IntegrationResult:
    """Integrate y' = fun(t, y) from t0 to t1 (either direction) adaptively.

    Stops early when |y| exceeds ``blow_up`` or the step falls below ``h_min``.
    """
    direction = 1.0 if t1 >= t0 else -1.0
    t = float(t0)
    y = np.asarray(y0, dtype=float).copy()
    span = abs(t1 - t0)
    h = min(1e-3 * max(span, 1.0), span) if span > 0 else 0.0
    steps = rejected = 0
    smallest = math.inf

    if span == 0:
        return IntegrationResult("reached", t, y, 0, 0, 0.0)

    while steps < max_steps:
        if abs(t1 - t) <= 1e-15 * max(1.0, abs(t1)):
            return IntegrationResult("reached", t1, y, steps, rejected, smallest)
        h = min(h, abs(t1 - t))
        if h < h_min:
            logger.debug("step underflow at t=%g (h=%g)", t, h)
            return IntegrationResult("step_underflow", t, y, steps, rejected, h)

        k = np.empty((7, y.size))
        for i in range(7):
            yi = y + direction * h * sum(a * k[j] for j, a in enumerate(_A[i])) if i else y
            k[i] = fun(t + direction * _C[i] * h, yi)
        y_new = y + direction * h * (_B @ k)
        err_vec = direction * h * ((_B - _BP) @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if not np.all(np.isfinite(y_new)) or not math.isfinite(err):
            rejected += 1
            h *= 0.2
            continue

        if err <= 1.0:
            t += direction * h
            y = y_new
            steps += 1
            smallest = min(smallest, h)
            if np.max(np.abs(y)) > blow_up:
                return IntegrationResult("blow_up", t, y, steps, rejected, smallest)
            factor = 5.0 if err == 0 else min(5.0, safety * err ** (-1 / 5))
        else:
            rejected += 1
            factor = max(0.2, safety * err ** (-1 / 5))
        h *= factor

    raise NumericalError(f"Integrator exceeded {max_steps} steps", hint="Loosen rtol")
