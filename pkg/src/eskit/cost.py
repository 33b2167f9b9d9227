"""Cost functions and interval constants for extremum-seeking studies.

The central abstraction is :class:`CostFunction`, a scalar map ``h(x)`` with
optional metadata: a known minimiser, an exact first derivative, and a tag
that lets the compiled simulation kernels recognise the built-in costs.

Built-ins:

* ``benchmark(h0)`` -- piecewise quadratic/cosine/quadratic cost with a
  saddle at ``x = pi`` and global minimum at ``x = 2*pi`` (value ``h0 - 3``),
  deliberately non-symmetric around the minimiser.
* ``quadratic(x_star)`` -- ``(x - x_star)**2``, the symmetric reference case.
* ``constant(value)`` -- flat cost, useful for closed-form oscillation tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# kernel ids understood by eskit._kernels.cost_eval
KIND_BENCHMARK = 0
KIND_QUADRATIC = 1
KIND_CONSTANT = 2

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CostFunction:
    """Scalar cost ``h: R -> R``.

    ``eval`` must accept any finite float; it may or may not accept numpy
    arrays (``values`` probes and falls back to a python loop).  ``deriv``,
    when given, is the exact first derivative and is preferred over finite
    differences by the Taylor-expansion averages.  ``kernel_kind`` /
    ``kernel_param`` tag built-in costs so trajectory integration can run in
    the compiled backend; leave them unset for user-defined costs.
    """

    eval: Callable[[float], float]
    minimiser_hint: Optional[float] = None
    label: str = ""
    deriv: Optional[Callable[[float], float]] = None
    kernel_kind: Optional[int] = None
    kernel_param: float = 0.0

    def __call__(self, x):
        return self.eval(x)

    def values(self, xs) -> np.ndarray:
        """Evaluate on an array, tolerating scalar-only ``eval`` callables."""
        xs = np.asarray(xs, dtype=float)
        try:
            out = np.asarray(self.eval(xs), dtype=float)
            if out.shape == xs.shape:
                return out
        except (TypeError, ValueError):
            pass
        flat = np.array([float(self.eval(x)) for x in xs.ravel()])
        return flat.reshape(xs.shape)


@dataclass(frozen=True)
class IntervalConstants:
    """Grid estimates of the Lipschitz constant and magnitude bound of a cost
    on ``[center - radius, center + radius]``.

    These are lower estimates that converge to the true constants as the grid
    is refined; they are tuning guides, not certified bounds.
    """

    center: float
    radius: float
    lipschitz: float
    magnitude: float


def benchmark_cost(x, h0: float = 0.0):
    """Piecewise benchmark cost, continuous and strictly quasi-convex.

    ``h0 + (x-pi)**2 - 1`` for ``x < pi``; ``h0 + cos(x-pi) - 2`` on
    ``[pi, 2*pi)``; ``h0 + (x-2*pi)**2 - 3`` for ``x >= 2*pi``.  Saddle at
    ``pi``, global minimum ``h0 - 3`` at ``2*pi``.  Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    out = h0 + np.where(
        x < np.pi,
        (x - np.pi) ** 2 - 1.0,
        np.where(x < _TWO_PI, np.cos(x - np.pi) - 2.0, (x - _TWO_PI) ** 2 - 3.0),
    )
    return out if out.ndim else float(out)


def benchmark_derivative(x):
    """Exact branch-wise derivative of :func:`benchmark_cost` (h0-independent)."""
    x = np.asarray(x, dtype=float)
    out = np.where(
        x < np.pi,
        2.0 * (x - np.pi),
        np.where(x < _TWO_PI, -np.sin(x - np.pi), 2.0 * (x - _TWO_PI)),
    )
    return out if out.ndim else float(out)


def quadratic_cost(x, x_star: float = 0.0):
    """``(x - x_star)**2``; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = (x - x_star) ** 2
    return out if out.ndim else float(out)


def benchmark(h0: float = 0.0) -> CostFunction:
    h0 = float(h0)
    return CostFunction(
        eval=lambda x: benchmark_cost(x, h0),
        minimiser_hint=_TWO_PI,
        label=f"benchmark(h0={h0:g})",
        deriv=benchmark_derivative,
        kernel_kind=KIND_BENCHMARK,
        kernel_param=h0,
    )


def quadratic(x_star: float = 0.0) -> CostFunction:
    x_star = float(x_star)
    return CostFunction(
        eval=lambda x: quadratic_cost(x, x_star),
        minimiser_hint=x_star,
        label=f"quadratic(x_star={x_star:g})",
        deriv=lambda x: 2.0 * (np.asarray(x, dtype=float) - x_star),
        kernel_kind=KIND_QUADRATIC,
        kernel_param=x_star,
    )


def constant(value: float) -> CostFunction:
    value = float(value)
    return CostFunction(
        eval=lambda x: np.full_like(np.asarray(x, dtype=float), value) if np.ndim(x) else value,
        label=f"constant({value:g})",
        deriv=lambda x: np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0,
        kernel_kind=KIND_CONSTANT,
        kernel_param=value,
    )


def estimate_interval_constants(
    h: CostFunction, center: float, r: float, n: int = 4096
) -> IntervalConstants:
    """Estimate the Lipschitz constant and magnitude bound on ``center +- r``.

    Samples ``h`` on a uniform ``n``-point grid; the Lipschitz estimate is the
    largest adjacent secant slope, the magnitude estimate the largest ``|h|``.
    Both are nondecreasing under nested grid refinement (``n -> 2n - 1``).
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if n < 2:
        raise ValueError(f"need at least 2 grid points, got {n}")
    grid = np.linspace(center - r, center + r, n)
    vals = h.values(grid)
    slopes = np.abs(np.diff(vals) / np.diff(grid))
    return IntervalConstants(
        center=float(center),
        radius=float(r),
        lipschitz=float(slopes.max()),
        magnitude=float(np.abs(vals).max()),
    )


def numeric_derivative(h: CostFunction, x: float, order: int = 1, step: float | None = None) -> float:
    """Central finite-difference estimate of the ``order``-th derivative at ``x``.

    Uses the half-offset central stencil
    ``sum_i (-1)^i C(order, i) h(x + (order/2 - i) step) / step**order``.
    Default step: 1e-5 for first derivatives, 1e-3 for order >= 3 (round-off
    dominates sooner at high orders).
    """
    if order < 1:
        raise ValueError(f"derivative order must be >= 1, got {order}")
    if step is None:
        step = 1e-5 if order == 1 else 1e-3
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    acc = 0.0
    for i in range(order + 1):
        offset = (0.5 * order - i) * step
        acc += (-1.0) ** i * math.comb(order, i) * float(h.eval(x + offset))
    return acc / step**order
