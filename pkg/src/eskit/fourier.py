"""Dither signal, perturbed cost readout, and its Fourier coefficients.

The perturbed readout ``y(x, t) = h(x + delta * sin(2*pi*t))`` is 1-periodic
in ``t`` for frozen ``x``; its Fourier coefficients are computed by composite
trapezoid quadrature over one period, which is spectrally accurate for smooth
integrands and better than O(n^-2) for the piecewise-smooth built-ins.

Only ``a_0`` and ``b_1`` enter the averaged dynamics; the higher harmonics
are exposed for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cost import CostFunction

DEFAULT_N_QUAD = 4096
DEFAULT_K_MAX = 8

_TWO_PI = 2.0 * np.pi


def dither(t):
    """Probing signal ``sin(2*pi*t)``, period exactly 1."""
    return np.sin(_TWO_PI * np.asarray(t, dtype=float))


def y_delta(h: CostFunction, x: float, delta: float, t):
    """Perturbed cost readout ``h(x + delta * dither(t))``."""
    if delta <= 0:
        raise ValueError(f"dither amplitude must be positive, got {delta}")
    t = np.asarray(t, dtype=float)
    out = h.values(x + delta * np.sin(_TWO_PI * t))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class FourierCoefficients:
    """Truncated Fourier series of ``t -> y(x, t)`` at frozen ``x``.

    ``a`` holds ``a_0 .. a_{k_max}``, ``b`` holds ``b_1 .. b_{k_max}``.
    """

    x: float
    delta: float
    k_max: int
    a: np.ndarray
    b: np.ndarray

    def series(self, t) -> np.ndarray:
        """Evaluate the truncated series ``a0/2 + sum a_k cos + b_k sin``."""
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, 0.5 * self.a[0])
        for k in range(1, self.k_max + 1):
            out += self.a[k] * np.cos(_TWO_PI * k * t)
            out += self.b[k - 1] * np.sin(_TWO_PI * k * t)
        return out


def _period_grid(n_quad: int):
    t = np.linspace(0.0, 1.0, n_quad + 1)
    return t, np.sin(_TWO_PI * t)


def fourier_coefficients(
    h: CostFunction,
    x: float,
    delta: float,
    k_max: int = DEFAULT_K_MAX,
    n_quad: int = DEFAULT_N_QUAD,
) -> FourierCoefficients:
    """Fourier coefficients of the perturbed readout by periodic quadrature.

    ``a_k = 2 * integral_0^1 y(x,t) cos(2 pi k t) dt`` and likewise with sine
    for ``b_k``, evaluated with an ``n_quad``-panel composite trapezoid rule.
    Requires ``n_quad >= 8 * k_max`` to keep the top harmonic well clear of
    the aliasing limit.
    """
    if delta <= 0:
        raise ValueError(f"dither amplitude must be positive, got {delta}")
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if n_quad < 8 * k_max:
        raise ValueError(f"n_quad={n_quad} too small for k_max={k_max}; need >= {8 * k_max}")
    t, s = _period_grid(n_quad)
    y = h.values(x + delta * s)
    dx = 1.0 / n_quad
    a = np.empty(k_max + 1)
    b = np.empty(k_max)
    a[0] = 2.0 * np.trapezoid(y, dx=dx)
    for k in range(1, k_max + 1):
        a[k] = 2.0 * np.trapezoid(y * np.cos(_TWO_PI * k * t), dx=dx)
        b[k - 1] = 2.0 * np.trapezoid(y * np.sin(_TWO_PI * k * t), dx=dx)
    return FourierCoefficients(x=float(x), delta=float(delta), k_max=k_max, a=a, b=b)


def a0(h: CostFunction, x: float, delta: float, n_quad: int = DEFAULT_N_QUAD) -> float:
    """Zeroth cosine coefficient, ``2 * integral_0^1 y(x, t) dt``."""
    if delta <= 0:
        raise ValueError(f"dither amplitude must be positive, got {delta}")
    _, s = _period_grid(n_quad)
    y = h.values(x + delta * s)
    return 2.0 * float(np.trapezoid(y, dx=1.0 / n_quad))


def b1(h: CostFunction, x: float, delta: float, n_quad: int = DEFAULT_N_QUAD) -> float:
    """First sine coefficient; the averaged drift is ``-(gamma/2) * b1``."""
    if delta <= 0:
        raise ValueError(f"dither amplitude must be positive, got {delta}")
    _, s = _period_grid(n_quad)
    y = h.values(x + delta * s)
    return 2.0 * float(np.trapezoid(y * s, dx=1.0 / n_quad))


def delta_star_lower(
    alpha: Callable[[float], float] | None,
    s: float,
    n_quad: int = DEFAULT_N_QUAD,
) -> float:
    """Lower amplitude-bound function ``2 * integral_0^{1/2} alpha(s sin(2 pi t)) dt``.

    ``alpha`` must be class-K-infinity (zero at zero, strictly increasing);
    this is the caller's responsibility and is only spot-checked on three
    points.  ``alpha=None`` selects the identity.
    """
    if s < 0:
        raise ValueError(f"argument must be nonnegative, got {s}")
    if alpha is None:
        alpha = lambda v: v
    scale = s if s > 0 else 1.0
    probes = [0.0, 0.5 * scale, scale]
    vals = [float(alpha(p)) for p in probes]
    if abs(vals[0]) > 1e-12 or not (vals[0] < vals[1] < vals[2]):
        raise ValueError("alpha fails the class-K spot check (alpha(0)=0, strictly increasing)")
    t = np.linspace(0.0, 0.5, n_quad + 1)
    integrand = np.array([float(alpha(v)) for v in s * np.sin(_TWO_PI * t)])
    return 2.0 * float(np.trapezoid(integrand, dx=0.5 / n_quad))
