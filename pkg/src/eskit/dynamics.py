"""Right-hand sides of the extremum-seeking loops and a fixed-step integrator.

All systems use the period-1 dither ``sin(2*pi*t)``; times are measured in
dither periods.  The schemes:

* ``classic_es``        dx/dt = -gamma * h(x + delta u(t)) * u(t)
* ``hpf_es``            classic loop driven by the high-pass residual
                        ``y - ybar`` with the filter  dybar/dt = gamma (y - ybar)
* ``fourier_average``   dx/dt = -(gamma/2) * b1(x), the period average of the
                        classic loop expressed through the first sine
                        coefficient of the perturbed readout
* ``hpf_average``       cascade of ``fourier_average`` with the linear filter
                        dybar/dt = -gamma ybar + gamma a0(x)/2
* ``taylor_first_order_average`` / ``taylor_full_average``
                        gradient-flow approximations of ``fourier_average``
                        from the Taylor expansion of h
* ``support_oscillator`` dx/dt = -gamma h(x) u(t), the large-offset proxy of
                        the classic loop, with a separable closed form.

``integrate`` runs classical RK4 with a fixed step.  Systems built from the
built-in costs carry a kernel tag and are dispatched to compiled loops (see
:mod:`eskit.backend`); everything else runs through the generic python loop.
Both paths use identical stage arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels, backend
from .cost import CostFunction, numeric_derivative
from .fourier import DEFAULT_N_QUAD, a0, b1, dither, y_delta

DEFAULT_DT = 1.0 / 200.0

_TWO_PI = 2.0 * np.pi


class NonFiniteStateError(RuntimeError):
    """A state component left the finite floating-point domain."""


class SupportDomainError(RuntimeError):
    """The support oscillator hit |h| < 1e-12 where its closed form breaks."""


@dataclass(frozen=True)
class SimParams:
    """Tunable pair (gamma, delta) plus initial conditions and time grid.

    ``t_end`` and ``dt`` are in dither periods; ``dt`` must resolve the
    period with at least 100 steps.  ``ybar0`` is only used by the high-pass
    schemes and defaults to ``h(x0)`` when left unset.
    """

    gamma: float
    delta: float
    x0: float
    t_end: float
    dt: float = DEFAULT_DT
    ybar0: Optional[float] = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.t_end < 1:
            raise ValueError(f"t_end must cover at least one dither period, got {self.t_end}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.dt > 1.0 / 100.0 + 1e-15:
            raise ValueError(f"dt={self.dt} too coarse; need at least 100 steps per period")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled states; ``states`` has one row per sample."""

    times: np.ndarray
    states: np.ndarray
    labels: tuple

    def component(self, which) -> np.ndarray:
        """Column by integer index or label."""
        if isinstance(which, str):
            which = self.labels.index(which)
        return self.states[:, which]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class KernelSpec:
    """Tag telling integrate() which compiled loop implements the system."""

    scheme: str
    kind: int
    param: float
    gamma: float
    delta: float
    n_quad: int = 0
    coeffs: tuple = ()
    fd_step: float = 0.0


@dataclass(frozen=True)
class OdeSystem:
    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    label: str
    default_initial: np.ndarray
    kernel: Optional[KernelSpec] = None
    state_labels: tuple = ("x",)


def integrate(system: OdeSystem, initial, params: SimParams) -> Trajectory:
    """Classical 4th-order Runge-Kutta from 0 to ``t_end`` with step ``dt``.

    ``initial=None`` selects the system's default initial state.  Raises
    :class:`NonFiniteStateError` as soon as a state component is NaN/inf
    (tuning errors surface instead of being clamped away).
    """
    if initial is None:
        y0 = np.array(system.default_initial, dtype=float)
    else:
        y0 = np.atleast_1d(np.asarray(initial, dtype=float))
    if y0.shape != (system.dimension,):
        raise ValueError(f"initial state has shape {y0.shape}, system dimension is {system.dimension}")
    n = params.n_steps
    dt = params.t_end / n
    times = np.linspace(0.0, params.t_end, n + 1)

    if system.kernel is not None and backend.use_numba():
        states = _run_kernel(system.kernel, y0, n, dt)
    else:
        states = _rk4_python(system.rhs, y0, n, dt)
    return Trajectory(times=times, states=states, labels=system.state_labels)


def _rk4_python(rhs, y0, n, dt):
    out = np.empty((n + 1, y0.size))
    out[0] = y0
    y = y0
    for i in range(n):
        t = i * dt
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteStateError(f"state became non-finite at t={(i + 1) * dt:g}: {y}")
        out[i + 1] = y
    return out


_table_cache: dict = {}


def _sin_table(n_quad: int) -> np.ndarray:
    tab = _table_cache.get(n_quad)
    if tab is None:
        tab = np.sin(_TWO_PI * np.linspace(0.0, 1.0, n_quad + 1))
        _table_cache[n_quad] = tab
    return tab


def _run_kernel(spec: KernelSpec, y0, n, dt):
    k, p = spec.kind, spec.param
    if spec.scheme == "classic":
        xs, bad = _kernels.rk4_classic(k, p, spec.gamma, spec.delta, y0[0], n, dt)
        states = xs[:, None]
    elif spec.scheme == "fourier_avg":
        xs, bad = _kernels.rk4_fourier_avg(
            k, p, spec.gamma, spec.delta, y0[0], n, dt, _sin_table(spec.n_quad)
        )
        states = xs[:, None]
    elif spec.scheme == "taylor_avg":
        xs, bad = _kernels.rk4_taylor_avg(
            k, p, spec.gamma, spec.delta, y0[0], n, dt,
            np.array(spec.coeffs), spec.fd_step,
        )
        states = xs[:, None]
    elif spec.scheme == "hpf":
        states, bad = _kernels.rk4_hpf(k, p, spec.gamma, spec.delta, y0[0], y0[1], n, dt)
    elif spec.scheme == "hpf_avg":
        states, bad = _kernels.rk4_hpf_avg(
            k, p, spec.gamma, spec.delta, y0[0], y0[1], n, dt, _sin_table(spec.n_quad)
        )
    elif spec.scheme == "support":
        xs, bad = _kernels.rk4_support(k, p, spec.gamma, y0[0], n, dt)
        if bad >= 0 and np.isfinite(xs[bad]):
            raise SupportDomainError(
                f"|h(x1)| < {_kernels.SUPPORT_MIN_COST:g} near t={bad * dt:g}; "
                "the separable closed form breaks down"
            )
        states = xs[:, None]
    else:  # pragma: no cover - specs are produced by this module only
        raise ValueError(f"unknown kernel scheme {spec.scheme!r}")
    if bad >= 0:
        raise NonFiniteStateError(f"state became non-finite at t={bad * dt:g}")
    return states


def _kernel_spec(h: CostFunction, scheme: str, params: SimParams, **extra) -> Optional[KernelSpec]:
    if h.kernel_kind is None:
        return None
    return KernelSpec(
        scheme=scheme, kind=h.kernel_kind, param=h.kernel_param,
        gamma=params.gamma, delta=params.delta, **extra,
    )


def _ybar_initial(h: CostFunction, params: SimParams) -> float:
    return float(h.eval(params.x0)) if params.ybar0 is None else params.ybar0


def classic_es(h: CostFunction, params: SimParams) -> OdeSystem:
    """Dither-correlation loop dx/dt = -gamma y(x,t) u(t)."""
    gamma, delta = params.gamma, params.delta

    def rhs(t, state):
        u = math.sin(_TWO_PI * t)
        return np.array([-gamma * float(h.eval(state[0] + delta * u)) * u])

    return OdeSystem(
        dimension=1, rhs=rhs, label="classic",
        default_initial=np.array([params.x0]),
        kernel=_kernel_spec(h, "classic", params),
        state_labels=("x",),
    )


def fourier_average(h: CostFunction, params: SimParams, n_quad: int = DEFAULT_N_QUAD) -> OdeSystem:
    """Averaged loop dx/dt = -(gamma/2) b1(x); b1 by fresh quadrature per stage."""
    gamma, delta = params.gamma, params.delta

    def rhs(t, state):
        return np.array([-0.5 * gamma * b1(h, state[0], delta, n_quad)])

    return OdeSystem(
        dimension=1, rhs=rhs, label="fourier_avg",
        default_initial=np.array([params.x0]),
        kernel=_kernel_spec(h, "fourier_avg", params, n_quad=n_quad),
        state_labels=("x_a",),
    )


def taylor_coefficient(k: int) -> float:
    """Coefficient of ``delta^(2k-1) h^(2k-1)`` in the Taylor-expanded average.

    Expanding ``h(x + delta sin)`` in powers of the dither, multiplying by the
    dither and integrating over one period leaves only the odd derivatives,
    weighted by ``C(2k, k) / (4^k (2k-1)!)``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return math.comb(2 * k, k) / (4**k * math.factorial(2 * k - 1))


def _first_derivative(h: CostFunction, x: float) -> float:
    if h.deriv is not None:
        return float(h.deriv(x))
    return numeric_derivative(h, x, order=1)


def taylor_first_order_average(h: CostFunction, params: SimParams) -> OdeSystem:
    """Gradient flow dx/dt = -gamma c1 delta h'(x) with c1 = 1/2."""
    gamma, delta = params.gamma, params.delta
    c1 = taylor_coefficient(1)

    def rhs(t, state):
        return np.array([-gamma * c1 * delta * _first_derivative(h, state[0])])

    return OdeSystem(
        dimension=1, rhs=rhs, label="taylor1_avg",
        default_initial=np.array([params.x0]),
        kernel=_kernel_spec(h, "taylor_avg", params, coeffs=(taylor_coefficient(1),), fd_step=1e-3)
        if h.deriv is not None else None,
        state_labels=("x_a",),
    )


def taylor_full_average(h: CostFunction, params: SimParams, K: int, fd_step: float = 1e-3) -> OdeSystem:
    """Truncated Taylor average dx/dt = -gamma sum_{k<=K} c_k delta^(2k-1) h^(2k-1).

    K is capped at 4: the odd derivatives are taken by central differences
    whose round-off noise grows quickly with the order.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if K > 4:
        raise ValueError(f"K={K} not supported; finite-difference noise above order 7 is prohibitive")
    gamma, delta = params.gamma, params.delta
    coeffs = tuple(taylor_coefficient(k) for k in range(1, K + 1))

    def rhs(t, state):
        x = state[0]
        acc = coeffs[0] * delta * _first_derivative(h, x)
        for k in range(2, K + 1):
            acc += coeffs[k - 1] * delta ** (2 * k - 1) * numeric_derivative(h, x, 2 * k - 1, fd_step)
        return np.array([-gamma * acc])

    return OdeSystem(
        dimension=1, rhs=rhs, label=f"taylor{K}_avg",
        default_initial=np.array([params.x0]),
        kernel=_kernel_spec(h, "taylor_avg", params, coeffs=coeffs, fd_step=fd_step)
        if h.deriv is not None else None,
        state_labels=("x_a",),
    )


def hpf_es(h: CostFunction, params: SimParams) -> OdeSystem:
    """High-pass-filtered loop over (x, ybar); ybar0 defaults to h(x0)."""
    gamma, delta = params.gamma, params.delta

    def rhs(t, state):
        u = math.sin(_TWO_PI * t)
        e = float(h.eval(state[0] + delta * u)) - state[1]
        return np.array([-gamma * e * u, gamma * e])

    return OdeSystem(
        dimension=2, rhs=rhs, label="hpf",
        default_initial=np.array([params.x0, _ybar_initial(h, params)]),
        kernel=_kernel_spec(h, "hpf", params),
        state_labels=("x", "ybar"),
    )


def hpf_average(h: CostFunction, params: SimParams, n_quad: int = DEFAULT_N_QUAD) -> OdeSystem:
    """Average of the HPF loop: the fourier_average cascaded with a linear filter."""
    gamma, delta = params.gamma, params.delta

    def rhs(t, state):
        x, yb = state
        return np.array([
            -0.5 * gamma * b1(h, x, delta, n_quad),
            gamma * (0.5 * a0(h, x, delta, n_quad) - yb),
        ])

    return OdeSystem(
        dimension=2, rhs=rhs, label="hpf_avg",
        default_initial=np.array([params.x0, _ybar_initial(h, params)]),
        kernel=_kernel_spec(h, "hpf_avg", params, n_quad=n_quad),
        state_labels=("x_a", "ybar_a"),
    )


def support_oscillator(h: CostFunction, params: SimParams) -> OdeSystem:
    """Unperturbed-readout proxy dx/dt = -gamma h(x) u(t).

    Valid while h stays away from zero; the rhs aborts when |h| < 1e-12,
    where the separable solution (and the proxy itself) is meaningless.
    """
    gamma = params.gamma

    def rhs(t, state):
        hv = float(h.eval(state[0]))
        if abs(hv) < _kernels.SUPPORT_MIN_COST:
            raise SupportDomainError(
                f"|h(x1)| < {_kernels.SUPPORT_MIN_COST:g} at x1={state[0]:g}; "
                "the separable closed form breaks down"
            )
        return np.array([-gamma * hv * math.sin(_TWO_PI * t)])

    return OdeSystem(
        dimension=1, rhs=rhs, label="support_osc",
        default_initial=np.array([params.x0]),
        kernel=_kernel_spec(h, "support", params),
        state_labels=("x1",),
    )


def support_closed_form(h: CostFunction, x10: float, gamma: float, t, *,
                        quad_points_per_unit: int = 1024, xtol: float = 1e-12):
    """Separation-of-variables solution of the support oscillator.

    With ``H(x) = integral of 1/h from x10``, the solution in period-1 time is
    ``x(t) = H^{-1}(H(x10) + (gamma / 2 pi) (cos(2 pi t) - 1))``, a pure
    oscillation returning to ``x10`` at integer times.  ``H`` is evaluated by
    dense trapezoid quadrature from ``x10`` and inverted by bisection; raises
    ``ValueError`` when no monotone bracket containing the target exists
    (h changes sign or vanishes on the needed range).
    """
    t = np.asarray(t, dtype=float)
    targets = (gamma / _TWO_PI) * (np.cos(_TWO_PI * t) - 1.0)

    h10 = float(h.eval(x10))
    if abs(h10) < _kernels.SUPPORT_MIN_COST:
        raise ValueError(f"h(x10)={h10:g} is too close to zero for the separable form")

    def H(x: float) -> float:
        # integral of 1/h over [x10, x]; fresh trapezoid quadrature with a
        # panel count proportional to the span
        if x == x10:
            return 0.0
        npan = max(64, int(abs(x - x10) * quad_points_per_unit))
        grid = np.linspace(x10, x, npan + 1)
        hv = h.values(grid)
        if np.any(np.abs(hv) < _kernels.SUPPORT_MIN_COST) or np.any(np.sign(hv) != np.sign(h10)):
            raise ValueError("h changes sign between x10 and the search edge; H is not monotone there")
        return float(np.trapezoid(1.0 / hv, dx=(x - x10) / npan))

    t_lo, t_hi = float(targets.min()), float(targets.max())

    def grow(side: int, need) -> tuple:
        # push one bracket edge outward until H there passes the needed
        # target value; halve the step when h would change sign underfoot
        edge, H_edge = x10, 0.0
        step = max(1.0, abs(gamma * h10))
        for _ in range(200):
            if need(H_edge):
                return edge, H_edge
            try:
                cand = edge + side * step
                H_cand = H(cand)
            except ValueError:
                step *= 0.5
                if step < 1e-9:
                    break
                continue
            edge, H_edge = cand, H_cand
            step *= 2.0
        raise ValueError("could not establish a bisection bracket; H saturates before the target")

    increasing = h10 > 0
    lo, H_lo = grow(-1, (lambda v: v <= t_lo) if increasing else (lambda v: v >= t_hi))
    hi, H_hi = grow(+1, (lambda v: v >= t_hi) if increasing else (lambda v: v <= t_lo))

    def invert(target: float) -> float:
        if target == 0.0:
            return x10
        a, b, fa = lo, hi, H_lo - target
        while b - a > xtol:
            m = 0.5 * (a + b)
            fm = H(m) - target
            if (fm <= 0.0) == (fa <= 0.0):
                a, fa = m, fm
            else:
                b = m
        return 0.5 * (a + b)

    out = np.array([invert(v) for v in np.atleast_1d(targets)])
    return float(out[0]) if t.ndim == 0 else out
