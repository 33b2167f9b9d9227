"""Compiled inner loops for trajectory integration.

Every kernel is a full fixed-step RK4 sweep specialised to one scheme, with
the built-in cost evaluated inline (``kind``/``p`` as produced by the cost
factories).  The averaged schemes re-run the period quadrature at every RK4
stage, so these loops dominate runtime; keep them allocation-free.

Kernels return ``(states, bad_index)`` where ``bad_index`` is -1 on success,
otherwise the first step index at which the state left the finite domain
(or, for the support oscillator, at which ``|h|`` fell below 1e-12).

If numba is unavailable the module still imports; ``HAS_NUMBA`` is False and
the pure-numpy integrator in :mod:`eskit.dynamics` is the only path.
"""

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


PI = np.pi
TWO_PI = 2.0 * np.pi
SUPPORT_MIN_COST = 1e-12


@njit(cache=True)
def cost_eval(kind, p, x):
    if kind == 0:  # benchmark, p = h0
        if x < PI:
            return p + (x - PI) ** 2 - 1.0
        elif x < TWO_PI:
            return p + np.cos(x - PI) - 2.0
        else:
            return p + (x - TWO_PI) ** 2 - 3.0
    elif kind == 1:  # quadratic, p = x_star
        return (x - p) ** 2
    else:  # constant, p = value
        return p


@njit(cache=True)
def cost_deriv(kind, p, x):
    if kind == 0:
        if x < PI:
            return 2.0 * (x - PI)
        elif x < TWO_PI:
            return -np.sin(x - PI)
        else:
            return 2.0 * (x - TWO_PI)
    elif kind == 1:
        return 2.0 * (x - p)
    else:
        return 0.0


@njit(cache=True)
def _comb(n, k):
    r = 1.0
    for i in range(k):
        r = r * (n - i) / (i + 1)
    return r


@njit(cache=True)
def fd_derivative(kind, p, x, order, step):
    # half-offset central stencil, mirrors cost.numeric_derivative
    acc = 0.0
    sign = 1.0
    for i in range(order + 1):
        offset = (0.5 * order - i) * step
        acc += sign * _comb(order, i) * cost_eval(kind, p, x + offset)
        sign = -sign
    return acc / step**order


@njit(cache=True)
def b1_quad(kind, p, x, delta, s):
    n = s.shape[0] - 1
    acc = 0.5 * cost_eval(kind, p, x + delta * s[0]) * s[0]
    for i in range(1, n):
        si = s[i]
        acc += cost_eval(kind, p, x + delta * si) * si
    acc += 0.5 * cost_eval(kind, p, x + delta * s[n]) * s[n]
    return 2.0 * acc / n


@njit(cache=True)
def a0_quad(kind, p, x, delta, s):
    n = s.shape[0] - 1
    acc = 0.5 * cost_eval(kind, p, x + delta * s[0])
    for i in range(1, n):
        acc += cost_eval(kind, p, x + delta * s[i])
    acc += 0.5 * cost_eval(kind, p, x + delta * s[n])
    return 2.0 * acc / n


@njit(cache=True)
def rk4_classic(kind, p, gamma, delta, x0, n_steps, dt):
    xs = np.empty(n_steps + 1)
    xs[0] = x0
    x = x0
    bad = -1
    for i in range(n_steps):
        t = i * dt
        u1 = np.sin(TWO_PI * t)
        u2 = np.sin(TWO_PI * (t + 0.5 * dt))
        u4 = np.sin(TWO_PI * (t + dt))
        k1 = -gamma * cost_eval(kind, p, x + delta * u1) * u1
        k2 = -gamma * cost_eval(kind, p, x + 0.5 * dt * k1 + delta * u2) * u2
        k3 = -gamma * cost_eval(kind, p, x + 0.5 * dt * k2 + delta * u2) * u2
        k4 = -gamma * cost_eval(kind, p, x + dt * k3 + delta * u4) * u4
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xs[i + 1] = x
        if not np.isfinite(x):
            bad = i + 1
            break
    return xs, bad


@njit(cache=True)
def rk4_fourier_avg(kind, p, gamma, delta, x0, n_steps, dt, s):
    xs = np.empty(n_steps + 1)
    xs[0] = x0
    x = x0
    bad = -1
    g = -0.5 * gamma
    for i in range(n_steps):
        k1 = g * b1_quad(kind, p, x, delta, s)
        k2 = g * b1_quad(kind, p, x + 0.5 * dt * k1, delta, s)
        k3 = g * b1_quad(kind, p, x + 0.5 * dt * k2, delta, s)
        k4 = g * b1_quad(kind, p, x + dt * k3, delta, s)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xs[i + 1] = x
        if not np.isfinite(x):
            bad = i + 1
            break
    return xs, bad


@njit(cache=True)
def taylor_field(kind, p, delta, coeffs, fd_step, x):
    # sum_k c_k delta^(2k-1) h^(2k-1); exact first derivative, central
    # differences for the higher odd orders
    field = cost_deriv(kind, p, x) * coeffs[0] * delta
    for k in range(2, coeffs.shape[0] + 1):
        d = fd_derivative(kind, p, x, 2 * k - 1, fd_step)
        field += coeffs[k - 1] * delta ** (2 * k - 1) * d
    return field


@njit(cache=True)
def rk4_taylor_avg(kind, p, gamma, delta, x0, n_steps, dt, coeffs, fd_step):
    xs = np.empty(n_steps + 1)
    xs[0] = x0
    x = x0
    bad = -1
    for i in range(n_steps):
        k1 = -gamma * taylor_field(kind, p, delta, coeffs, fd_step, x)
        k2 = -gamma * taylor_field(kind, p, delta, coeffs, fd_step, x + 0.5 * dt * k1)
        k3 = -gamma * taylor_field(kind, p, delta, coeffs, fd_step, x + 0.5 * dt * k2)
        k4 = -gamma * taylor_field(kind, p, delta, coeffs, fd_step, x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xs[i + 1] = x
        if not np.isfinite(x):
            bad = i + 1
            break
    return xs, bad


@njit(cache=True)
def rk4_hpf(kind, p, gamma, delta, x0, ybar0, n_steps, dt):
    out = np.empty((n_steps + 1, 2))
    out[0, 0] = x0
    out[0, 1] = ybar0
    x = x0
    yb = ybar0
    bad = -1
    for i in range(n_steps):
        t = i * dt
        u1 = np.sin(TWO_PI * t)
        u2 = np.sin(TWO_PI * (t + 0.5 * dt))
        u4 = np.sin(TWO_PI * (t + dt))
        e1 = cost_eval(kind, p, x + delta * u1) - yb
        k1x = -gamma * e1 * u1
        k1y = gamma * e1
        e2 = cost_eval(kind, p, x + 0.5 * dt * k1x + delta * u2) - (yb + 0.5 * dt * k1y)
        k2x = -gamma * e2 * u2
        k2y = gamma * e2
        e3 = cost_eval(kind, p, x + 0.5 * dt * k2x + delta * u2) - (yb + 0.5 * dt * k2y)
        k3x = -gamma * e3 * u2
        k3y = gamma * e3
        e4 = cost_eval(kind, p, x + dt * k3x + delta * u4) - (yb + dt * k3y)
        k4x = -gamma * e4 * u4
        k4y = gamma * e4
        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        yb = yb + (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        out[i + 1, 0] = x
        out[i + 1, 1] = yb
        if not (np.isfinite(x) and np.isfinite(yb)):
            bad = i + 1
            break
    return out, bad


@njit(cache=True)
def rk4_hpf_avg(kind, p, gamma, delta, x0, ybar0, n_steps, dt, s):
    out = np.empty((n_steps + 1, 2))
    out[0, 0] = x0
    out[0, 1] = ybar0
    x = x0
    yb = ybar0
    bad = -1
    for i in range(n_steps):
        k1x = -0.5 * gamma * b1_quad(kind, p, x, delta, s)
        k1y = gamma * (0.5 * a0_quad(kind, p, x, delta, s) - yb)
        x2 = x + 0.5 * dt * k1x
        y2 = yb + 0.5 * dt * k1y
        k2x = -0.5 * gamma * b1_quad(kind, p, x2, delta, s)
        k2y = gamma * (0.5 * a0_quad(kind, p, x2, delta, s) - y2)
        x3 = x + 0.5 * dt * k2x
        y3 = yb + 0.5 * dt * k2y
        k3x = -0.5 * gamma * b1_quad(kind, p, x3, delta, s)
        k3y = gamma * (0.5 * a0_quad(kind, p, x3, delta, s) - y3)
        x4 = x + dt * k3x
        y4 = yb + dt * k3y
        k4x = -0.5 * gamma * b1_quad(kind, p, x4, delta, s)
        k4y = gamma * (0.5 * a0_quad(kind, p, x4, delta, s) - y4)
        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        yb = yb + (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        out[i + 1, 0] = x
        out[i + 1, 1] = yb
        if not (np.isfinite(x) and np.isfinite(yb)):
            bad = i + 1
            break
    return out, bad


@njit(cache=True)
def rk4_support(kind, p, gamma, x0, n_steps, dt):
    xs = np.empty(n_steps + 1)
    xs[0] = x0
    x = x0
    bad = -1
    for i in range(n_steps):
        t = i * dt
        u1 = np.sin(TWO_PI * t)
        u2 = np.sin(TWO_PI * (t + 0.5 * dt))
        u4 = np.sin(TWO_PI * (t + dt))
        h1 = cost_eval(kind, p, x)
        if abs(h1) < SUPPORT_MIN_COST:
            bad = i
            break
        k1 = -gamma * h1 * u1
        h2 = cost_eval(kind, p, x + 0.5 * dt * k1)
        if abs(h2) < SUPPORT_MIN_COST:
            bad = i
            break
        k2 = -gamma * h2 * u2
        h3 = cost_eval(kind, p, x + 0.5 * dt * k2)
        if abs(h3) < SUPPORT_MIN_COST:
            bad = i
            break
        k3 = -gamma * h3 * u2
        h4 = cost_eval(kind, p, x + dt * k3)
        if abs(h4) < SUPPORT_MIN_COST:
            bad = i
            break
        k4 = -gamma * h4 * u4
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xs[i + 1] = x
        if not np.isfinite(x):
            bad = i + 1
            break
    return xs, bad
