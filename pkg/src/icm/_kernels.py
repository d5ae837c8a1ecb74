"""Time-stepping kernels for tridiagonal linear systems x' = A x + b u.

Two interchangeable implementations of the same trapezoidal recurrence:

* ``numba``: per-step tridiagonal (Thomas) solve, O(n) work per step.
* ``numpy``: dense one-step propagator, O(n**2) per step, no compiler.

``ICM_NUMBA=0`` in the environment (or a missing numba) selects the numpy
path for :func:`integrate`.  Both paths are always importable by name so they
can be checked against each other.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = os.environ.get("ICM_NUMBA", "1").strip().lower()
NUMBA_ENABLED = numba is not None and _FLAG not in ("0", "false", "no", "off")
BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def _dense(lower, diag, upper):
    n = diag.size
    A = np.diag(diag)
    if n > 1:
        A += np.diag(lower, -1) + np.diag(upper, 1)
    return A


def integrate_numpy(lower, diag, upper, b, c_out, d_out, u, h, n_steps, be_steps=0):
    """Trapezoidal integration from x(0) = 0 under a constant input ``u``.

    The first ``be_steps`` steps use backward Euler to damp the stiff
    components excited by the input discontinuity.  Returns the outputs
    ``C x + D u`` at every step, shape (n_steps + 1, n_out).
    """
    n = diag.size
    y = np.empty((n_steps + 1, d_out.size))
    y[:] = d_out * u
    if n == 0:
        return y
    A = _dense(lower, diag, upper)
    eye = np.eye(n)
    x = np.zeros(n)
    k = min(be_steps, n_steps)
    if k:
        M = eye - h * A
        phi = np.linalg.solve(M, eye)
        gam = phi @ (h * b * u)
        for i in range(1, k + 1):
            x = phi @ x + gam
            y[i] += c_out @ x
    M = eye - 0.5 * h * A
    phi = np.linalg.solve(M, eye + 0.5 * h * A)
    gam = np.linalg.solve(M, h * b * u)
    for i in range(k + 1, n_steps + 1):
        x = phi @ x + gam
        y[i] += c_out @ x
    return y


def _factor(ml, md, mu, cp, inv):
    n = md.size
    inv[0] = 1.0 / md[0]
    for i in range(1, n):
        cp[i - 1] = mu[i - 1] * inv[i - 1]
        inv[i] = 1.0 / (md[i] - ml[i - 1] * cp[i - 1])


def _solve(ml, cp, inv, rhs, out):
    n = rhs.size
    out[0] = rhs[0] * inv[0]
    for i in range(1, n):
        out[i] = (rhs[i] - ml[i - 1] * out[i - 1]) * inv[i]
    for i in range(n - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]


def _integrate_tridiag(lower, diag, upper, b, c_out, d_out, u, h, n_steps, be_steps):
    n = diag.size
    n_out = d_out.size
    y = np.empty((n_steps + 1, n_out))
    for j in range(n_out):
        for i in range(n_steps + 1):
            y[i, j] = d_out[j] * u
    if n == 0:
        return y
    x = np.zeros(n)
    rhs = np.empty(n)
    cp = np.empty(max(n - 1, 1))
    inv = np.empty(n)
    ml = np.empty(max(n - 1, 1))
    mu = np.empty(max(n - 1, 1))
    md = np.empty(n)
    k = min(be_steps, n_steps)
    for phase in range(2):
        if phase == 0:
            if k == 0:
                continue
            theta = 1.0
            start, stop = 1, k + 1
        else:
            theta = 0.5
            start, stop = k + 1, n_steps + 1
        for i in range(n - 1):
            ml[i] = -theta * h * lower[i]
            mu[i] = -theta * h * upper[i]
        for i in range(n):
            md[i] = 1.0 - theta * h * diag[i]
        _factor(ml, md, mu, cp, inv)
        w = (1.0 - theta) * h
        for step in range(start, stop):
            for i in range(n):
                acc = x[i] + w * diag[i] * x[i] + h * b[i] * u
                if i > 0:
                    acc += w * lower[i - 1] * x[i - 1]
                if i < n - 1:
                    acc += w * upper[i] * x[i + 1]
                rhs[i] = acc
            _solve(ml, cp, inv, rhs, x)
            for j in range(n_out):
                acc = 0.0
                for i in range(n):
                    acc += c_out[j, i] * x[i]
                y[step, j] += acc
    return y


if numba is not None:
    _opts = dict(cache=True, nogil=True)
    _factor = numba.njit(**_opts)(_factor)
    _solve = numba.njit(**_opts)(_solve)
    _integrate_tridiag_jit = numba.njit(**_opts)(_integrate_tridiag)
else:  # pragma: no cover
    _integrate_tridiag_jit = None


def integrate_numba(lower, diag, upper, b, c_out, d_out, u, h, n_steps, be_steps=0):
    if _integrate_tridiag_jit is None:  # pragma: no cover
        raise RuntimeError("numba is not available")
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (lower, diag, upper, b, c_out, d_out)]
    return _integrate_tridiag_jit(*args, float(u), float(h), int(n_steps), int(be_steps))


def integrate(lower, diag, upper, b, c_out, d_out, u, h, n_steps, be_steps=0):
    """Dispatch to the backend chosen at import time."""
    fn = integrate_numba if NUMBA_ENABLED else integrate_numpy
    return fn(lower, diag, upper, b, c_out, d_out, u, h, n_steps, be_steps)
