"""Fast fixed-step integration kernels for the momentum equation.

The momentum flow is integrated in the inertia eigenframe, where the
momentum-to-velocity map is an entrywise division by the pairwise
eigenvalue sums. Two interchangeable implementations: a numba-compiled
loop (preferred) and a vectorized numpy twin used as fallback and as a
cross-check in tests.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAVE_NUMBA = False


def rk4_momentum_numpy(m0: np.ndarray, pair_sums: np.ndarray, dt: float,
                       nsteps: int, record_every: int) -> np.ndarray:
    """Classical RK4 on dM/dt = [M, M / pair_sums] (eigenframe coordinates).

    Returns an array of shape (nsteps // record_every + 1, n, n) holding
    the state every `record_every` steps, starting with m0.
    """

    def field(m):
        om = m / pair_sums
        p = m @ om
        return p - p.T

    nrec = nsteps // record_every
    out = np.empty((nrec + 1,) + m0.shape)
    out[0] = m0
    m = m0.copy()
    r = 1
    for step in range(nsteps):
        k1 = field(m)
        k2 = field(m + (0.5 * dt) * k1)
        k3 = field(m + (0.5 * dt) * k2)
        k4 = field(m + dt * k3)
        m = m + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if (step + 1) % record_every == 0:
            out[r] = m
            r += 1
    return out


def _rk4_momentum_loops(m0, pair_sums, dt, nsteps, record_every):  # pragma: no cover
    n = m0.shape[0]
    nrec = nsteps // record_every
    out = np.empty((nrec + 1, n, n))
    for i in range(n):
        for j in range(n):
            out[0, i, j] = m0[i, j]
    m = m0.copy()
    y = np.empty((n, n))
    om = np.empty((n, n))
    k1 = np.empty((n, n))
    k2 = np.empty((n, n))
    k3 = np.empty((n, n))
    k4 = np.empty((n, n))

    def field(src, dst):
        for i in range(n):
            for j in range(n):
                om[i, j] = src[i, j] / pair_sums[i, j]
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for l in range(n):
                    acc += src[i, l] * om[l, j]
                dst[i, j] = acc
        for i in range(n):
            dst[i, i] = 0.0
            for j in range(i + 1, n):
                c = dst[i, j] - dst[j, i]
                dst[i, j] = c
                dst[j, i] = -c

    r = 1
    for step in range(nsteps):
        field(m, k1)
        for i in range(n):
            for j in range(n):
                y[i, j] = m[i, j] + 0.5 * dt * k1[i, j]
        field(y, k2)
        for i in range(n):
            for j in range(n):
                y[i, j] = m[i, j] + 0.5 * dt * k2[i, j]
        field(y, k3)
        for i in range(n):
            for j in range(n):
                y[i, j] = m[i, j] + dt * k3[i, j]
        field(y, k4)
        for i in range(n):
            for j in range(n):
                m[i, j] += (dt / 6.0) * (k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j])
        if (step + 1) % record_every == 0:
            for i in range(n):
                for j in range(n):
                    out[r, i, j] = m[i, j]
            r += 1
    return out


if HAVE_NUMBA:
    rk4_momentum_numba = njit(cache=True)(_rk4_momentum_loops)
else:  # pragma: no cover
    rk4_momentum_numba = None


def rk4_momentum(m0, pair_sums, dt, nsteps, record_every, prefer_numba=True):
    """Dispatch to the numba kernel when available, else the numpy twin."""
    if prefer_numba and rk4_momentum_numba is not None:
        return rk4_momentum_numba(m0, pair_sums, float(dt), nsteps, record_every)
    return rk4_momentum_numpy(m0, pair_sums, float(dt), nsteps, record_every)
