"""Hot numerical loops, written once and compiled with numba when available.

Each kernel has a pure-numpy twin that produces bitwise-identical output
(the recursion is evaluated in blocks of the delay length, inside which all
dependencies are already resolved). Backend selection lives in _backend.
"""

import numpy as np


def evolve_samples_loop(J, d, G, M, beta, rho, Phi0, history):
    # s_ext[0:d] holds the pre-stream samples s(-d)..s(-1)
    n = J.size
    s_ext = np.empty(n + d)
    s_ext[:d] = history
    for m in range(n):
        fb = s_ext[m]
        s_ext[m + d] = 0.5 * G * (1.0 + M * np.sin(np.pi * (beta * fb + rho * J[m]) + Phi0))
    return s_ext[d:]


def evolve_samples_numpy(J, d, G, M, beta, rho, Phi0, history):
    # block recursion: samples [b, b+d) depend only on samples < b
    n = J.size
    s_ext = np.empty(n + d)
    s_ext[:d] = history
    for b in range(0, n, d):
        e = min(b + d, n)
        s_ext[b + d:e + d] = 0.5 * G * (
            1.0 + M * np.sin(np.pi * (beta * s_ext[b:e] + rho * J[b:e]) + Phi0)
        )
    return s_ext[d:]


def dde_euler_loop(n_steps, dt, q, T_R, gs_pmax_half, M, inv_V_pi, x_b, pre, V0):
    """First-order integration of V + T_R dV/dt = G* P[V(t - tau)].

    q = tau/dt (float, >= 1). pre[j] carries the already-evaluated history
    term for steps whose lookback lands before t=0; for later steps the
    lookback is linearly interpolated from the trace being built.
    """
    V = np.empty(n_steps + 1)
    V[0] = V0
    for j in range(1, n_steps + 1):
        # lookback time index for the drive term
        if T_R > 0.0:
            jj = (j - 1) - q
        else:
            jj = j - q
        if jj < 0.0:
            vp = pre[j]
        else:
            i0 = int(jj)
            w = jj - i0
            vp = V[i0] * (1.0 - w) + V[i0 + 1] * w if w > 0.0 else V[i0]
        drive = gs_pmax_half * (1.0 + M * np.sin(np.pi * (vp * inv_V_pi + x_b)))
        if T_R > 0.0:
            V[j] = V[j - 1] + (dt / T_R) * (drive - V[j - 1])
        else:
            V[j] = drive
    return V


try:  # pragma: no cover - exercised via _backend
    import numba

    _jit = numba.njit(cache=True, nogil=True)
    evolve_samples_numba = _jit(evolve_samples_loop)
    dde_euler_numba = _jit(dde_euler_loop)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    evolve_samples_numba = None
    dde_euler_numba = None
    HAVE_NUMBA = False
