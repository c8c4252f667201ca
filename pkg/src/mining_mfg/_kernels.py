"""Compiled time-stepping kernels for the HJB and Fokker-Planck sweeps.

Single source of truth for the discrete scheme: the public per-step
functions and the full sweeps in ``hjb`` and ``fokker_planck`` all call
these kernels, so a step composed by hand and a sweep are the same
arithmetic.  Everything here takes plain scalars and arrays.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TINY = 2.2250738585072014e-308  # smallest normal double
FLAT_REL = 1e-14
FIT_LO = 0.5
FIT_HI = 2.0


@njit(cache=True)
def _fit_g(r):
    """z/expm1(z) with z = -log r: the exponential-fitting factor."""
    z = -np.log(r)
    if abs(z) < 1e-8:
        g = 1.0 - 0.5 * z
    else:
        g = z / np.expm1(z)
    if g < FIT_LO:
        g = FIT_LO
    elif g > FIT_HI:
        g = FIT_HI
    return g


@njit(cache=True)
def fitted_slopes_k(v, dx, jump_nodes):
    """Exponentially fitted left-sided derivative of a value row.

    Returns (d, weight, flat, first_bad): the fitted derivative, the ratio
    d / (floored left difference) used to weight the implicit transport,
    the numerically-flat mask, and the first interior node where the row
    genuinely decreases (-1 if none; the top jump band is exempt).
    """
    nx = v.shape[0]
    dpos = np.empty(nx)
    flat = np.zeros(nx, np.uint8)
    first_bad = -1
    hi = nx - jump_nodes
    for j in range(1, nx):
        dm = (v[j] - v[j - 1]) / dx
        sc = abs(v[j])
        if abs(v[j - 1]) > sc:
            sc = abs(v[j - 1])
        if sc < TINY:
            sc = TINY
        fl = FLAT_REL * sc / dx
        if dm <= fl:
            flat[j] = 1
            if dm < -fl and j < hi and first_bad < 0:
                first_bad = j
        dpos[j] = dm if dm > fl else fl
    dpos[0] = dpos[1]
    flat[0] = flat[1]

    d = np.empty(nx)
    weight = np.empty(nx)
    for j in range(1, nx - 1):
        g = _fit_g(dpos[j + 1] / dpos[j])
        d[j] = dpos[j] * g
        weight[j] = g
    g_top = _fit_g(dpos[nx - 1] / dpos[nx - 2])
    d[nx - 1] = dpos[nx - 1] * g_top
    weight[nx - 1] = g_top
    # node 0: right-sided fit, d0 = D+_0 * z/(1 - exp(-z))
    r0 = dpos[2] / dpos[1]
    if r0 < 1e-6:
        r0 = 1e-6
    elif r0 > 1e6:
        r0 = 1e6
    if abs(r0 - 1.0) < 1e-8:
        f0 = 1.0
    else:
        f0 = -np.log(r0) / (1.0 - r0)
    if f0 < FIT_LO:
        f0 = FIT_LO
    elif f0 > FIT_HI:
        f0 = FIT_HI
    d[0] = dpos[0] * f0
    weight[0] = f0
    return d, weight, flat, first_bad


@njit(cache=True)
def jump_difference_k(v, jump_nodes):
    """v(x+p) - v(x) by index shift, geometric extension above the top."""
    nx = v.shape[0]
    rho = 1.0
    if v[nx - 2] != 0.0:
        r = v[nx - 1] / v[nx - 2]
        if 0.0 < r <= 4.0:
            rho = r
    dv = np.empty(nx)
    for j in range(nx - jump_nodes):
        dv[j] = v[j + jump_nodes] - v[j]
    ghost = v[nx - 1]
    for k in range(1, jump_nodes + 1):
        ghost = ghost * rho  # v(x_max + k dx)
        j = nx - jump_nodes - 1 + k
        if 0 <= j < nx:
            dv[j] = ghost - v[j]
    return dv


@njit(cache=True)
def control_k(v, d, flat, dv, S, D, c, cap, ruin):
    """Optimal hash rate per node: active iff S < K = dv/(D c d)."""
    nx = v.shape[0]
    alpha = np.zeros(nx)
    for j in range(nx):
        if flat[j]:
            continue
        K = dv[j] / (D * c * d[j])
        if S < K:
            a = -S + np.sqrt(S * K)
            if a > cap:
                a = cap
            if a > 0.0:
                alpha[j] = a
    if ruin:
        alpha[0] = 0.0
    return alpha


@njit(cache=True)
def hjb_step_k(v_next, dv, weight, alpha, S_lam, M_abar_beta, D, c, dt, dx, ruin):
    """One implicit backward step; jump gain explicit, transport implicit.

    S_lam = M*abar + beta enters the intensities; M_abar_beta is the same
    quantity (kept separate for clarity at call sites).
    """
    nx = v_next.shape[0]
    v = np.empty(nx)
    rhs = np.empty(nx)
    nu = np.empty(nx)
    for j in range(nx):
        denom = D * (alpha[j] + M_abar_beta)
        lam = alpha[j] / denom if denom > 0.0 else 0.0
        rhs[j] = v_next[j] + dt * lam * dv[j]
        nu[j] = c * alpha[j] * dt / dx * weight[j]

    if ruin:
        v[0] = v_next[0]
        for j in range(1, nx):
            v[j] = (rhs[j] + nu[j] * v[j - 1]) / (1.0 + nu[j])
    else:
        rho_hat = 1.0
        if v_next[1] != 0.0:
            r = v_next[0] / v_next[1]
            if 1.0 <= r <= 4.0:
                rho_hat = r
        a1 = 1.0 + nu[1] * (1.0 - rho_hat)
        if a1 < 0.1:  # transiently huge drift: drop the ghost coupling
            rho_hat = 1.0
            a1 = 1.0
        v[1] = rhs[1] / a1
        for j in range(2, nx):
            v[j] = (rhs[j] + nu[j] * v[j - 1]) / (1.0 + nu[j])
        v[0] = rho_hat * v[1]
    return v


@njit(cache=True)
def hjb_sweep_k(U, mean_path, beta_path, M, D, c, dt, dx, jump_nodes, cap, ruin, strict):
    """Backward sweep from the terminal utility; returns (v, alpha, bad_n, bad_j).

    bad_n/bad_j report the first strict monotonicity violation (-1, -1 when
    clean or when strict is off).
    """
    nt = mean_path.shape[0] - 1
    nx = U.shape[0]
    v = np.empty((nt + 1, nx))
    a = np.empty((nt + 1, nx))
    v[nt] = U

    d, weight, flat, bad = fitted_slopes_k(v[nt], dx, jump_nodes)
    if strict and bad >= 0:
        return v, a, nt, bad
    dv = jump_difference_k(v[nt], jump_nodes)
    S = M * mean_path[nt] + beta_path[nt]
    a[nt] = control_k(v[nt], d, flat, dv, S, D, c, cap, ruin)

    for n in range(nt - 1, -1, -1):
        S1 = M * mean_path[n + 1] + beta_path[n + 1]
        v[n] = hjb_step_k(v[n + 1], dv, weight, a[n + 1], S1, S1, D, c, dt, dx, ruin)
        d, weight, flat, bad = fitted_slopes_k(v[n], dx, jump_nodes)
        if strict and bad >= 0:
            return v, a, n, bad
        dv = jump_difference_k(v[n], jump_nodes)
        S = M * mean_path[n] + beta_path[n]
        a[n] = control_k(v[n], d, flat, dv, S, D, c, cap, ruin)
    return v, a, -1, -1


@njit(cache=True)
def fp_step_k(m, alpha, M_abar_beta, D, c, dt, dx, jump_nodes):
    """One implicit forward step of the density.

    Solves the M-matrix system with drift superdiagonal and the jump inflow
    band at offset -J by forward elimination in solved form
    m_j = e_j + f_j m_{j+1}, chaining the inflow unknown m_{j-J} up to m_j
    (O(nx * J)), then one backward substitution.
    """
    nx = m.shape[0]
    J = jump_nodes
    lamdt = np.empty(nx)
    nu = np.empty(nx)
    for j in range(nx):
        denom = D * (alpha[j] + M_abar_beta)
        lam = alpha[j] / denom if denom > 0.0 else 0.0
        lamdt[j] = dt * lam
        nu[j] = c * alpha[j] * dt / dx
    e = np.empty(nx)
    f = np.empty(nx)
    for j in range(nx):
        diag = 1.0 + nu[j] + lamdt[j]
        sup = nu[j + 1] if j < nx - 1 else 0.0
        if j >= J:
            w = lamdt[j - J]
            E = e[j - J]
            F = f[j - J]
            for k in range(j - J + 1, j):
                E += F * e[k]
                F *= f[k]
            denom2 = diag - w * F
            e[j] = (m[j] + w * E) / denom2
            f[j] = sup / denom2
        else:
            e[j] = m[j] / diag
            f[j] = sup / diag
    out = np.empty(nx)
    out[nx - 1] = e[nx - 1]
    for j in range(nx - 2, -1, -1):
        out[j] = e[j] + f[j] * out[j + 1]
    return out


@njit(cache=True)
def fp_sweep_k(alpha_surface, mean_path, beta_path, m0, M, D, c, dt, dx, jump_nodes):
    """Forward sweep t0 -> T; returns (m surface, |mass - 1| per level)."""
    nt = mean_path.shape[0] - 1
    nx = m0.shape[0]
    m = np.empty((nt + 1, nx))
    err = np.empty(nt + 1)
    m[0] = m0
    err[0] = abs(m0.sum() * dx - 1.0)
    for n in range(nt):
        S = M * mean_path[n] + beta_path[n]
        m[n + 1] = fp_step_k(m[n], alpha_surface[n], S, D, c, dt, dx, jump_nodes)
        err[n + 1] = abs(m[n + 1].sum() * dx - 1.0)
    return m, err
