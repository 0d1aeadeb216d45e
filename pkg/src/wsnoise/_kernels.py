"""Compiled inner loops for the two strictly sequential recurrences.

Both kernels mirror a pure-Python reference (``noise.step`` and
``lz.lz_step_matrix``) operation for operation; tests compare the two.
"""
from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True)
def heun_path(phi0, mu0, gamma, omega0, sigma, dt, xi):
    n = xi.shape[0]
    phi = np.empty(n + 1)
    mu = np.empty(n + 1)
    phi[0] = phi0
    mu[0] = mu0
    w2 = omega0 * omega0
    sq = math.sqrt(dt)
    p = phi0
    m = mu0
    for i in range(n):
        dw = sigma * sq * xi[i]
        a0 = -2.0 * gamma * m - w2 * p
        pp = p + m * dt
        mp = m + a0 * dt + dw
        ap = -2.0 * gamma * mp - w2 * pp
        p = p + 0.5 * (m + mp) * dt
        m = m + 0.5 * (a0 + ap) * dt + dw
        phi[i + 1] = p
        mu[i + 1] = m
    return phi, mu


@numba.njit(cache=True)
def lz_propagate(t_start, dt, f0, coupling, start_level):
    """Exact 2x2 exponential per step of H = 1/2 [[-f0 t, c], [conj(c), f0 t]].

    ``coupling`` has shape (realizations, steps) and holds ``c`` at each step
    midpoint. Returns the population of the level *not* occupied at
    ``t_start`` after every step (column 0 is the initial value) and the
    largest norm deviation seen.
    """
    n_real, n_steps = coupling.shape
    out = np.empty((n_real, n_steps + 1))
    worst = 0.0
    for r in range(n_real):
        if start_level == 0:
            c0 = 1.0 + 0.0j
            c1 = 0.0 + 0.0j
        else:
            c0 = 0.0 + 0.0j
            c1 = 1.0 + 0.0j
        other = 1 - start_level
        out[r, 0] = 0.0
        for i in range(n_steps):
            a = f0 * (t_start + (i + 0.5) * dt)
            c = coupling[r, i]
            h = 0.5 * math.sqrt(a * a + c.real * c.real + c.imag * c.imag)
            if h > 0.0:
                cs = math.cos(h * dt)
                s = math.sin(h * dt) / h
            else:
                cs = 1.0
                s = dt
            u00 = cs + 0.5j * s * a
            u11 = cs - 0.5j * s * a
            u01 = -0.5j * s * c
            u10 = -0.5j * s * c.conjugate()
            n0 = u00 * c0 + u01 * c1
            n1 = u10 * c0 + u11 * c1
            c0 = n0
            c1 = n1
            if other == 0:
                out[r, i + 1] = c0.real * c0.real + c0.imag * c0.imag
            else:
                out[r, i + 1] = c1.real * c1.real + c1.imag * c1.imag
        dev = abs(c0.real * c0.real + c0.imag * c0.imag + c1.real * c1.real + c1.imag * c1.imag - 1.0)
        if dev > worst:
            worst = dev
    return out, worst
