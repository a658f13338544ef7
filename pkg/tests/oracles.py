"""Independent reference computations used by the tests.

Nothing here imports the package under test.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

# dB-domain hand calculation of one link gain entry:
#   20 GHz carrier, 35 786 km slant range, 52 dBi feed gain, 40.7 dBi terminal,
#   235.3 K clear-sky temperature, 500 MHz bandwidth, Boltzmann 1.380649e-23.
# FSPL 209.5426 dB, noise -117.8932 dBW, so |b|^2 = 1.0506 dB.
LINK_GAIN_GOLDEN = 1.128574098082325


def link_gain_db_domain(freq, distance, g_tx_dbi, g_rx_dbi, temp, bandwidth, kappa=1.380649e-23):
    fspl = 20 * math.log10(4 * math.pi * distance * freq / 299_792_458.0)
    noise = 10 * math.log10(kappa * temp * bandwidth)
    return 10 ** ((g_tx_dbi + g_rx_dbi - fspl - noise) / 20)


def min_sinr(H, W, assignment, noise=1.0):
    g = np.abs(H @ W) ** 2
    idx = np.arange(len(assignment))
    sig = g[..., idx, assignment]
    return np.min(sig / (g.sum(axis=-1) - sig + noise), axis=-1)


def _precoders(theta1, theta2, f, phi1, phi2, full_first, budget):
    """2x2 precoders with one antenna at its full limit.

    Row ``n`` holds the two group weights of antenna ``n``; their split is
    ``theta_n`` and the partially loaded antenna carries fraction ``f`` of
    its limit.  Column phases are fixed so that antenna 0 is real.
    """
    a = np.where(full_first, 1.0, np.sqrt(f))
    b = np.where(full_first, np.sqrt(f), 1.0)
    r0 = np.sqrt(budget[0]) * a
    r1 = np.sqrt(budget[1]) * b
    W = np.empty(np.broadcast(theta1, theta2, f, phi1, phi2).shape + (2, 2), dtype=complex)
    W[..., 0, 0] = r0 * np.cos(theta1)
    W[..., 0, 1] = r0 * np.sin(theta1)
    W[..., 1, 0] = r1 * np.cos(theta2) * np.exp(1j * phi1)
    W[..., 1, 1] = r1 * np.sin(theta2) * np.exp(1j * phi2)
    return W


def brute_force_maxmin_2x2(H, assignment, budget=(1.0, 1.0), noise=1.0, n_grid=14, n_polish=4):
    """Max-min SINR over 2x2 precoders by exhaustive grid search plus local polish.

    Some antenna is always at its limit at the optimum (otherwise scaling
    the whole precoder up helps every user), which leaves five angles and
    one of two branches.
    """
    H = np.asarray(H, dtype=complex)
    assignment = np.asarray(assignment)
    budget = np.asarray(budget, dtype=float)
    quarter = np.linspace(0, np.pi / 2, n_grid)
    frac = np.linspace(0, 1, n_grid)
    turn = np.linspace(0, 2 * np.pi, 2 * n_grid, endpoint=False)

    starts = []
    for full_first in (True, False):
        for t1 in quarter:
            T2, F, P1, P2 = np.meshgrid(quarter, frac, turn, turn, indexing="ij")
            W = _precoders(t1, T2, F, P1, P2, full_first, budget)
            vals = min_sinr(H, W, assignment, noise).ravel()
            top = np.argsort(vals)[-n_polish:]
            for j in top:
                x = (t1, T2.ravel()[j], F.ravel()[j], P1.ravel()[j], P2.ravel()[j])
                starts.append((vals[j], full_first, x))
    starts.sort(key=lambda s: -s[0])
    best = starts[0][0]

    def objective(x, full_first):
        t1, t2, f, p1, p2 = x
        t1, t2 = np.clip([t1, t2], 0, np.pi / 2)
        f = np.clip(f, 0, 1)
        W = _precoders(t1, t2, f, p1, p2, full_first, budget)
        return -float(min_sinr(H, W, assignment, noise))

    for _, full_first, x in starts[: 2 * n_polish]:
        res = minimize(objective, np.array(x, dtype=float), args=(full_first,), method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 4000})
        best = max(best, -res.fun)
    return best
