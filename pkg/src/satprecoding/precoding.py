"""Linear frame-based precoders and their power/SINR accounting.

Conventions: ``H`` is ``(N_u, N_t)`` with row ``i`` the conjugate channel of
user ``i``; ``W`` is ``(N_t, G)`` with column ``k`` the beamformer of group
``k``.  User ``i`` receives ``H[i] @ W[:, k]`` from group ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import GroupSchedule
from .errors import ConfigurationError, NumericalRankError


def per_antenna_power(W) -> np.ndarray:
    """Power radiated by each element, ``diag(W W^H)``."""
    W = np.asarray(W)
    return np.sum(np.abs(W) ** 2, axis=1)


def total_power(W) -> float:
    return float(np.sum(np.abs(np.asarray(W)) ** 2))


def received_gains(H, W) -> np.ndarray:
    """``|h_i^H w_k|^2`` for every user/group pair, shape (N_u, G)."""
    return np.abs(np.asarray(H) @ np.asarray(W)) ** 2


def sinr(H, W, sched: GroupSchedule, noise=1.0) -> np.ndarray:
    """Per-user SINR (linear) when group ``k``'s beamformer serves its members."""
    gains = received_gains(H, W)
    serving = sched.assignment
    idx = np.arange(len(serving))
    signal = gains[idx, serving]
    interference = gains.sum(axis=1) - signal
    noise = np.broadcast_to(np.asarray(noise, dtype=float), signal.shape)
    denom = interference + noise
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(signal > 0, signal / denom, 0.0)


def mmse_cost(W, slices, beta: float) -> float:
    """Sum of squared errors over all equivalent channels plus the power penalty."""
    slices = np.asarray(slices)
    rho, n = slices.shape[0], slices.shape[1]
    E = slices @ W - np.eye(n)
    return float(np.sum(np.abs(E) ** 2) + rho * beta * np.sum(np.abs(W) ** 2))


def mmse_gradient(W, slices, beta: float) -> np.ndarray:
    """Wirtinger gradient of :func:`mmse_cost` with respect to ``conj(W)``.

    A real perturbation ``dW`` changes the cost by ``2 Re <grad, dW>``.
    """
    slices = np.asarray(slices)
    rho, n = slices.shape[0], slices.shape[1]
    Hh = np.conj(np.swapaxes(slices, 1, 2))
    return np.sum(Hh @ (slices @ W - np.eye(n)), axis=0) + rho * beta * W


def stationarity_residual(W, slices, beta: float) -> float:
    """Frobenius norm of ``(sum H^H H + rho beta I) W - sum H^H``."""
    return float(np.linalg.norm(mmse_gradient(W, slices, beta)))


def mmse_precoder(slices, beta: float, rcond: float = 1e-12) -> np.ndarray:
    """Multicast-aware MMSE precoder averaged over the ``rho`` equivalent channels.

    Solves ``(mean H^H H + beta I) W = mean H^H``.
    """
    slices = np.asarray(slices)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    n = slices.shape[2]
    Hh = np.conj(np.swapaxes(slices, 1, 2))
    gram = np.mean(Hh @ slices, axis=0) + beta * np.eye(n)
    rhs = np.mean(Hh, axis=0)
    s = np.linalg.svd(gram, compute_uv=False)
    if s[-1] <= rcond * s[0]:
        raise NumericalRankError(f"MMSE system is singular (cond={s[0] / max(s[-1], 1e-300):.3g})")
    return np.linalg.solve(gram, rhs)


def mmse_regularizer(noise: float, budget) -> float:
    """``beta = noise / mean(P_n)``; equals ``noise / P_n`` for uniform budgets."""
    budget = np.asarray(budget, dtype=float)
    return float(noise * len(budget) / budget.sum())


def rescale_to_pac(W, budget) -> np.ndarray:
    """Scale down every row whose power exceeds its antenna limit; others stay put."""
    W = np.array(W, dtype=complex)
    budget = np.asarray(budget, dtype=float)
    power = per_antenna_power(W)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(power > budget, np.sqrt(budget / power), 1.0)
    W *= factor[:, None]
    # sqrt rounding can leave a row a few ulps above its limit
    over = per_antenna_power(W) > budget
    W[over] *= 1 - 4 * np.finfo(float).eps
    return W


def normalize_total_power(W, budget) -> np.ndarray:
    """Scale ``W`` so that its total power equals ``sum(budget)``."""
    W = np.asarray(W, dtype=complex)
    p = total_power(W)
    if p == 0:
        return W.copy()
    return W * np.sqrt(np.sum(budget) / p)


def mmse_rescaled(slices, budget, noise: float = 1.0) -> np.ndarray:
    """MMSE precoder normalised to the total budget, then clipped per antenna."""
    W = mmse_precoder(slices, mmse_regularizer(noise, budget))
    return rescale_to_pac(normalize_total_power(W, budget), budget)


@dataclass(frozen=True)
class RateInputs:
    sinr: np.ndarray
    bandwidth_fraction: float


def beam_adjacency(centers, rtol: float = 0.05) -> np.ndarray:
    """Beams whose centers sit at the minimum lattice pitch are adjacent."""
    centers = np.asarray(centers, dtype=float)
    d = np.linalg.norm(centers[:, None] - centers[None], axis=2)
    if len(centers) < 2:
        return np.zeros((len(centers),) * 2, dtype=bool)
    pitch = d[np.triu_indices(len(centers), 1)].min()
    adj = d <= pitch * (1 + rtol)
    np.fill_diagonal(adj, False)
    return adj


def _color(conflict: np.ndarray, n_colors: int) -> list[int] | None:
    n = len(conflict)
    order = np.argsort(-conflict.sum(axis=1), kind="stable")
    colors = [-1] * n

    def place(pos: int) -> bool:
        if pos == n:
            return True
        v = order[pos]
        for c in range(n_colors):
            if all(colors[u] != c for u in np.flatnonzero(conflict[v])):
                colors[v] = c
                if place(pos + 1):
                    return True
        colors[v] = -1
        return False

    return colors if place(0) else None


def four_coloring(centers) -> np.ndarray:
    """Four-color assignment maximising the minimum co-color beam distance."""
    centers = np.asarray(centers, dtype=float)
    n = len(centers)
    if n <= 4:
        return np.arange(n)
    d = np.linalg.norm(centers[:, None] - centers[None], axis=2)
    for threshold in np.unique(np.round(d[np.triu_indices(n, 1)], 6))[::-1]:
        conflict = d < threshold * (1 - 1e-9)
        np.fill_diagonal(conflict, False)
        colors = _color(conflict, 4)
        if colors is not None:
            return np.array(colors)
    raise ConfigurationError("no 4-coloring found")


def four_color_baseline(H, sched: GroupSchedule, budget, coloring, noise=1.0) -> RateInputs:
    """Conventional 4-color reuse: beam ``k`` radiates ``P_k`` from feed ``k`` on its color.

    Only beams sharing a color interfere.  ``noise`` is the noise power in one
    color's sub-band.  The returned bandwidth fraction is 1/4.
    """
    H = np.asarray(H)
    coloring = np.asarray(coloring, dtype=int)
    budget = np.asarray(budget, dtype=float)
    if coloring.shape != (H.shape[1],):
        raise ConfigurationError("coloring needs one color per beam")
    if np.any((coloring < 0) | (coloring > 3)):
        raise ConfigurationError("coloring must use exactly the 4 colors 0..3")
    W = np.diag(np.sqrt(budget))
    gains = received_gains(H, W)
    serving = sched.assignment
    same = coloring[None, :] == coloring[serving][:, None]
    idx = np.arange(len(serving))
    signal = gains[idx, serving]
    interference = np.sum(np.where(same, gains, 0.0), axis=1) - signal
    noise = np.broadcast_to(np.asarray(noise, dtype=float), signal.shape)
    return RateInputs(sinr=signal / (interference + noise), bandwidth_fraction=0.25)
