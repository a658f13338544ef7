"""Weighted max-min fair multigroup multicast beamforming under per-antenna limits.

The solver bisects on the fairness level ``t``.  Each step solves the
semidefinite relaxation of the feasibility problem (``X_k = w_k w_k^H`` with
the rank constraint dropped).  The last feasible relaxation is turned into
beamformers by Gaussian randomization, and each random candidate keeps its
directions while its group powers are re-optimised.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import GroupSchedule, _rng
from .csvio import format_complex_rows
from .errors import ConfigurationError, SolverError
from .precoding import per_antenna_power, received_gains, rescale_to_pac
from .sdp import ClarabelBackend, FeasibilityData, SdpBackend, constraint_margin

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FairnessProblem:
    H: np.ndarray
    sched: GroupSchedule
    gammas: np.ndarray = 1.0
    budget: np.ndarray = 1.0
    noise: np.ndarray = 1.0

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        n_users, n_ant = H.shape
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "gammas", np.broadcast_to(np.asarray(self.gammas, float), (n_users,)).copy())
        object.__setattr__(self, "budget", np.broadcast_to(np.asarray(self.budget, float), (n_ant,)).copy())
        object.__setattr__(self, "noise", np.broadcast_to(np.asarray(self.noise, float), (n_users,)).copy())
        if self.sched.n_users != n_users:
            raise ConfigurationError("schedule and channel disagree on the number of users")
        if np.any(self.gammas <= 0):
            raise ConfigurationError("SINR weights must be positive")
        if np.any(self.budget <= 0):
            raise ConfigurationError("per-antenna limits must be positive")
        if np.any(self.noise <= 0):
            raise ConfigurationError("noise powers must be positive")

    @property
    def n_antennas(self) -> int:
        return self.H.shape[1]

    @property
    def n_groups(self) -> int:
        return self.sched.n_groups

    @property
    def covariances(self) -> np.ndarray:
        """``R_i`` with ``|h_i^H w|^2 = w^H R_i w``."""
        return np.conj(self.H)[:, :, None] * self.H[:, None, :]

    def weighted_sinr(self, W) -> np.ndarray:
        gains = received_gains(self.H, W)
        serving = self.sched.assignment
        signal = gains[np.arange(len(serving)), serving]
        interference = gains.sum(axis=1) - signal
        return signal / (interference + self.noise) / self.gammas

    def level(self, W) -> float:
        """Minimum weighted SINR achieved by ``W``."""
        return float(self.weighted_sinr(W).min())

    def upper_bound(self) -> float:
        """Interference-free bound under the per-antenna limits.

        With every feed at full power and phase-aligned to one user,
        ``|h^H w| <= sum_n |h_n| sqrt(P_n)``; no precoder does better for that user.
        """
        amp = np.abs(self.H) @ np.sqrt(self.budget)
        return float(np.min(amp**2 / (self.gammas * self.noise)))

    def matched_filter(self) -> np.ndarray:
        """Per-group sum of unit matched filters, scaled into the per-antenna limits."""
        W = np.zeros((self.n_antennas, self.n_groups), dtype=complex)
        norms = np.linalg.norm(self.H, axis=1)
        for k, members in enumerate(self.sched.groups):
            W[:, k] = np.sum(np.conj(self.H[members]) / np.maximum(norms[members], 1e-300)[:, None], axis=0)
        power = per_antenna_power(W).max()
        if power == 0:
            return W
        return rescale_to_pac(W * np.sqrt(self.budget.min() / power), self.budget)


@dataclass(frozen=True)
class SdrIterate:
    X: np.ndarray
    t: float
    slack: float = 0.0

    def relaxed_level(self, prob: FairnessProblem) -> float:
        """Minimum weighted SINR of the relaxation, ``tr(R X)`` in place of ``|h^H w|^2``."""
        tr = np.real(np.einsum("iab,kba->ik", prob.covariances, self.X))
        serving = prob.sched.assignment
        signal = tr[np.arange(len(serving)), serving]
        interference = tr.sum(axis=1) - signal
        with np.errstate(divide="ignore", invalid="ignore"):
            lv = signal / (interference + prob.noise) / prob.gammas
        return float(np.min(lv))


def numerical_rank(X, ratio: float = 1e-6) -> int:
    ev = np.linalg.eigvalsh(X)
    if ev[-1] <= 0:
        return 0
    return int(np.sum(ev > ratio * ev[-1]))


def feasibility_data(prob: FairnessProblem, t: float) -> FeasibilityData:
    scale = prob.budget.mean()
    return FeasibilityData(
        Q=prob.covariances * (scale / prob.noise)[:, None, None],
        weights=prob.gammas,
        assignment=prob.sched.assignment,
        n_groups=prob.n_groups,
        pac=prob.budget / scale,
        t=float(t),
    )


def sdr_feasibility(
    prob: FairnessProblem,
    t: float,
    backend: SdpBackend | None = None,
    slack_tol: float = 1e-8,
) -> SdrIterate | None:
    """Relaxed feasibility at level ``t``: an iterate, or ``None`` when infeasible."""
    if t < 0:
        raise ValueError("level must be non-negative")
    G, n = prob.n_groups, prob.n_antennas
    if t == 0:
        return SdrIterate(X=np.zeros((G, n, n), dtype=complex), t=0.0)
    backend = backend or ClarabelBackend()
    data = feasibility_data(prob, t)
    res = backend.solve(data)
    verdict, X = res.certify(data, slack_tol)
    if verdict is None:
        raise SolverError(
            "relaxation left undecided",
            stage="sdr_feasibility",
            diagnostics={"status": res.status, "t": t, "slack": res.slack, "bound": res.bound},
        )
    if not verdict:
        return None
    return SdrIterate(X=X * prob.budget.mean(), t=float(t), slack=-constraint_margin(X, data))


@dataclass
class BisectionResult:
    t_lower: float
    t_upper: float
    iterate: SdrIterate
    trace: list[tuple[float, bool]] = field(default_factory=list)

    def ranks(self, ratio: float = 1e-6) -> list[int]:
        return [numerical_rank(x, ratio) for x in self.iterate.X]


def bisect_fairness(
    prob: FairnessProblem,
    t_lo: float,
    t_hi: float,
    eps: float = 1e-3,
    backend: SdpBackend | None = None,
    slack_tol: float = 1e-8,
    rank_ratio: float = 1e-6,
    rank_one_gap: float | None = None,
    max_expansions: int = 8,
    growth: float = 8.0,
) -> BisectionResult:
    """Bisect the relaxed max-min level until ``t_hi - t_lo <= eps * t_hi``.

    Starting from ``t_lo = 0`` the matched-filter level seeds the search, which
    then climbs by factors of ``growth`` until a level turns infeasible.  Steps
    are geometric once a positive feasible level is known.  A feasible
    step also lifts ``t_lo`` to the level its relaxed iterate actually reaches.
    With ``rank_one_gap`` set, bisection continues to that absolute gap when the
    iterate at ``t_lo`` has rank one in every group.
    """
    backend = backend or ClarabelBackend()
    trace: list[tuple[float, bool]] = []

    def check(t):
        it = sdr_feasibility(prob, t, backend, slack_tol)
        trace.append((float(t), it is not None))
        return it

    best = check(t_lo)
    if best is None:
        raise SolverError("lower bisection bound is infeasible", stage="bisect", diagnostics={"t_lo": t_lo})
    lo = t_lo
    hi = t_hi
    if lo == 0:
        W0 = prob.matched_filter()
        t0 = prob.level(W0)
        if 0 < t0 < hi:
            # a rank-one point that meets every constraint at its own level
            best = SdrIterate(X=np.einsum("ak,bk->kab", W0, np.conj(W0)), t=t0)
            lo = t0
    # Climb from below: relaxations far above the optimum are degenerate
    # (slack near 1, X near 0) and interior-point solvers stall on them.
    while lo > 0 and lo * growth < hi:
        it = check(lo * growth)
        if it is None:
            hi = lo * growth
            break
        best = it
        lo = max(lo * growth, it.relaxed_level(prob))
    else:
        for _ in range(max_expansions + 1):
            top = check(hi)
            if top is None:
                break
            best, lo = top, hi
            hi *= 2
        else:
            raise SolverError("upper bisection bound stays feasible", stage="bisect", diagnostics={"t_hi": hi})
    if lo > 0:
        lo = min(max(lo, best.relaxed_level(prob)), hi)

    def gap_open():
        if hi - lo > eps * hi:
            return True
        if rank_one_gap is None or hi - lo <= rank_one_gap or lo <= 0:
            return False
        if hi - lo <= 1e-10 * hi:
            return False
        return all(numerical_rank(x, rank_ratio) == 1 for x in best.X)

    while gap_open():
        mid = np.sqrt(lo * hi) if lo > 0 else 0.5 * hi
        try:
            it = check(mid)
        except SolverError as exc:
            if lo <= 0:
                raise
            # the bracket [lo, hi] is still certified; stop refining it
            log.debug("bisection stopped at gap %.3g: %s", hi - lo, exc)
            break
        if it is None:
            hi = mid
        else:
            best = it
            lo = min(max(mid, it.relaxed_level(prob)), hi)
    return BisectionResult(t_lower=float(lo), t_upper=float(hi), iterate=best, trace=trace)


def gaussian_randomize(iterate: SdrIterate, n_rand: int, seed=0, rank_ratio: float = 1e-6) -> np.ndarray:
    """Random beamformer candidates ``w_k = X_k^{1/2} v`` with ``v ~ CN(0, I)``.

    Returns shape ``(C, N_t, G)``.  When every ``X_k`` has rank one, the scaled
    principal eigenvectors come first, so ``C = n_rand + 1``.
    """
    X = iterate.X
    G, n, _ = X.shape
    ev, U = np.linalg.eigh(X)
    ev = np.clip(ev, 0.0, None)
    root = U * np.sqrt(ev)[:, None, :]  # X_k = root_k root_k^H
    rng = _rng(seed)
    v = (rng.standard_normal((n_rand, G, n)) + 1j * rng.standard_normal((n_rand, G, n))) / np.sqrt(2)
    draws = np.einsum("kab,ckb->cak", root, v)
    if all(numerical_rank(x, rank_ratio) == 1 for x in X):
        principal = (U[:, :, -1] * np.sqrt(ev[:, -1])[:, None]).T
        draws = np.concatenate([principal[None], draws])
    return draws


def _least_powers(t, a, noise, gammas, members, max_iter=100):
    """Least group powers meeting level ``t`` for fixed directions, batched.

    ``a[c, i, l]`` is the gain of user ``i`` from unit-norm direction ``l`` of
    candidate ``c``.  Group ``k`` needs
    ``q_k >= max_{i in k} t g_i (sum_{l != k} a_il q_l + noise_i) / a_ik``; the
    least solution of this piecewise-linear system is found by policy
    iteration.  Rows are ``inf`` where no finite powers reach level ``t``.
    """
    C, _, G = a.shape
    t = np.broadcast_to(np.asarray(t, float), (C,))
    users = members.T  # (rho, G): users[j, k] is member j of group k
    own = a[:, users, np.arange(G)]  # (C, rho, G)
    with np.errstate(divide="ignore"):
        coef = t[:, None, None] * gammas[users] / own
    dead = ~np.all(np.isfinite(coef), axis=(1, 2))
    coef = np.where(np.isfinite(coef), coef, 0.0)
    cross = a[:, users, :] * ~np.eye(G, dtype=bool)  # (C, rho, G, G), zero on l == k
    lin = coef[..., None] * cross
    base = coef * noise[users]

    result = np.full((C, G), np.inf)
    q0 = np.zeros((C, G))
    policy = np.argmax(base, axis=1)  # (C, G)
    active = ~dead
    cols = np.arange(G)[None, :]
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        M = lin[idx[:, None], policy[idx], cols]  # (c, G, G)
        b = base[idx[:, None], policy[idx], cols]
        with np.errstate(all="ignore"):
            try:
                q = np.linalg.solve(np.eye(G) - M, b[..., None])[..., 0]
            except np.linalg.LinAlgError:
                q = np.stack([_safe_solve(np.eye(G) - m, bb) for m, bb in zip(M, b)])
        bad = ~np.all(np.isfinite(q) & (q >= 0), axis=1)
        q = np.where(bad[:, None], q0[idx], q)
        vals = np.einsum("cjkl,cl->cjk", lin[idx], q) + base[idx]
        fixed = np.all(vals.max(axis=1) <= q * (1 + 1e-12), axis=1)
        done = fixed & ~bad
        result[idx[done]] = q[done]
        active[idx[bad | done]] = False
        policy[idx] = np.argmax(vals, axis=1)
    return result


def _safe_solve(M, b):
    try:
        return np.linalg.solve(M, b)
    except np.linalg.LinAlgError:
        return np.full_like(b, np.nan)


@dataclass(frozen=True)
class PowerControlResult:
    W: np.ndarray
    t: float
    index: int
    levels: np.ndarray


def power_control_fixed_directions(
    candidates, prob: FairnessProblem, eps: float = 1e-9, max_steps: int = 200
) -> PowerControlResult:
    """Best candidate after optimal per-group power scaling of its directions.

    Each candidate's unit-norm directions get powers ``q_k >= 0`` maximising
    the minimum weighted SINR under ``sum_k q_k |w_k[n]|^2 <= P_n``; the level
    is found by bisection with an exact least-power feasibility test.  Ties go
    to the lowest candidate index.
    """
    cand = np.asarray(candidates, dtype=complex)
    if cand.ndim == 2:
        cand = cand[None]
    if len(cand) == 0:
        raise ValueError("at least one candidate is required")
    norms = np.linalg.norm(cand, axis=1, keepdims=True)
    D = np.divide(cand, norms, out=np.zeros_like(cand), where=norms > 0)
    a = np.abs(np.einsum("in,cnk->cik", prob.H, D)) ** 2  # (C, N_u, G)
    load = np.abs(D) ** 2  # (C, N_t, G)
    members = np.stack(prob.sched.groups)  # (G, rho)
    noise, gammas, budget = prob.noise, prob.gammas, prob.budget

    with np.errstate(divide="ignore"):
        q_max = np.min(np.where(load > 0, budget[None, :, None] / load, np.inf), axis=1)  # (C, G)
    q_max = np.where(np.isinf(q_max), 0.0, q_max)
    serving = prob.sched.assignment
    own = a[:, np.arange(len(serving)), serving]
    hi = np.min(own * q_max[:, serving] / (gammas * noise), axis=1)
    hi = np.maximum(hi, 0.0)
    lo = np.zeros(len(cand))
    q_lo = np.zeros((len(cand), prob.n_groups))

    def feasible(t):
        q = _least_powers(t, a, noise, gammas, members)
        power = np.einsum("cnk,ck->cn", load, np.where(np.isfinite(q), q, 0.0))
        ok = np.all(np.isfinite(q), axis=1) & np.all(power <= budget * (1 + 1e-12), axis=1)
        return ok, q

    # the level is unattainable above hi; start the bracket a decade below it
    probe = hi * 0.1
    live = hi > 0
    for _ in range(60):
        ok, q = feasible(np.where(live, probe, 0.0))
        upd = live & ok
        lo[upd] = probe[upd]
        q_lo[upd] = q[upd]
        down = live & ~ok
        if not down.any():
            break
        hi[down] = probe[down]
        probe[down] *= 0.1
    for _ in range(max_steps):
        open_ = live & (lo > 0) & (hi - lo > eps * hi)
        if not open_.any():
            break
        mid = np.where(open_, np.sqrt(np.maximum(lo, 1e-300) * hi), lo)
        ok, q = feasible(mid)
        upd = open_ & ok
        lo[upd] = mid[upd]
        q_lo[upd] = q[upd]
        dn = open_ & ~ok
        hi[dn] = mid[dn]

    best = int(np.argmax(lo))
    if lo[best] <= 0:
        warnings.warn("every randomization candidate reaches level 0", RuntimeWarning, stacklevel=2)
        W = D[0] * np.sqrt(q_max[0])[None, :] / max(prob.n_groups, 1)
    else:
        W = D[best] * np.sqrt(q_lo[best])[None, :]
    # spend any slack: a common up-scaling never lowers an SINR
    power = per_antenna_power(W)
    with np.errstate(divide="ignore", invalid="ignore"):
        room = np.min(np.where(power > 0, budget / power, np.inf))
    if np.isfinite(room) and room > 1:
        W = W * np.sqrt(room)
    W = rescale_to_pac(W, budget)
    return PowerControlResult(W=W, t=prob.level(W), index=best, levels=lo)


def polish_precoder(W, prob: FairnessProblem, max_iter: int = 200) -> np.ndarray:
    """Local ascent of the minimum weighted SINR from a feasible precoder.

    Maximises ``tau`` subject to ``SINR_i(W) / g_i >= tau * t0`` and the
    per-antenna limits with SLSQP, starting from ``W`` at its level ``t0``.  The
    conic iterate behind ``W`` is accurate to the interior-point tolerance
    only; where interference is almost nulled that error costs a visible
    fraction of the level, which this step recovers.  Returns ``W`` itself
    when nothing better is found.
    """
    from scipy.optimize import minimize

    W = np.asarray(W, dtype=complex)
    t0 = prob.level(W)
    if not t0 > 0:
        return W
    n, G = W.shape
    scale = prob.budget.mean()
    Hs = prob.H * np.sqrt(scale / prob.noise)[:, None]
    pac = prob.budget / scale
    serving = prob.sched.assignment
    own = np.zeros((len(serving), G), dtype=bool)
    own[np.arange(len(serving)), serving] = True
    inv = 1.0 / (prob.gammas * t0)
    p0 = np.abs(Hs @ (W / np.sqrt(scale))) ** 2
    # each SINR row divided by its starting interference-plus-noise
    row = 1.0 / (p0.sum(axis=1) - p0[own] + 1.0)

    def unpack(z):
        m = n * G
        return (z[:m] + 1j * z[m : 2 * m]).reshape(n, G), z[-1]

    def cons(z):
        Wn, tau = unpack(z)
        p = np.abs(Hs @ Wn) ** 2
        sig = p[own]
        inter = p.sum(axis=1) - sig
        pw = np.sum(np.abs(Wn) ** 2, axis=1)
        return np.concatenate([row * (sig * inv - tau * (inter + 1.0)), pac - pw])

    def jac(z):
        Wn, tau = unpack(z)
        g = Hs @ Wn
        p = np.abs(g) ** 2
        coef = np.where(own, inv[:, None], -tau)
        m = 2 * np.conj(g)[:, None, :] * Hs[:, :, None] * coef[:, None, :]  # (N_u, n, G)
        inter = p.sum(axis=1) - p[own]
        J_sinr = np.hstack([m.real.reshape(len(g), -1), -m.imag.reshape(len(g), -1), -(inter + 1.0)[:, None]])
        J_pac = np.zeros((n, 2 * n * G + 1))
        rows = np.repeat(np.arange(n), G)
        J_pac[rows, np.arange(n * G)] = -2 * Wn.real.ravel()
        J_pac[rows, n * G + np.arange(n * G)] = -2 * Wn.imag.ravel()
        return np.vstack([row[:, None] * J_sinr, J_pac])

    W0 = W / np.sqrt(scale)
    z0 = np.concatenate([W0.real.ravel(), W0.imag.ravel(), [1.0]])
    obj_grad = np.zeros_like(z0)
    obj_grad[-1] = -1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = minimize(
            lambda z: -z[-1],
            z0,
            jac=lambda z: obj_grad,
            constraints=[{"type": "ineq", "fun": cons, "jac": jac}],
            method="SLSQP",
            options={"maxiter": max_iter, "ftol": 1e-15},
        )
    Wn, _ = unpack(res.x)
    cand = rescale_to_pac(Wn * np.sqrt(scale), prob.budget)
    return cand if np.all(np.isfinite(cand)) and prob.level(cand) > t0 else W


def tighten_upper_bound(
    prob: FairnessProblem,
    t_achieved: float,
    t_hi: float,
    backend: SdpBackend | None = None,
    slack_tol: float = 1e-8,
    max_probes: int = 6,
    trace: list | None = None,
    target: float = 0.0,
) -> float:
    """Pull a certified-infeasible level down towards an achieved one.

    Probes ``t_achieved + d`` with ``d`` halving from ``(t_hi - t_achieved) / 2``
    and keeps every level the relaxation proves infeasible; stops at the first
    probe that is feasible or undecided, or after ``max_probes``.  If that leaves
    ``hi - t_achieved > target``, levels ``t_achieved + target * 2**j`` are tried
    from the bottom up: near the optimum a loose solve can call a level feasible
    that a closer probe still proves infeasible.
    """
    backend = backend or ClarabelBackend()

    def infeasible(t):
        try:
            it = sdr_feasibility(prob, t, backend, slack_tol)
        except SolverError:
            return False
        if trace is not None:
            trace.append((float(t), it is not None))
        return it is None

    hi = t_hi
    for _ in range(max_probes):
        t = t_achieved + 0.5 * (hi - t_achieved)
        if hi - t_achieved <= target or not t_achieved < t < hi or not infeasible(t):
            break
        hi = t
    d = target
    while target > 0 and t_achieved + d < hi:
        if infeasible(t_achieved + d):
            return t_achieved + d
        d *= 2
    return hi


@dataclass(frozen=True)
class SolverConfig:
    eps_bisect: float = 1e-3
    n_rand: int = 100
    seed: int = 0
    slack_tol: float = 1e-8
    rank_ratio: float = 1e-6
    rank_one_gap: float | None = 2e-5
    eps_power: float = 1e-9
    polish: bool = True
    backend: SdpBackend | None = None


@dataclass
class SolverReport:
    W: np.ndarray
    t_achieved: float
    t_sdr_bound: float
    t_sdr_lower: float
    bisection_trace: list[tuple[float, bool]]
    n_randomizations: int
    ranks: list[int]
    candidate_index: int = 0

    @property
    def rank_one(self) -> bool:
        return all(r == 1 for r in self.ranks)

    def to_text(self) -> str:
        lines = [
            f"t_achieved={self.t_achieved!r}",
            f"t_sdr_bound={self.t_sdr_bound!r}",
            f"t_sdr_lower={self.t_sdr_lower!r}",
            f"n_randomizations={self.n_randomizations}",
            f"candidate_index={self.candidate_index}",
            "ranks=" + ",".join(str(r) for r in self.ranks),
            "[bisection]",
            "step,t,feasible",
        ]
        lines += [f"{i},{t!r},{int(ok)}" for i, (t, ok) in enumerate(self.bisection_trace)]
        lines.append(f"[precoder rows={self.W.shape[0]} cols={self.W.shape[1]}]")
        lines += format_complex_rows(self.W)
        return "\n".join(lines) + "\n"


def solve_maxmin_fair(prob: FairnessProblem, cfg: SolverConfig = SolverConfig()) -> SolverReport:
    """Relaxation + bisection + randomization + fixed-direction power control."""
    backend = cfg.backend or ClarabelBackend()
    bis = bisect_fairness(
        prob,
        0.0,
        prob.upper_bound(),
        eps=cfg.eps_bisect,
        backend=backend,
        slack_tol=cfg.slack_tol,
        rank_ratio=cfg.rank_ratio,
        rank_one_gap=cfg.rank_one_gap,
    )
    ranks = bis.ranks(cfg.rank_ratio)
    try:
        cands = gaussian_randomize(bis.iterate, cfg.n_rand, cfg.seed, cfg.rank_ratio)
        pc = power_control_fixed_directions(cands, prob, cfg.eps_power)
        if cfg.polish:
            polished = polish_precoder(pc.W, prob)
            if polished is not pc.W:
                # re-balance the polished directions exactly; keep the old point on ties
                again = power_control_fixed_directions(np.stack([pc.W, polished]), prob, cfg.eps_power)
                if again.t > pc.t:
                    pc = PowerControlResult(W=again.W, t=again.t, index=pc.index, levels=pc.levels)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(str(exc), stage="randomization") from exc
    # a rank-1 relaxation is tight, so the bound is worth pulling to within rank_one_gap
    target, probes = (cfg.rank_one_gap, 40) if cfg.rank_one_gap and all(r == 1 for r in ranks) else (0.0, 6)
    t_bound = tighten_upper_bound(
        prob, pc.t, bis.t_upper, backend, cfg.slack_tol, max_probes=probes, trace=bis.trace, target=target
    )
    violation = float(np.max(per_antenna_power(pc.W) - prob.budget))
    if violation > 1e-9:
        raise SolverError("per-antenna limit violated", stage="power_control", diagnostics={"excess": violation})
    log.debug("maxmin: t=%g bound=%g ranks=%s", pc.t, t_bound, ranks)
    return SolverReport(
        W=pc.W,
        t_achieved=pc.t,
        t_sdr_bound=t_bound,
        t_sdr_lower=bis.t_lower,
        bisection_trace=bis.trace,
        n_randomizations=len(cands),
        ranks=ranks,
        candidate_index=pc.index,
    )
