"""Conic backends for the relaxed max-min feasibility subproblem.

At a level ``t`` the subproblem asks for Hermitian ``X_1..X_G >= 0`` with

    tr(Q_i X_k) / (t g_i) - sum_{l != k} tr(Q_i X_l) - 1 >= -s     for i in group k
    sum_k diag(X_k) <= pac

and minimises the slack ``s`` subject to ``s >= -1``.  ``Q_i`` is the user
covariance scaled to unit noise, so the relaxation is feasible exactly when
``s* <= 0``.  Because the slack problem is always feasible, a first-order or
interior-point backend never has to return an infeasibility certificate.  The
floor on ``s`` keeps the problem bounded at high SNR, where the unconstrained
optimum runs off to roughly minus the SNR and the conic iterates lose scale.

A backend is any object with ``solve(data) -> FeasibilityResult``.
:class:`ClarabelBackend` is the default; :class:`CvxpyBackend` formulates the
same problem through cvxpy and exists mainly to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Protocol

import numpy as np
import scipy.sparse as sp

from .errors import SolverError


@dataclass(frozen=True)
class FeasibilityData:
    Q: np.ndarray
    weights: np.ndarray
    assignment: np.ndarray
    n_groups: int
    pac: np.ndarray
    t: float

    @property
    def n_antennas(self) -> int:
        return self.Q.shape[1]

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.Q.imag) <= 1e-14 * (1 + np.abs(self.Q.real).max())))

    def save(self, path) -> Path:
        """Write the subproblem as an ``.npz`` archive for an external solver."""
        path = Path(path)
        np.savez(
            path,
            Q=self.Q,
            weights=self.weights,
            assignment=self.assignment,
            n_groups=self.n_groups,
            pac=self.pac,
            t=self.t,
        )
        return path

    @classmethod
    def load(cls, path) -> FeasibilityData:
        with np.load(path) as z:
            return cls(
                Q=z["Q"],
                weights=z["weights"],
                assignment=z["assignment"],
                n_groups=int(z["n_groups"]),
                pac=z["pac"],
                t=float(z["t"]),
            )


@dataclass(frozen=True)
class FeasibilityResult:
    """Backend output: primal slack and iterate, plus a dual lower bound on ``s*``."""

    slack: float
    X: np.ndarray
    status: str
    iterations: int = 0
    bound: float = float("nan")
    primal_residual: float = 0.0
    dual_residual: float = 0.0

    def certify(
        self, data: FeasibilityData, slack_tol: float, residual_tol: float = 1e-6
    ) -> tuple[bool | None, np.ndarray]:
        """Decide feasibility at ``data.t`` from this result.

        Infeasible only with proof: a dual bound above ``slack_tol`` from a
        point whose dual residual is at most ``residual_tol``.  Feasible when the
        iterate, projected onto the PSD cone and into the per-antenna limits,
        meets every row with margin ``>= -slack_tol``, or when the solver's own
        slack is within ``slack_tol`` at a primal residual of at most
        ``10 * residual_tol``.  The projected iterate is returned.  ``None``
        when neither side is settled.
        """
        bound = self.slack if np.isnan(self.bound) else self.bound
        if self.dual_residual <= residual_tol and bound > slack_tol:
            return False, self.X
        if self.X.size and np.all(np.isfinite(self.X)):
            X = project_feasible(self.X, data.pac)
            if constraint_margin(X, data) >= -slack_tol:
                return True, X
            if self.slack <= slack_tol and self.primal_residual <= 10 * residual_tol:
                return True, X
        return None, self.X


def project_feasible(X: np.ndarray, pac: np.ndarray) -> np.ndarray:
    """Nearest PSD blocks, then one common scale-down if a per-antenna sum exceeds ``pac``."""
    X = 0.5 * (X + np.conj(np.swapaxes(X, 1, 2)))
    ev, U = np.linalg.eigh(X)
    X = np.einsum("kab,kb,kcb->kac", U, np.clip(ev, 0.0, None), np.conj(U))
    load = np.einsum("kaa->a", X).real
    over = np.max(load / pac)
    return X / over if over > 1 else X


def constraint_margin(X: np.ndarray, data: FeasibilityData) -> float:
    """``min_i tr(Q_i X_k)/(t g_i) - sum_{l != k} tr(Q_i X_l) - 1``, i.e. ``-s`` for ``X``."""
    tr = np.real(np.einsum("iab,kba->ik", data.Q, X))
    idx = np.arange(len(data.assignment))
    signal = tr[idx, data.assignment]
    interference = tr.sum(axis=1) - signal
    return float(np.min(signal / (data.t * data.weights) - interference - 1.0))


class SdpBackend(Protocol):
    def solve(self, data: FeasibilityData) -> FeasibilityResult: ...


def _trace_coefficients(Q: np.ndarray, real: bool) -> np.ndarray:
    """Coefficients ``c`` with ``tr(Q X) = c @ vars(X)`` (see :func:`_layout`)."""
    n = Q.shape[-1]
    iu = np.triu_indices(n)
    diag = iu[0] == iu[1]
    c_re = 2 * Q.real[..., iu[0], iu[1]]
    c_re[..., diag] /= 2
    if real:
        return c_re
    ju = np.triu_indices(n, 1)
    c_im = 2 * Q.imag[..., ju[0], ju[1]]
    return np.concatenate([c_re, c_im], axis=-1)


@lru_cache(maxsize=32)
def _layout(n: int, real: bool):
    """Variable layout of one Hermitian block and its PSD-cone embedding.

    Variables are the upper triangle (row-major, with diagonal) of ``Re X``
    followed, in the complex case, by the strict upper triangle of ``Im X``.
    The cone row map gives Clarabel's scaled upper-triangle svec of ``X``
    (real case) or of ``[[Re X, -Im X], [Im X, Re X]]`` (complex case).
    """
    iu = np.triu_indices(n)
    re_index = {(a, b): j for j, (a, b) in enumerate(zip(*iu))}
    ju = np.triu_indices(n, 1)
    im_index = {(a, b): len(re_index) + j for j, (a, b) in enumerate(zip(*ju))}
    n_vars = len(re_index) + (0 if real else len(im_index))
    dim = n if real else 2 * n

    def entry(r, c):
        # linear form of M[r, c] for r <= c: (var, coefficient) or None
        if c < n or r >= n:
            a, b = (r, c) if c < n else (r - n, c - n)
            return re_index[(min(a, b), max(a, b))], 1.0
        a, b = r, c - n
        if a == b:
            return None
        return (im_index[(a, b)], -1.0) if a < b else (im_index[(b, a)], 1.0)

    rows, cols, vals = [], [], []
    pos = 0
    for c in range(dim):
        for r in range(c + 1):
            e = entry(r, c)
            if e is not None:
                rows.append(pos)
                cols.append(e[0])
                vals.append(e[1] * (1.0 if r == c else np.sqrt(2.0)))
            pos += 1
    diag_vars = np.array([re_index[(a, a)] for a in range(n)])
    return n_vars, dim, pos, np.array(rows), np.array(cols), np.array(vals), diag_vars


def _unpack(x: np.ndarray, n: int, real: bool) -> np.ndarray:
    iu = np.triu_indices(n)
    m = len(iu[0])
    Xr = np.zeros((n, n))
    Xr[iu] = x[:m]
    Xr = Xr + Xr.T - np.diag(np.diag(Xr))
    if real:
        return Xr.astype(complex)
    ju = np.triu_indices(n, 1)
    Xi = np.zeros((n, n))
    Xi[ju] = x[m:]
    Xi = Xi - Xi.T
    return Xr + 1j * Xi


class ClarabelBackend:
    """Interior-point backend calling Clarabel on hand-assembled conic data.

    Whatever the termination status, the last iterate is returned when it
    decides feasibility (see :meth:`FeasibilityResult.certify`).  Relaxations above the interference
    limit have the degenerate optimum ``X = 0, s = 1`` on which Clarabel often
    stalls, yet its dual bound already proves infeasibility.  Otherwise the solve
    is repeated with each looser tolerance in ``fallback``.
    """

    def __init__(
        self,
        tol: float = 1e-9,
        max_iter: int = 200,
        fallback: tuple[float, ...] = (1e-7, 1e-6, 1e-5),
        slack_tol: float = 1e-8,
    ):
        self.tol = tol
        self.slack_tol = slack_tol
        self.max_iter = max_iter
        self.fallback = tuple(fallback)

    def _settings(self, tol: float):
        import clarabel

        st = clarabel.DefaultSettings()
        st.verbose = False
        st.tol_gap_abs = st.tol_gap_rel = st.tol_feas = tol
        st.tol_ktratio = 1e-7
        st.max_iter = self.max_iter
        return st

    def solve(self, data: FeasibilityData) -> FeasibilityResult:
        if data.t <= 0:
            raise ValueError("feasibility level must be positive")
        statuses = []
        for tol in (self.tol, *self.fallback):
            # assembled afresh each time: the solver may rescale its inputs in place
            result = self._solve(data, self._assemble(data), tol)
            if result.certify(data, self.slack_tol)[0] is not None:
                return result
            statuses.append(result.status)
        raise SolverError(
            "conic solve did not converge",
            stage="sdr_feasibility",
            diagnostics={"status": statuses, "t": data.t},
        )

    def _assemble(self, data: FeasibilityData):
        import clarabel

        real = data.is_real
        n, G = data.n_antennas, data.n_groups
        n_vars, dim, n_svec, prow, pcol, pval, diag_vars = _layout(n, real)
        n_users = len(data.assignment)
        total = G * n_vars + 1
        slack = total - 1

        coeff = _trace_coefficients(data.Q, real)  # (N_u, n_vars)
        sinr_rows = np.tile(coeff, (1, G))
        for i, k in enumerate(data.assignment):
            sl = slice(k * n_vars, (k + 1) * n_vars)
            sinr_rows[i, sl] = -coeff[i] / (data.t * data.weights[i])
        A_sinr = sp.csc_matrix(np.hstack([sinr_rows, -np.ones((n_users, 1))]))
        b_sinr = -np.ones(n_users)
        floor_row = sp.csc_matrix(([-1.0], ([0], [slack])), shape=(1, total))

        pac_cols = (np.arange(G)[:, None] * n_vars + diag_vars[None, :]).T.ravel()
        pac_rows = np.repeat(np.arange(n), G)
        A_pac = sp.csc_matrix((np.ones(n * G), (pac_rows, pac_cols)), shape=(n, total))

        blocks_r = np.concatenate([prow + k * n_svec for k in range(G)])
        blocks_c = np.concatenate([pcol + k * n_vars for k in range(G)])
        A_psd = sp.csc_matrix((-np.tile(pval, G), (blocks_r, blocks_c)), shape=(G * n_svec, total))

        A = sp.vstack([A_sinr, floor_row, A_pac, A_psd], format="csc")
        b = np.concatenate([b_sinr, [1.0], data.pac, np.zeros(G * n_svec)])
        q = np.zeros(total)
        q[slack] = 1.0
        P = sp.csc_matrix((total, total))
        cones = [clarabel.NonnegativeConeT(n_users + 1 + n)] + [clarabel.PSDTriangleConeT(dim)] * G
        return P, q, A, b, cones, n_vars, real

    def _solve(self, data: FeasibilityData, problem, tol: float) -> FeasibilityResult:
        import clarabel

        P, q, A, b, cones, n_vars, real = problem
        sol = clarabel.DefaultSolver(P, q, A, b, cones, self._settings(tol)).solve()
        x = np.asarray(sol.x)
        if x.size == 0 or not np.all(np.isfinite(x)):
            return FeasibilityResult(np.nan, np.empty(0), str(sol.status), sol.iterations, np.nan, np.inf, np.inf)
        n, G = data.n_antennas, data.n_groups
        X = np.stack([_unpack(x[k * n_vars : (k + 1) * n_vars], n, real) for k in range(G)])
        return FeasibilityResult(
            slack=float(x[-1]),
            X=X,
            status=str(sol.status),
            iterations=sol.iterations,
            bound=float(sol.obj_val_dual),
            primal_residual=float(sol.r_prim),
            dual_residual=float(sol.r_dual),
        )


class CvxpyBackend:
    """Reference formulation through cvxpy with Hermitian PSD variables."""

    def __init__(self, solver: str = "CLARABEL", **solver_opts):
        self.solver = solver
        self.solver_opts = solver_opts

    def solve(self, data: FeasibilityData) -> FeasibilityResult:
        import cvxpy as cp

        n, G = data.n_antennas, data.n_groups
        X = [cp.Variable((n, n), hermitian=True) for _ in range(G)]
        s = cp.Variable()
        cons = [x >> 0 for x in X] + [s >= -1]
        for i, k in enumerate(data.assignment):
            tr = [cp.real(cp.trace(data.Q[i] @ X[l])) for l in range(G)]
            interference = sum(tr[l] for l in range(G) if l != k)
            cons.append(tr[k] / (data.t * data.weights[i]) - interference - 1 + s >= 0)
        cons.append(sum(cp.real(cp.diag(x)) for x in X) <= data.pac)
        prob = cp.Problem(cp.Minimize(s), cons)
        try:
            prob.solve(solver=self.solver, **self.solver_opts)
        except cp.SolverError as exc:
            raise SolverError(str(exc), stage="sdr_feasibility", diagnostics={"t": data.t}) from exc
        if prob.status not in ("optimal", "optimal_inaccurate"):
            raise SolverError(
                "conic solve did not converge",
                stage="sdr_feasibility",
                diagnostics={"status": prob.status, "t": data.t},
            )
        return FeasibilityResult(
            slack=float(s.value), X=np.stack([x.value for x in X]), status=prob.status
        )
