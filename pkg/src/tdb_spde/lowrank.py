"""DBO and DO low-rank integrators driven by the full-order right-hand side.

DBO: ``V ~ U S Y^T`` with ``U^T M_x U = I`` and ``Y^T M_xi Y = I``.
DO:  ``V ~ U Y^T`` with ``U^T M_x U = I`` (not mean subtracted).

Both evolve the factors with the closed-form optimality conditions of the
residual-minimisation principle applied to ``dV/dt = F(V, t)``; boundary
values of the spatial modes come out of the same equations because ``F``
already carries the time-differentiated boundary rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.linalg as la

from .errors import BlowupError, DegenerateInitError, IllConditionedError, UnsupportedDiagnosticError
from .fom import SemiDiscreteModel, Trajectory, fom_rhs, n_steps
from .kloracle import SIGMA_FLOOR, weighted_svd

log = logging.getLogger(__name__)

COND_CAP = 1e12
REORTHO_TOL = 1e-8


@dataclass(eq=False)
class DboState:
    U: np.ndarray
    S: np.ndarray
    Y: np.ndarray
    wx: np.ndarray = field(repr=False)
    wxi: np.ndarray = field(repr=False)

    @property
    def r(self) -> int:
        return self.S.shape[0]

    def reconstruct(self) -> np.ndarray:
        return self.U @ self.S @ self.Y.T

    def ortho_error(self) -> tuple[float, float]:
        return _gram_error(self.U, self.wx), _gram_error(self.Y, self.wxi)

    def condition(self) -> float:
        return float(np.linalg.cond(self.S))


@dataclass(eq=False)
class DoState:
    U: np.ndarray
    Y: np.ndarray
    wx: np.ndarray = field(repr=False)
    wxi: np.ndarray = field(repr=False)

    @property
    def r(self) -> int:
        return self.U.shape[1]

    def reconstruct(self) -> np.ndarray:
        return self.U @ self.Y.T

    def covariance(self) -> np.ndarray:
        return self.Y.T @ (self.wxi[:, None] * self.Y)

    def ortho_error(self) -> tuple[float, float]:
        return _gram_error(self.U, self.wx), 0.0

    def condition(self) -> float:
        return float(np.linalg.cond(self.covariance()))


def reconstruct(state) -> np.ndarray:
    return state.reconstruct()


def _gram(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    return A.T @ (w[:, None] * A)


def _gram_error(A: np.ndarray, w: np.ndarray) -> float:
    return float(np.max(np.abs(_gram(A, w) - np.eye(A.shape[1]))))


def _project_out(G: np.ndarray, A: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Remove from ``G`` its ``w``-orthogonal projection onto span(A).

    Uses the Gram matrix of ``A`` so the result is orthogonal to ``A`` even
    when ``A`` is only approximately orthonormal (RK4 stage states); for
    orthonormal ``A`` this is ``(I - A A^T W) G``.
    """
    coef = la.solve(_gram(A, w), A.T @ (w[:, None] * G), assume_a="pos")
    return G - A @ coef


class OrthogonalityMonitor:
    """Tracks the largest ``|<dU_i, U_j>_x|`` (and the Y analogue) seen."""

    def __init__(self):
        self.max_u = 0.0
        self.max_y = 0.0
        self.calls = 0

    def record(self, U, dU, wx, Y=None, dY=None, wxi=None):
        self.calls += 1
        self.max_u = max(self.max_u, float(np.max(np.abs(U.T @ (wx[:, None] * dU)))))
        if dY is not None:
            self.max_y = max(self.max_y, float(np.max(np.abs(Y.T @ (wxi[:, None] * dY)))))


def _check_cond(M: np.ndarray, cap: float, what: str) -> None:
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > cap:
        raise IllConditionedError(
            f"{what} condition number {cond:.3e} exceeds cap {cap:.1e}; "
            "consider a switching time (integrate at full order first) or a smaller rank",
            condition=float(cond),
        )


def dbo_rhs(state: DboState, model: SemiDiscreteModel, t: float, *,
            cond_cap: float = COND_CAP, monitor: OrthogonalityMonitor | None = None):
    """Time derivatives ``(dU, dS, dY)`` of the DBO factors."""
    U, S, Y, wx, wxi = state.U, state.S, state.Y, state.wx, state.wxi
    _check_cond(S, cond_cap, "Sigma")
    F = fom_rhs(model, U @ S @ Y.T, t)
    FY = F @ (wxi[:, None] * Y)
    FtU = F.T @ (wx[:, None] * U)
    dS = U.T @ (wx[:, None] * FY)
    lu = la.lu_factor(S)
    # A S^{-1} via S^T X^T = A^T; A S^{-T} via S X^T = A^T
    dU = _project_out(la.lu_solve(lu, FY.T, trans=1).T, U, wx)
    dY = _project_out(la.lu_solve(lu, FtU.T).T, Y, wxi)
    if monitor is not None:
        monitor.record(U, dU, wx, Y, dY, wxi)
    return dU, dS, dY


def do_rhs(state: DoState, model: SemiDiscreteModel, t: float, *,
           cond_cap: float = COND_CAP, monitor: OrthogonalityMonitor | None = None):
    """Time derivatives ``(dU, dY)`` of the DO factors."""
    U, Y, wx, wxi = state.U, state.Y, state.wx, state.wxi
    C = state.covariance()
    _check_cond(C, cond_cap, "covariance")
    F = fom_rhs(model, U @ Y.T, t)
    FY = F @ (wxi[:, None] * Y)
    dU = _project_out(np.linalg.solve(C, FY.T).T, U, wx)
    dY = F.T @ (wx[:, None] * U)
    if monitor is not None:
        monitor.record(U, dU, wx)
    return dU, dY


def boundary_rows_dbo(state: DboState, model: SemiDiscreteModel, t: float) -> np.ndarray:
    """Closed-form evolution of the spatial modes at Dirichlet boundary points.

    ``dU_b = (dG/dt / a) M_xi Y S^{-1} - U_b (U^T M_x F) M_xi Y S^{-1}``

    Evaluated independently of :func:`dbo_rhs` as a cross-check. Rows are
    returned for the boundary points carrying a Dirichlet condition, in the
    order of ``model.boundary_idx``.
    """
    rows = np.flatnonzero(model.b == 0)
    if len(rows) == 0:
        raise UnsupportedDiagnosticError("boundary-row diagnostic needs a Dirichlet boundary")
    U, S, Y, wx, wxi = state.U, state.S, state.Y, state.wx, state.wxi
    F = fom_rhs(model, U @ S @ Y.T, t)
    Gdot = model.boundary_rates(t)[rows] / model.a[rows, None]
    Sinv = np.linalg.inv(S)
    MY = wxi[:, None] * Y
    Ub = U[model.boundary_idx[rows]]
    return Gdot @ MY @ Sinv - Ub @ (U.T @ (wx[:, None] * F)) @ MY @ Sinv


def weighted_qr(A: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``A = Q R`` with ``Q^T diag(w) Q = I`` and ``diag(R) > 0``."""
    sw = np.sqrt(w)
    Q, R = np.linalg.qr(sw[:, None] * A)
    sgn = np.where(np.diag(R) < 0, -1.0, 1.0)
    return (Q * sgn) / sw[:, None], sgn[:, None] * R


def reorthonormalize(state, tol: float = REORTHO_TOL):
    """Restore factor orthonormality without changing ``reconstruct(state)``.

    Only factors whose Gram matrix deviates from the identity by more than
    ``tol`` (max-norm) are touched; the triangular factor is absorbed into
    ``S`` (DBO) or ``Y`` (DO).
    """
    eu, ey = state.ortho_error()
    if isinstance(state, DboState):
        U, S, Y = state.U, state.S, state.Y
        if eu > tol:
            U, Ru = weighted_qr(U, state.wx)
            S = Ru @ S
        if ey > tol:
            Y, Ry = weighted_qr(Y, state.wxi)
            S = S @ Ry.T
        if eu > tol or ey > tol:
            return replace(state, U=U, S=S, Y=Y)
        return state
    if eu > tol:
        U, Ru = weighted_qr(state.U, state.wx)
        return replace(state, U=U, Y=state.Y @ Ru.T)
    return state


def _axpy(state, h: float, ks):
    if isinstance(state, DboState):
        dU, dS, dY = ks
        return replace(state, U=state.U + h * dU, S=state.S + h * dS, Y=state.Y + h * dY)
    dU, dY = ks
    return replace(state, U=state.U + h * dU, Y=state.Y + h * dY)


def step(state, model: SemiDiscreteModel, t: float, dt: float, *,
         reortho: bool = True, reortho_tol: float = REORTHO_TOL,
         cond_cap: float = COND_CAP, monitor: OrthogonalityMonitor | None = None):
    """One classical RK4 step on the coupled factor equations."""
    rhs = dbo_rhs if isinstance(state, DboState) else do_rhs

    def f(st, tt):
        return rhs(st, model, tt, cond_cap=cond_cap, monitor=monitor)

    k1 = f(state, t)
    k2 = f(_axpy(state, 0.5 * dt, k1), t + 0.5 * dt)
    k3 = f(_axpy(state, 0.5 * dt, k2), t + 0.5 * dt)
    k4 = f(_axpy(state, dt, k3), t + dt)
    incr = tuple((a + 2.0 * b + 2.0 * c + d) / 6.0 for a, b, c, d in zip(k1, k2, k3, k4))
    new = _axpy(state, dt, incr)
    if reortho:
        new = reorthonormalize(new, reortho_tol)
    return new


def integrate(state, model: SemiDiscreteModel, t0: float, t_end: float, dt: float,
              stride: int = 1, callback: Callable | None = None, **step_kw) -> Trajectory:
    """Advance a DBO/DO state with :func:`step`, keeping every ``stride``-th state."""
    steps = n_steps(t0, t_end, dt)
    traj = Trajectory([t0], [state])
    if callback:
        callback(t0, state)
    for k in range(1, steps + 1):
        t_prev = t0 + (k - 1) * dt
        state = step(state, model, t_prev, dt, **step_kw)
        if not np.all(np.isfinite(state.U)) or not np.all(np.isfinite(state.Y)):
            raise BlowupError(f"non-finite low-rank factors; last valid time {t_prev}", time=t_prev)
        t = t0 + k * dt
        if k % stride == 0 or k == steps:
            traj.times.append(t)
            traj.states.append(state)
            if callback:
                callback(t, state)
    return traj


def init_from_snapshot(V: np.ndarray, grid, samples, r: int, method: str = "dbo"):
    """Rank-``r`` DBO (or DO) state from the KL modes of a snapshot ``V``."""
    kl = weighted_svd(V, grid, samples, r)
    if kl.sigma[-1] < SIGMA_FLOOR:
        raise DegenerateInitError(
            f"sigma_{r} = {kl.sigma[-1]:.3e} is below {SIGMA_FLOOR:.0e}; "
            "use a later switching time or a smaller rank"
        )
    wx = getattr(grid, "weights", grid)
    wxi = getattr(samples, "w_xi", samples)
    if method == "dbo":
        return DboState(U=kl.U_kl, S=np.diag(kl.sigma), Y=kl.Y_kl, wx=wx, wxi=wxi)
    if method == "do":
        return DoState(U=kl.U_kl, Y=kl.Y_kl * kl.sigma, wx=wx, wxi=wxi)
    raise ValueError(f"unknown method {method!r}")
