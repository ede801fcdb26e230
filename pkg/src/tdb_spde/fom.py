"""Boundary-incorporating semi-discrete full-order model ``dV/dt = F(V, t)``.

With collocation in space and random space both mass matrices are diagonal.
Interior rows then reduce to ``dV_i/dt = N_i(V, t)``. Boundary rows enforce
the time-differentiated boundary condition

    (a I + b D_bb) dV_b/dt = dG/dt - b D_bi dV_i/dt,

where ``D`` is the outward normal-derivative operator restricted to boundary
rows. The PCM reference solution integrates this system sample by sample
(all columns at once) with classical RK4.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator

from .errors import AssemblyError, BlowupError, CoverageError, DimensionError, ParameterError
from .grid import Grid, normal_derivative_rows
from .stochastic import SampleSet

log = logging.getLogger(__name__)

RhsFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True, eq=False)
class BcSpec:
    """``a v + b dv/dn = g`` on one edge (or an explicit set of grid points)."""

    a: float
    b: float
    g: object
    edge: str | None = None
    idx: np.ndarray | None = None

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ParameterError("boundary condition needs (a, b) != (0, 0)")
        if self.edge is None and self.idx is None:
            raise ParameterError("BcSpec needs an edge name or explicit point indices")

    @property
    def kind(self) -> str:
        if self.b == 0:
            return "dirichlet"
        if self.a == 0:
            return "neumann"
        return "robin"

    def points(self, grid: Grid) -> np.ndarray:
        return np.asarray(grid.edges[self.edge] if self.idx is None else self.idx)


@dataclass(eq=False)
class SemiDiscreteModel:
    grid: Grid
    samples: SampleSet
    bcs: list[BcSpec]
    rhs_interior: RhsFn
    owner: np.ndarray
    a: np.ndarray
    b: np.ndarray
    normal_rows: sp.csr_matrix
    D_bb: np.ndarray
    D_bi: sp.csr_matrix
    lu: tuple
    condition: float
    _groups: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def boundary_idx(self) -> np.ndarray:
        return self.grid.boundary_idx

    @property
    def interior_idx(self) -> np.ndarray:
        return self.grid.interior_idx

    def bc_rows(self, j: int) -> np.ndarray:
        """Positions (within ``boundary_idx``) owned by ``bcs[j]``."""
        return self._groups[j]

    def _collect(self, t: float, attr: str) -> np.ndarray:
        out = np.empty((len(self.owner), self.samples.s))
        pts = self.grid.points[self.boundary_idx]
        for j, bc in enumerate(self.bcs):
            rows = self._groups[j]
            if len(rows):
                out[rows] = getattr(bc.g, attr)(pts[rows], t, self.samples)
        return out

    def boundary_data(self, t: float) -> np.ndarray:
        """``G(t)``, shape (n_b, s)."""
        return self._collect(t, "values")

    def boundary_rates(self, t: float) -> np.ndarray:
        """``dG/dt``, shape (n_b, s)."""
        return self._collect(t, "rates")

    @property
    def has_derivative_rows(self) -> bool:
        return bool(np.any(self.b != 0))


def assemble_model(
    grid: Grid, samples: SampleSet, bcs: Sequence[BcSpec], rhs_interior: RhsFn
) -> SemiDiscreteModel:
    """Assign boundary points to conditions and LU-factor the boundary block.

    A point on several edges (a 2D corner) goes to a Dirichlet condition if
    one claims it, otherwise to the first listed condition.
    """
    bcs = list(bcs)
    bidx = grid.boundary_idx
    pos = {int(k): j for j, k in enumerate(bidx)}
    owner = np.full(len(bidx), -1)
    for j, bc in enumerate(bcs):
        for k in bc.points(grid):
            p = pos.get(int(k))
            if p is None:
                raise AssemblyError(f"boundary condition {j} claims interior point {int(k)}")
            cur = owner[p]
            if cur < 0 or (bc.kind == "dirichlet" and bcs[cur].kind != "dirichlet"):
                owner[p] = j
    if np.any(owner < 0):
        missing = bidx[owner < 0]
        raise CoverageError(f"boundary points not covered by any condition: {missing.tolist()}")

    a = np.array([bcs[j].a for j in owner], dtype=float)
    b = np.array([bcs[j].b for j in owner], dtype=float)
    normal_axis = grid.normal_axis.copy()
    normal_sign = grid.normal_sign.copy()
    for p, j in enumerate(owner):
        if bcs[j].edge is not None:
            normal_axis[p], normal_sign[p] = grid.edge_normal(bcs[j].edge)
    Dn = normal_derivative_rows(grid, bidx, normal_axis, normal_sign)
    D_bb = Dn[:, bidx].toarray()
    D_bi = Dn[:, grid.interior_idx].tocsr()
    A = np.diag(a) + b[:, None] * D_bb
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > 1e14:
        rank_def = np.flatnonzero(np.abs(np.diag(A)) < 1e-14)
        raise AssemblyError(
            f"boundary system is singular (cond={cond:.3e}); suspect rows {rank_def.tolist()}"
        )
    log.debug("boundary system condition number %.3e", cond)
    groups = [np.flatnonzero(owner == j) for j in range(len(bcs))]
    return SemiDiscreteModel(
        grid=grid,
        samples=samples,
        bcs=bcs,
        rhs_interior=rhs_interior,
        owner=owner,
        a=a,
        b=b,
        normal_rows=Dn,
        D_bb=D_bb,
        D_bi=D_bi,
        lu=la.lu_factor(A),
        condition=cond,
        _groups=groups,
    )


def fom_rhs(model: SemiDiscreteModel, V: np.ndarray, t: float) -> np.ndarray:
    """Evaluate ``F(V, t)`` for the full n x s sample matrix."""
    grid = model.grid
    if V.shape != (grid.n, model.samples.s):
        raise DimensionError(f"state shape {V.shape} != ({grid.n}, {model.samples.s})")
    N = model.rhs_interior(V, t)
    if not np.all(np.isfinite(N)):
        raise BlowupError(f"non-finite right-hand side at t={t}", time=t)
    F = np.array(N, dtype=float, copy=True)
    rhs_b = model.boundary_rates(t)
    if model.has_derivative_rows:
        rhs_b = rhs_b - model.b[:, None] * (model.D_bi @ N[grid.interior_idx])
    F[grid.boundary_idx] = la.lu_solve(model.lu, rhs_b)
    return F


def enforce_initial_bc(model: SemiDiscreteModel, V0: np.ndarray, t0: float = 0.0) -> np.ndarray:
    """Overwrite boundary rows of ``V0`` so that ``a V + b dV/dn = G(t0)`` holds.

    Only differentiated boundary conditions are integrated, so an initial
    mismatch would persist for the whole run.
    """
    V = np.array(V0, dtype=float, copy=True)
    rhs_b = model.boundary_data(t0)
    if model.has_derivative_rows:
        rhs_b = rhs_b - model.b[:, None] * (model.D_bi @ V[model.interior_idx])
    V[model.boundary_idx] = la.lu_solve(model.lu, rhs_b)
    return V


# --- benchmark right-hand sides ---------------------------------------------


def rhs_advection_diffusion_1d(grid: Grid, nu: float, c: float) -> RhsFn:
    """``-c dV/dx + nu d2V/dx2``."""
    if nu < 0:
        raise ParameterError(f"diffusivity must be nonnegative, got {nu}")
    D1, D2 = grid.d1[0], grid.d2[0]

    def rhs(V, t):
        return nu * (D2 @ V) - c * (D1 @ V)

    rhs.max_speed = abs(c)
    rhs.max_diffusivity = nu
    return rhs


def rhs_burgers_1d(grid: Grid, nu: float) -> RhsFn:
    """``-V dV/dx + nu d2V/dx2``."""
    if not nu > 0:
        raise ParameterError(f"Burgers viscosity must be positive, got {nu}")
    D1, D2 = grid.d1[0], grid.d2[0]

    def rhs(V, t):
        return nu * (D2 @ V) - V * (D1 @ V)

    rhs.max_speed = None
    rhs.max_diffusivity = nu
    return rhs


def jet_velocity(x1, x2, t=0.0, height: float = 5.0):
    """Steady downward jet entering through the top wall, damped linearly
    to zero at the bottom wall."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    profile = -(1.0 - x1**2 / 0.0625) * np.exp(-((x1 / 0.175) ** 4)) + 0.01 * np.sin(np.pi * x1)
    return np.zeros_like(x1 + x2), profile * (x2 / height)


def linear_conduction(alpha: float, beta: float, reynolds: float = 3000.0, prandtl_scale: float = 300.0):
    """``kappa(T) = 1/(Re Pr(T))`` with ``Pr(T) = 1/(prandtl_scale (alpha + beta T))``."""

    def kappa(T):
        return prandtl_scale * (alpha + beta * T) / reynolds

    return kappa


def rhs_advection_diffusion_2d(
    grid: Grid,
    velocity: Callable = jet_velocity,
    conduction: Callable | None = None,
    *,
    kappa: float = 0.1,
    steady: bool = True,
) -> RhsFn:
    """``-(v . grad) T + kappa(T) lap(T)``.

    ``conduction`` maps temperature to diffusivity pointwise; when ``None``
    the constant ``kappa`` (``1/(Re Pr)``) is used.
    """
    x1, x2 = grid.points[:, 0], grid.points[:, 1]
    D1a, D1b = grid.d1

    if steady:
        u0, v0 = (np.asarray(c, dtype=float) for c in velocity(x1, x2, 0.0))

    def rhs(T, t):
        u, v = (u0, v0) if steady else velocity(x1, x2, t)
        adv = u[:, None] * (D1a @ T) + v[:, None] * (D1b @ T)
        k = kappa if conduction is None else conduction(T)
        return k * grid.laplacian(T) - adv

    if steady:
        rhs.max_speed = float(np.max(np.hypot(u0, v0)))
    else:
        rhs.max_speed = None
    rhs.max_diffusivity = kappa if conduction is None else None
    return rhs


def load_velocity_file(path) -> Callable:
    """Read a velocity table and return a bilinear interpolant ``(x1, x2, t) -> (u, v)``.

    Format: a header line ``n1 n2`` followed by ``n1*n2`` rows ``x1 x2 u v``
    in row-major order with ``x2`` varying fastest.
    """
    with open(path, encoding="utf-8") as fh:
        n1, n2 = (int(tok) for tok in fh.readline().split()[:2])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (n1 * n2, 4):
        raise DimensionError(f"velocity file has shape {data.shape}, expected ({n1 * n2}, 4)")
    x1 = data[::n2, 0]
    x2 = data[:n2, 1]
    U = data[:, 2].reshape(n1, n2)
    V = data[:, 3].reshape(n1, n2)
    iu = RegularGridInterpolator((x1, x2), U)
    iv = RegularGridInterpolator((x1, x2), V)

    def velocity(q1, q2, t=0.0):
        pts = np.column_stack([np.ravel(q1), np.ravel(q2)])
        return iu(pts).reshape(np.shape(q1)), iv(pts).reshape(np.shape(q1))

    return velocity


def write_velocity_file(path, x1: np.ndarray, x2: np.ndarray, u: np.ndarray, v: np.ndarray) -> None:
    """Inverse of :func:`load_velocity_file`; ``u``/``v`` have shape (n1, n2)."""
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    rows = np.column_stack([X1.ravel(), X2.ravel(), np.ravel(u), np.ravel(v)])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(x1)} {len(x2)}\n")
        np.savetxt(fh, rows, fmt="%.17e")


# --- time integration --------------------------------------------------------


@dataclass
class Trajectory:
    times: list[float]
    states: list

    def at(self, t: float, tol: float = 1e-9):
        for tt, s in zip(self.times, self.states):
            if abs(tt - t) <= tol:
                return s
        raise KeyError(f"no snapshot at t={t}")


def n_steps(t0: float, t_end: float, dt: float) -> int:
    if not dt > 0:
        raise ParameterError(f"time step must be positive, got {dt}")
    k = (t_end - t0) / dt
    steps = int(round(k))
    if abs(k - steps) > 1e-8 * max(1.0, k):
        raise ParameterError(f"(t_end - t0)/dt = {k} is not an integer")
    return steps


def check_cfl(model: SemiDiscreteModel, dt: float, safety: float = 1.0) -> bool:
    """Warn (never raise) when ``dt`` exceeds the explicit-stability estimate."""
    h = min(model.grid.spacing)
    limits = []
    speed = getattr(model.rhs_interior, "max_speed", None)
    diff = getattr(model.rhs_interior, "max_diffusivity", None)
    if speed:
        limits.append(h / speed)
    if diff:
        limits.append(h**2 / (2.0 * diff))
    if limits and dt > safety * min(limits):
        warnings.warn(f"dt={dt} exceeds the CFL estimate {safety * min(limits):.3e}", stacklevel=2)
        return False
    return True


def rk4_step(f: Callable, y: np.ndarray, t: float, dt: float) -> np.ndarray:
    k1 = f(y, t)
    k2 = f(y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(y + dt * k3, t + dt)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def pcm_integrate(
    model: SemiDiscreteModel,
    V0: np.ndarray,
    t0: float,
    t_end: float,
    dt: float,
    stride: int = 1,
    callback: Callable[[float, np.ndarray], None] | None = None,
) -> Trajectory:
    """Classical RK4 on ``dV/dt = F(V, t)``; snapshots every ``stride`` steps
    (the initial and final states are always kept)."""
    steps = n_steps(t0, t_end, dt)
    check_cfl(model, dt)

    def f(V, t):
        return fom_rhs(model, V, t)

    V = np.array(V0, dtype=float, copy=True)
    traj = Trajectory([t0], [V.copy()])
    if callback:
        callback(t0, V)
    for k in range(1, steps + 1):
        t_prev = t0 + (k - 1) * dt
        try:
            V = rk4_step(f, V, t_prev, dt)
        except BlowupError as exc:
            raise BlowupError(f"PCM blew up after t={t_prev}: {exc}", time=t_prev) from exc
        if not np.all(np.isfinite(V)):
            raise BlowupError(f"non-finite PCM state; last valid time {t_prev}", time=t_prev)
        t = t0 + k * dt
        if k % stride == 0 or k == steps:
            traj.times.append(t)
            traj.states.append(V.copy())
            if callback:
                callback(t, V)
    return traj
