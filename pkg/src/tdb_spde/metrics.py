"""Error measures used to compare low-rank solutions with the PCM reference."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, WrongMetricError


@dataclass
class ErrorSeries:
    label: str
    times: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def append(self, t: float, value: float) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError(f"times must increase: {t} after {self.times[-1]}")
        if not np.isfinite(value):
            raise ValueError(f"non-finite error value at t={t}")
        self.times.append(float(t))
        self.values.append(float(value))

    def time_average(self) -> float:
        return time_average(self.times, self.values)


def _same_shape(A, B):
    if np.shape(A) != np.shape(B):
        raise DimensionError(f"shape mismatch: {np.shape(A)} vs {np.shape(B)}")


def global_error(V_lr: np.ndarray, V_ref: np.ndarray) -> float:
    """Plain Frobenius norm of the difference."""
    _same_shape(V_lr, V_ref)
    return float(np.linalg.norm(np.asarray(V_lr) - np.asarray(V_ref)))


def global_error_weighted(V_lr: np.ndarray, V_ref: np.ndarray, grid, samples) -> float:
    """Frobenius norm weighted by the spatial and random quadrature weights."""
    _same_shape(V_lr, V_ref)
    E = np.asarray(V_lr) - np.asarray(V_ref)
    return float(np.sqrt(np.einsum("i,ij,j->", grid.weights, E**2, samples.w_xi)))


def _bc_rows(model, bc: int):
    rows = model.bc_rows(bc)
    return rows, model.bcs[bc]


def _weighted_rms(E: np.ndarray, wb: np.ndarray, wxi: np.ndarray) -> float:
    return float(np.sqrt(np.einsum("i,ij,j->", wb, E**2, wxi)))


def boundary_error_dirichlet_robin(V: np.ndarray, model, t: float, bc: int = 0) -> float:
    """``E_b = V_b - (G - b D V)/a`` measured on the points of ``model.bcs[bc]``."""
    rows, spec = _bc_rows(model, bc)
    if spec.a == 0:
        raise WrongMetricError("a = 0 (Neumann boundary): use boundary_error_neumann")
    idx = model.boundary_idx[rows]
    G = model.boundary_data(t)[rows]
    E = V[idx] - (G - spec.b * (model.normal_rows[rows] @ V)) / spec.a
    return _weighted_rms(E, model.grid.weights[idx], model.samples.w_xi)


def boundary_error_neumann(V: np.ndarray, model, t: float, bc: int = 0) -> float:
    """``E_b = D V - G/b`` measured on the points of ``model.bcs[bc]``."""
    rows, spec = _bc_rows(model, bc)
    if spec.a != 0 or spec.b == 0:
        raise WrongMetricError(f"{spec.kind} boundary: use boundary_error_dirichlet_robin")
    idx = model.boundary_idx[rows]
    G = model.boundary_data(t)[rows]
    E = model.normal_rows[rows] @ V - G / spec.b
    return _weighted_rms(E, model.grid.weights[idx], model.samples.w_xi)


def boundary_error(V: np.ndarray, model, t: float, bc: int = 0) -> float:
    """Dispatch to the metric matching the boundary type."""
    if model.bcs[bc].a == 0:
        return boundary_error_neumann(V, model, t, bc)
    return boundary_error_dirichlet_robin(V, model, t, bc)


def time_average(times, values) -> float:
    """Trapezoid time average of ``values`` over ``times``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(t) == 1:
        return float(v[0])
    return float(np.trapezoid(v, t) / (t[-1] - t[0]))


def singular_value_error(times_test, sigma_test, times_ref, sigma_ref) -> float:
    """Normalised L2-in-time norm of ``sigma_test(t) - sigma_ref(t)``."""
    tt = np.asarray(times_test, dtype=float)
    tr = np.asarray(times_ref, dtype=float)
    if tt.shape != tr.shape or not np.allclose(tt, tr, rtol=0, atol=1e-12):
        raise DimensionError("singular-value series are on different time grids")
    diff2 = (np.asarray(sigma_test, dtype=float) - np.asarray(sigma_ref, dtype=float)) ** 2
    if len(tt) == 1:
        return float(np.sqrt(diff2[0]))
    return float(np.sqrt(np.trapezoid(diff2, tt) / (tt[-1] - tt[0])))
