"""Squared-exponential kernels, their weighted eigendecomposition, and the
stochastic processes (boundary forcing and initial conditions) built from them.

Boundary processes expose ``values(points, t, samples)`` and
``rates(points, t, samples)``, both returning an ``(m, s)`` array for ``m``
boundary points; the full-order model only relies on that pair.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DimensionError, NonPSDError, ParameterError, RangeError
from .grid import build_grid_1d
from .stochastic import SampleSet

KL_GRID_POINTS = 512


def se_kernel_matrix(coords: np.ndarray, l: float) -> np.ndarray:
    """``K_ij = exp(-(c_i - c_j)^2 / (2 l^2))``."""
    if not l > 0:
        raise ParameterError(f"correlation length must be positive, got {l}")
    c = np.asarray(coords, dtype=float)
    diff = c[:, None] - c[None, :]
    return np.exp(-(diff**2) / (2.0 * l**2))


@dataclass(frozen=True, eq=False)
class KLExpansion:
    """Eigenpairs of a kernel on a 1D grid.

    Off-grid evaluation uses ``evaluation="grid"`` (linear interpolation of the
    eigenvectors, and of their second-order finite-difference derivative for
    the rates) or ``"nystrom"`` (kernel extension with its exact derivative,
    so rates are the true derivative of the values).
    """

    grid_coords: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    correlation_length: float | None = None
    evaluation: str = "grid"

    def __post_init__(self):
        if self.evaluation not in ("grid", "nystrom"):
            raise ParameterError(f"evaluation must be 'grid' or 'nystrom', got {self.evaluation!r}")

    @property
    def d(self) -> int:
        return len(self.eigenvalues)

    @cached_property
    def eigenvector_rates(self) -> np.ndarray:
        # same stencils as the solver D1 on uniform grids
        return np.gradient(self.eigenvectors, self.grid_coords, axis=0, edge_order=2)

    @cached_property
    def amplitudes(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)

    def point_modes(self, c: float, rate: bool = False) -> np.ndarray:
        """Eigenfunctions (or their derivatives) at one coordinate, shape (d,)."""
        lo, hi = self.grid_coords[0], self.grid_coords[-1]
        if not lo - 1e-9 * (hi - lo) <= c <= hi + 1e-9 * (hi - lo):
            raise RangeError(f"coordinate {c} outside KL grid range [{lo}, {hi}]")
        if self.evaluation != "grid":
            return (self.mode_rates if rate else self.modes)([c])[0]
        table = self.eigenvector_rates if rate else self.eigenvectors
        j = min(max(int(np.searchsorted(self.grid_coords, c)), 1), len(self.grid_coords) - 1)
        c0, c1 = self.grid_coords[j - 1], self.grid_coords[j]
        f = min(max((c - c0) / (c1 - c0), 0.0), 1.0)
        return (1.0 - f) * table[j - 1] + f * table[j]

    def _check_range(self, c: np.ndarray) -> None:
        lo, hi = self.grid_coords[0], self.grid_coords[-1]
        tol = 1e-9 * (hi - lo)
        if np.any(c < lo - tol) or np.any(c > hi + tol):
            raise RangeError(f"coordinate outside KL grid range [{lo}, {hi}]")

    def _kernel_rows(self, c: np.ndarray) -> np.ndarray:
        if self.correlation_length is None:
            raise ParameterError("off-grid evaluation needs the kernel correlation length")
        l = self.correlation_length
        return np.exp(-((c[:, None] - self.grid_coords[None, :]) ** 2) / (2.0 * l**2))

    def _interp(self, c: np.ndarray, table: np.ndarray) -> np.ndarray:
        c = np.clip(c, self.grid_coords[0], self.grid_coords[-1])
        return np.column_stack([np.interp(c, self.grid_coords, col) for col in table.T])

    def modes(self, coords) -> np.ndarray:
        """Eigenfunctions at ``coords``, shape (m, d)."""
        c = np.atleast_1d(np.asarray(coords, dtype=float))
        self._check_range(c)
        if self.evaluation == "grid":
            return self._interp(c, self.eigenvectors)
        # phi_i(c) = (1/lambda_i) sum_j w_j K(c, c_j) phi_i(c_j)
        K = self._kernel_rows(c)
        return (K * self.weights) @ self.eigenvectors / self.eigenvalues

    def mode_rates(self, coords) -> np.ndarray:
        """Derivative of the eigenfunctions with respect to the coordinate."""
        c = np.atleast_1d(np.asarray(coords, dtype=float))
        self._check_range(c)
        if self.evaluation == "grid":
            return self._interp(c, self.eigenvector_rates)
        K = self._kernel_rows(c)
        dK = -(c[:, None] - self.grid_coords[None, :]) / self.correlation_length**2 * K
        return (dK * self.weights) @ self.eigenvectors / self.eigenvalues


def kl_decompose(
    K: np.ndarray,
    weights: np.ndarray,
    d: int,
    *,
    coords: np.ndarray | None = None,
    correlation_length: float | None = None,
) -> KLExpansion:
    """Top-``d`` eigenpairs of the weighted eigenproblem ``K W phi = lambda phi``."""
    K = np.asarray(K, dtype=float)
    w = np.asarray(weights, dtype=float)
    m = K.shape[0]
    if K.shape != (m, m) or w.shape != (m,):
        raise DimensionError(f"kernel {K.shape} and weights {w.shape} do not match")
    if d > m or d < 1:
        raise DimensionError(f"cannot retain {d} modes from a {m}-point kernel")
    sw = np.sqrt(w)
    B = sw[:, None] * K * sw[None, :]
    lam, vec = np.linalg.eigh(0.5 * (B + B.T))
    if lam[0] < -1e-8:
        raise NonPSDError(f"kernel has eigenvalue {lam[0]:.3e} < -1e-8")
    order = np.argsort(lam)[::-1][:d]
    lam = lam[order]
    if np.any(lam <= 0):
        raise NonPSDError(f"retained eigenvalues must be positive, smallest is {lam[-1]:.3e}")
    phi = vec[:, order] / sw[:, None]
    phi /= np.sqrt(np.einsum("ij,i,ij->j", phi, w, phi))
    # deterministic sign: first entry of largest magnitude positive
    pivot = np.argmax(np.abs(phi), axis=0)
    phi *= np.sign(phi[pivot, np.arange(d)])
    return KLExpansion(
        grid_coords=np.arange(m, dtype=float) if coords is None else np.asarray(coords, dtype=float),
        weights=w,
        eigenvalues=lam,
        eigenvectors=phi,
        correlation_length=correlation_length,
    )


def se_kl_expansion(
    lo: float, hi: float, l: float, d: int, m: int = KL_GRID_POINTS, evaluation: str = "grid"
) -> KLExpansion:
    """KL expansion of the SE kernel on ``m`` uniform points over ``[lo, hi]``."""
    g = build_grid_1d(m, lo, hi)
    x = g.axes[0]
    kl = kl_decompose(se_kernel_matrix(x, l), g.weights, d, coords=x, correlation_length=l)
    return replace(kl, evaluation=evaluation)


def _zero(_):
    return 0.0


@dataclass(frozen=True, eq=False)
class StochasticProcess:
    """``mean(c) + sigma * sum_i sqrt(lambda_i) phi_i(c) xi_i``.

    ``variable`` says whether the KL coordinate is time (``"t"``, a boundary
    process uniform over the boundary points) or space (``"x"``, e.g. an
    initial condition; time-independent).
    """

    mean_fn: Callable[[np.ndarray], np.ndarray]
    mean_dot_fn: Callable[[np.ndarray], np.ndarray]
    sigma: float
    kl: KLExpansion | None
    variable: str = "t"

    def _check(self, samples: SampleSet) -> None:
        if self.kl is not None and self.kl.d > samples.d:
            raise DimensionError(f"process uses {self.kl.d} random variables, samples have {samples.d}")

    def field(self, coords, samples: SampleSet) -> np.ndarray:
        """Process at every coordinate and sample, shape (m, s)."""
        self._check(samples)
        c = np.atleast_1d(np.asarray(coords, dtype=float))
        out = np.broadcast_to(np.asarray(self.mean_fn(c), dtype=float), c.shape)[:, None]
        out = np.repeat(out, samples.s, axis=1)
        if self.kl is not None and self.sigma != 0.0:
            amp = self.kl.modes(c) * np.sqrt(self.kl.eigenvalues)
            out = out + self.sigma * amp @ samples.xi[:, : self.kl.d].T
        return out

    def field_rate(self, coords, samples: SampleSet) -> np.ndarray:
        self._check(samples)
        c = np.atleast_1d(np.asarray(coords, dtype=float))
        out = np.broadcast_to(np.asarray(self.mean_dot_fn(c), dtype=float), c.shape)[:, None]
        out = np.repeat(out, samples.s, axis=1)
        if self.kl is not None and self.sigma != 0.0:
            amp = self.kl.mode_rates(c) * np.sqrt(self.kl.eigenvalues)
            out = out + self.sigma * amp @ samples.xi[:, : self.kl.d].T
        return out

    def _at_time(self, t: float, samples: SampleSet, rate: bool) -> np.ndarray:
        self._check(samples)
        mean = float((self.mean_dot_fn if rate else self.mean_fn)(t))
        if self.kl is None or self.sigma == 0.0:
            return np.full(samples.s, mean)
        coef = self.sigma * self.kl.amplitudes * self.kl.point_modes(float(t), rate)
        return mean + samples.xi[:, : self.kl.d] @ coef

    # boundary-process interface; rows are read-only broadcast views
    def values(self, points: np.ndarray, t: float, samples: SampleSet) -> np.ndarray:
        if self.variable == "t":
            return np.broadcast_to(self._at_time(t, samples, False), (len(points), samples.s))
        return self.field(np.asarray(points)[:, 0], samples)

    def rates(self, points: np.ndarray, t: float, samples: SampleSet) -> np.ndarray:
        if self.variable == "t":
            return np.broadcast_to(self._at_time(t, samples, True), (len(points), samples.s))
        return np.zeros((len(points), samples.s))


def evaluate_process(p: StochasticProcess, coord: float, samples: SampleSet) -> np.ndarray:
    """Process value at a single coordinate for all samples (s-vector)."""
    return p.field([coord], samples)[0]


def evaluate_process_dot(p: StochasticProcess, t: float, samples: SampleSet) -> np.ndarray:
    """Time derivative of a temporal process at ``t`` for all samples."""
    if p.variable != "t":
        return np.zeros(samples.s)
    return p.field_rate([t], samples)[0]


def temporal_process(
    mean_fn: Callable,
    mean_dot_fn: Callable,
    sigma: float,
    t_final: float,
    l: float,
    d: int,
    m: int = KL_GRID_POINTS,
    evaluation: str = "grid",
) -> StochasticProcess:
    kl = se_kl_expansion(0.0, t_final, l, d, m, evaluation) if d > 0 else None
    return StochasticProcess(mean_fn, mean_dot_fn, sigma, kl, variable="t")


def spatial_process(
    mean_fn: Callable, sigma: float, coords: np.ndarray, weights: np.ndarray, l: float, d: int
) -> StochasticProcess:
    """Spatial SE process whose KL grid is the solver grid itself."""
    c = np.asarray(coords, dtype=float)
    kl = kl_decompose(se_kernel_matrix(c, l), weights, d, coords=c, correlation_length=l)
    return StochasticProcess(mean_fn, _zero, sigma, kl, variable="x")


@dataclass(frozen=True)
class FourierBoundaryProcess:
    """``mean + sigma sum_n n^-p L^-1/2 cos(n pi x1 / L) tau_n(t) xi_n``.

    ``tau_n(t) = sin(n pi t / L_t)`` when ``time_dependent`` else 1.
    """

    mean: float
    sigma: float
    d: int
    length_x: float = 5.0
    length_t: float = 5.0
    power: int = 3
    time_dependent: bool = True

    def _spatial(self, points: np.ndarray) -> np.ndarray:
        x1 = np.asarray(points)[:, 0]
        n = np.arange(1, self.d + 1)
        return np.cos(np.outer(x1, n) * np.pi / self.length_x) / n**self.power / np.sqrt(self.length_x)

    def values(self, points: np.ndarray, t: float, samples: SampleSet) -> np.ndarray:
        n = np.arange(1, self.d + 1)
        tau = np.sin(n * np.pi * t / self.length_t) if self.time_dependent else np.ones(self.d)
        return self.mean + self.sigma * (self._spatial(points) * tau) @ samples.xi[:, : self.d].T

    def rates(self, points: np.ndarray, t: float, samples: SampleSet) -> np.ndarray:
        if not self.time_dependent:
            return np.zeros((len(points), samples.s))
        n = np.arange(1, self.d + 1)
        tau_dot = n * np.pi / self.length_t * np.cos(n * np.pi * t / self.length_t)
        return self.sigma * (self._spatial(points) * tau_dot) @ samples.xi[:, : self.d].T


@dataclass(frozen=True)
class DeterministicProcess:
    """Sample-independent boundary data ``g(t)`` with derivative ``g_dot(t)``."""

    fn: Callable[[float], float]
    dfn: Callable[[float], float]

    def values(self, points, t, samples):
        return np.full((len(points), samples.s), float(self.fn(t)))

    def rates(self, points, t, samples):
        return np.full((len(points), samples.s), float(self.dfn(t)))


class ZeroProcess:
    """Homogeneous boundary data."""

    def values(self, points, t, samples):
        return np.zeros((len(points), samples.s))

    def rates(self, points, t, samples):
        return np.zeros((len(points), samples.s))
