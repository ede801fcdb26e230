"""Uniform finite-difference collocation grids in one and two dimensions.

Every grid carries trapezoid quadrature weights (the diagonal of the spatial
mass matrix), second-order first/second derivative operators per direction,
and the split of point indices into boundary and interior sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, DiscretizationError

MIN_POINTS = 8
# 3 points is the smallest grid on which the one-sided stencils exist.
_STENCIL_FLOOR = 3


@dataclass(frozen=True, eq=False)
class Grid:
    """Collocation grid.

    Points are flattened with the last coordinate varying fastest, so for a
    2D grid point ``(i1, i2)`` has index ``i1 * n2 + i2``.

    Attributes
    ----------
    axes : tuple of 1D arrays
        Coordinates along each direction.
    points : (n, dims) array
    weights : (n,) array
        Trapezoid quadrature weights, the diagonal of ``M_x``.
    d1, d2 : tuple of sparse (n, n) matrices
        First and second derivative operator for each direction.
    boundary_idx, interior_idx : int arrays
        Sorted, disjoint, together covering ``range(n)``.
    normal_axis, normal_sign : int arrays aligned with ``boundary_idx``
        Default outward normal of each boundary point. Corners in 2D default
        to the ``x2`` edges.
    edges : dict
        Edge name (``left``/``right`` and, in 2D, ``bottom``/``top``) to
        point indices on that edge, corners included.
    """

    axes: tuple[np.ndarray, ...]
    points: np.ndarray
    weights: np.ndarray
    d1: tuple[sp.csr_matrix, ...]
    d2: tuple[sp.csr_matrix, ...]
    boundary_idx: np.ndarray
    interior_idx: np.ndarray
    normal_axis: np.ndarray
    normal_sign: np.ndarray
    edges: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def dims(self) -> int:
        return len(self.axes)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def measure(self) -> float:
        return float(np.prod([a[-1] - a[0] for a in self.axes]))

    def deriv(self, V: np.ndarray, axis: int = 0, order: int = 1) -> np.ndarray:
        op = self.d1[axis] if order == 1 else self.d2[axis]
        return op @ V

    def laplacian(self, V: np.ndarray) -> np.ndarray:
        out = self.d2[0] @ V
        for op in self.d2[1:]:
            out = out + op @ V
        return out

    def edge_normal(self, edge: str) -> tuple[int, int]:
        return _EDGE_NORMALS[edge]


_EDGE_NORMALS = {
    "left": (0, -1),
    "right": (0, 1),
    "bottom": (1, -1),
    "top": (1, 1),
}


def _check_count(n: int, min_points: int) -> None:
    floor = max(min_points, _STENCIL_FLOOR)
    if int(n) != n or n < floor:
        raise DiscretizationError(f"need at least {floor} points per direction, got {n}")


def _first_derivative(n: int, h: float) -> sp.csr_matrix:
    D = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        D[i, i - 1] = -0.5
        D[i, i + 1] = 0.5
    D[0, 0:3] = [-1.5, 2.0, -0.5]
    D[n - 1, n - 3:n] = [0.5, -2.0, 1.5]
    return (D / h).tocsr()


def _second_derivative(n: int, h: float) -> sp.csr_matrix:
    D = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        D[i, i - 1:i + 2] = [1.0, -2.0, 1.0]
    if n >= 4:
        D[0, 0:4] = [2.0, -5.0, 4.0, -1.0]
        D[n - 1, n - 4:n] = [-1.0, 4.0, -5.0, 2.0]
    else:
        D[0, 0:3] = [1.0, -2.0, 1.0]
        D[n - 1, n - 3:n] = [1.0, -2.0, 1.0]
    return (D / h**2).tocsr()


def _trapezoid(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def build_grid_1d(n: int, x_l: float, x_r: float, *, min_points: int = MIN_POINTS) -> Grid:
    """Uniform grid of ``n`` points on ``[x_l, x_r]``."""
    _check_count(n, min_points)
    if not x_l < x_r:
        raise DiscretizationError(f"need x_l < x_r, got [{x_l}, {x_r}]")
    x = np.linspace(x_l, x_r, n)
    h = (x_r - x_l) / (n - 1)
    return Grid(
        axes=(x,),
        points=x[:, None],
        weights=_trapezoid(n, h),
        d1=(_first_derivative(n, h),),
        d2=(_second_derivative(n, h),),
        boundary_idx=np.array([0, n - 1]),
        interior_idx=np.arange(1, n - 1),
        normal_axis=np.array([0, 0]),
        normal_sign=np.array([-1, 1]),
        edges={"left": np.array([0]), "right": np.array([n - 1])},
    )


def build_grid_2d(
    n1: int,
    n2: int,
    bounds: tuple[tuple[float, float], tuple[float, float]],
    *,
    min_points: int = MIN_POINTS,
) -> Grid:
    """Tensor-product grid on the rectangle ``bounds = ((x1_l, x1_r), (x2_l, x2_r))``."""
    (a1, b1), (a2, b2) = bounds
    g1 = build_grid_1d(n1, a1, b1, min_points=min_points)
    g2 = build_grid_1d(n2, a2, b2, min_points=min_points)
    x1, x2 = g1.axes[0], g2.axes[0]
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    points = np.column_stack([X1.ravel(), X2.ravel()])
    I1, I2 = sp.identity(n1, format="csr"), sp.identity(n2, format="csr")

    index = np.arange(n1 * n2).reshape(n1, n2)
    edges = {
        "left": index[0, :].copy(),
        "right": index[-1, :].copy(),
        "bottom": index[:, 0].copy(),
        "top": index[:, -1].copy(),
    }
    on_boundary = np.zeros(n1 * n2, dtype=bool)
    for idx in edges.values():
        on_boundary[idx] = True
    boundary_idx = np.flatnonzero(on_boundary)

    # corners take the normal of the x2 edge they sit on
    normal_axis = np.empty(len(boundary_idx), dtype=int)
    normal_sign = np.empty(len(boundary_idx), dtype=int)
    owner = {}
    for name in ("right", "left", "top", "bottom"):
        for k in edges[name]:
            owner[int(k)] = name
    for j, k in enumerate(boundary_idx):
        normal_axis[j], normal_sign[j] = _EDGE_NORMALS[owner[int(k)]]

    return Grid(
        axes=(x1, x2),
        points=points,
        weights=np.outer(g1.weights, g2.weights).ravel(),
        d1=(sp.kron(g1.d1[0], I2, format="csr"), sp.kron(I1, g2.d1[0], format="csr")),
        d2=(sp.kron(g1.d2[0], I2, format="csr"), sp.kron(I1, g2.d2[0], format="csr")),
        boundary_idx=boundary_idx,
        interior_idx=np.flatnonzero(~on_boundary),
        normal_axis=normal_axis,
        normal_sign=normal_sign,
        edges=edges,
    )


def inner_x(u: np.ndarray, v: np.ndarray, grid: Grid) -> float:
    """Discrete spatial inner product ``u^T diag(w_x) v``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != (grid.n,) or v.shape != (grid.n,):
        raise DimensionError(f"expected vectors of length {grid.n}, got {u.shape} and {v.shape}")
    return float(u @ (grid.weights * v))


def normal_derivative_rows(
    grid: Grid,
    idx: np.ndarray | None = None,
    normal_axis: np.ndarray | None = None,
    normal_sign: np.ndarray | None = None,
) -> sp.csr_matrix:
    """Outward normal-derivative operator restricted to boundary points.

    By default one row per entry of ``grid.boundary_idx`` using the grid's
    default normals; ``idx``/``normal_axis``/``normal_sign`` override the
    selection (e.g. to give a corner the normal of a side wall).
    """
    if idx is None:
        idx = grid.boundary_idx
        normal_axis = grid.normal_axis if normal_axis is None else normal_axis
        normal_sign = grid.normal_sign if normal_sign is None else normal_sign
    idx = np.asarray(idx)
    if normal_axis is None or normal_sign is None:
        raise DimensionError("normal_axis and normal_sign are required with an explicit idx")
    rows = []
    for k, ax, sg in zip(idx, normal_axis, normal_sign):
        rows.append(sg * grid.d1[ax][int(k)])
    return sp.vstack(rows, format="csr") if rows else sp.csr_matrix((0, grid.n))
