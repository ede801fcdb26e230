"""Random-space discretization: collocation sample sets and the discrete expectation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DimensionError, ParameterError

SAMPLE_CAP = 100_000


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Samples ``xi`` (s x d) of U[-1, 1]^d with probability weights ``w_xi``.

    ``w_xi`` is the diagonal of the random-space mass matrix ``M_xi``.
    """

    xi: np.ndarray
    w_xi: np.ndarray
    kind: str

    @property
    def s(self) -> int:
        return self.xi.shape[0]

    @property
    def d(self) -> int:
        return self.xi.shape[1]

    def expectation(self, y: np.ndarray) -> np.ndarray:
        """``E[y]`` along the last axis of ``y``."""
        return np.asarray(y) @ self.w_xi


def gauss_legendre_tensor(d: int, q: int, *, cap: int = SAMPLE_CAP) -> SampleSet:
    """Tensor-product Gauss-Legendre rule with ``q`` nodes per direction."""
    if d < 1 or q < 1:
        raise ParameterError(f"need d >= 1 and q >= 1, got d={d}, q={q}")
    s = q**d
    if s > cap:
        raise BudgetError(f"tensor rule needs q^d = {q}^{d} = {s} samples, cap is {cap}")
    nodes, weights = np.polynomial.legendre.leggauss(q)
    xi = np.array(list(itertools.product(nodes, repeat=d)), dtype=float).reshape(s, d)
    w = np.array([np.prod(c) for c in itertools.product(weights, repeat=d)]) / 2.0**d
    return SampleSet(xi=xi, w_xi=w, kind="tensor-collocation")


def monte_carlo(d: int, s: int, seed: int) -> SampleSet:
    """``s`` i.i.d. draws from U[-1, 1]^d, equal weights ``1/s``."""
    if s < 2:
        raise ParameterError(f"Monte Carlo needs s >= 2, got {s}")
    if d < 1:
        raise ParameterError(f"need d >= 1, got {d}")
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1.0, 1.0, size=(s, d))
    return SampleSet(xi=xi, w_xi=np.full(s, 1.0 / s), kind="monte-carlo")


def inner_xi(y: np.ndarray, z: np.ndarray, samples: SampleSet) -> float:
    """Discrete random-space inner product, i.e. ``E[y z]``."""
    y = np.asarray(y)
    z = np.asarray(z)
    if y.shape != (samples.s,) or z.shape != (samples.s,):
        raise DimensionError(f"expected vectors of length {samples.s}, got {y.shape} and {z.shape}")
    return float(y @ (samples.w_xi * z))
