"""Instantaneous Karhunen-Loeve decomposition (weighted SVD) of sample
matrices, energetic ranking of low-rank factors, and mode sign alignment."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, TdbError

SIGMA_FLOOR = 1e-14


class ModeAmbiguityWarning(UserWarning):
    """Test and reference modes are (nearly) orthogonal; modes may have crossed."""


@dataclass(frozen=True, eq=False)
class KlSnapshot:
    U_kl: np.ndarray
    sigma: np.ndarray
    Y_kl: np.ndarray
    t: float | None = None

    @property
    def r(self) -> int:
        return len(self.sigma)

    def reconstruct(self) -> np.ndarray:
        return (self.U_kl * self.sigma) @ self.Y_kl.T


def _w(obj) -> np.ndarray:
    if hasattr(obj, "weights"):
        return obj.weights
    if hasattr(obj, "w_xi"):
        return obj.w_xi
    return np.asarray(obj, dtype=float)


def weighted_svd(V: np.ndarray, grid, samples, r: int, t: float | None = None) -> KlSnapshot:
    """Rank-``r`` KL modes of ``V`` under the ``w_x`` / ``w_xi`` inner products.

    ``grid`` and ``samples`` may be :class:`Grid`/:class:`SampleSet` objects or
    plain weight vectors.
    """
    wx, wxi = _w(grid), _w(samples)
    n, s = V.shape
    if not 1 <= r <= min(n, s):
        raise DimensionError(f"rank {r} must lie in [1, min(n, s) = {min(n, s)}]")
    sx, sxi = np.sqrt(wx), np.sqrt(wxi)
    P, sig, Qt = np.linalg.svd(sx[:, None] * V * sxi[None, :], full_matrices=False)
    U = P[:, :r] / sx[:, None]
    Y = Qt[:r].T / sxi[:, None]
    return KlSnapshot(U_kl=U, sigma=sig[:r], Y_kl=Y, t=t)


def energetic_rank(state) -> KlSnapshot:
    """Rotate the factors of a DBO/DO state so modes are ordered by energy."""
    if hasattr(state, "S"):
        U, S, Y = state.U, state.S, state.Y
        if not (np.all(np.isfinite(U)) and np.all(np.isfinite(S)) and np.all(np.isfinite(Y))):
            raise TdbError("non-finite DBO factors")
        P, sig, Qt = np.linalg.svd(S)
        return KlSnapshot(U_kl=U @ P, sigma=sig, Y_kl=Y @ Qt.T)
    U, Y = state.U, state.Y
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(Y))):
        raise TdbError("non-finite DO factors")
    C = Y.T @ (state.wxi[:, None] * Y)
    lam, Q = np.linalg.eigh(0.5 * (C + C.T))
    order = np.argsort(lam)[::-1]
    lam, Q = np.clip(lam[order], 0.0, None), Q[:, order]
    sig = np.sqrt(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(sig > 0, 1.0 / sig, 0.0)
    return KlSnapshot(U_kl=U @ Q, sigma=sig, Y_kl=(Y @ Q) * scale)


class AlignedModes(NamedTuple):
    modes: np.ndarray
    signs: np.ndarray
    ambiguous: list


def align_modes(test: np.ndarray, reference: np.ndarray, weights, tol: float = 1e-8) -> AlignedModes:
    """Flip columns of ``test`` so that each has nonnegative overlap with the
    matching ``reference`` column under the ``weights`` inner product.

    Columns with ``|overlap| < tol`` are reported in ``ambiguous`` and raise a
    :class:`ModeAmbiguityWarning`; they are left unflipped.
    """
    test = np.asarray(test)
    reference = np.asarray(reference)
    if test.shape[1] != reference.shape[1]:
        raise DimensionError(f"mode counts differ: {test.shape[1]} vs {reference.shape[1]}")
    w = _w(weights)
    overlap = np.einsum("ij,i,ij->j", test, w, reference)
    ambiguous = [int(i) for i in np.flatnonzero(np.abs(overlap) < tol)]
    signs = np.where(overlap < 0, -1.0, 1.0)
    if ambiguous:
        warnings.warn(f"near-zero overlap for modes {ambiguous}; modes may have crossed",
                      ModeAmbiguityWarning, stacklevel=2)
    return AlignedModes(test * signs, signs, ambiguous)


def report_sigma(sigma: np.ndarray, floor: float = SIGMA_FLOOR) -> np.ndarray:
    """Zero out singular values below ``floor`` for reporting."""
    return np.where(np.abs(sigma) < floor, 0.0, sigma)
