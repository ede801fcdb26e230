import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tdb_spde.errors import DimensionError, NonPSDError, ParameterError, RangeError
from tdb_spde.grid import build_grid_1d
from tdb_spde.kernels import (
    FourierBoundaryProcess,
    evaluate_process,
    evaluate_process_dot,
    kl_decompose,
    se_kernel_matrix,
    se_kl_expansion,
    spatial_process,
    temporal_process,
)
from tdb_spde.stochastic import gauss_legendre_tensor


def test_kernel_examples():
    K = se_kernel_matrix(np.array([0.0, 1.0, 2.5]), 1.0)
    np.testing.assert_array_equal(np.diag(K), 1.0)
    assert K[0, 1] == pytest.approx(np.exp(-0.5))
    assert K[0, 1] == pytest.approx(0.6065, abs=1e-4)
    with pytest.raises(ParameterError):
        se_kernel_matrix(np.zeros(3), 0.0)


def test_kernel_psd():
    x = np.linspace(0, 5, 101)
    K = se_kernel_matrix(x, 1.0)
    np.testing.assert_array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() >= -1e-10


def test_identity_kernel():
    m = 10
    kl = kl_decompose(np.eye(m), np.full(m, 1.0 / m), 4)
    np.testing.assert_allclose(kl.eigenvalues, 1.0 / m, rtol=1e-12)


def test_energy_capture_eight_modes():
    g = build_grid_1d(101, 0.0, 5.0)
    K = se_kernel_matrix(g.axes[0], 1.0)
    kl = kl_decompose(K, g.weights, 8)
    trace = np.sum(g.weights * np.diag(K))
    assert kl.eigenvalues.sum() / trace >= 0.9999


def test_truncated_reconstruction_within_one_percent():
    g = build_grid_1d(101, 0.0, 5.0)
    K = se_kernel_matrix(g.axes[0], 1.0)
    kl = kl_decompose(K, g.weights, 8)
    approx = (kl.eigenvectors * kl.eigenvalues) @ kl.eigenvectors.T
    w = g.weights
    err = np.sqrt(np.einsum("i,ij,j->", w, (K - approx) ** 2, w))
    ref = np.sqrt(np.einsum("i,ij,j->", w, K**2, w))
    assert err / ref <= 0.01


def test_mercer_trace_full_retention():
    g = build_grid_1d(40, 0.0, 2.0)
    K = se_kernel_matrix(g.axes[0], 0.3)
    # the tail eigenvalues of a smooth kernel sit at roundoff and can be
    # slightly negative; keep every positive one
    B = np.sqrt(g.weights)[:, None] * K * np.sqrt(g.weights)
    npos = int(np.sum(np.linalg.eigvalsh(B) > 0))
    kl = kl_decompose(K, g.weights, npos)
    assert kl.eigenvalues.sum() == pytest.approx(np.sum(g.weights), abs=1e-8)


def test_errors():
    with pytest.raises(DimensionError):
        kl_decompose(np.eye(3), np.ones(3), 4)
    with pytest.raises(NonPSDError):
        kl_decompose(-np.eye(3), np.ones(3), 1)


@given(l=st.floats(0.3, 4.0), d=st.integers(1, 6))
def test_kl_invariants(l, d):
    kl = se_kl_expansion(0.0, 5.0, l, d, m=128)
    lam = kl.eigenvalues
    assert np.all(lam > 0) and np.all(np.diff(lam) <= 0)
    G = kl.eigenvectors.T @ (kl.weights[:, None] * kl.eigenvectors)
    np.testing.assert_allclose(G, np.eye(d), atol=1e-10)


def _proc(sigma=1.0, d=2, evaluation="grid"):
    return temporal_process(lambda t: 0.5 * np.cos(2 * np.pi * t),
                            lambda t: -np.pi * np.sin(2 * np.pi * t), sigma, 5.0, 1.0, d,
                            evaluation=evaluation)


def test_deterministic_limit():
    s = gauss_legendre_tensor(2, 3)
    p = _proc(sigma=0.0)
    np.testing.assert_allclose(evaluate_process(p, 0.3, s), 0.5 * np.cos(0.6 * np.pi), atol=1e-15)
    np.testing.assert_allclose(evaluate_process_dot(p, 0.3, s), -np.pi * np.sin(0.6 * np.pi), atol=1e-14)


def test_sample_mean_and_variance():
    s = gauss_legendre_tensor(2, 3)
    p = _proc()
    t = 1.7
    vals = evaluate_process(p, t, s)
    assert s.expectation(vals) == pytest.approx(0.5 * np.cos(2 * np.pi * t), abs=1e-12)
    phi = p.kl.modes([t])[0]
    var = s.expectation(vals**2) - s.expectation(vals) ** 2
    assert var == pytest.approx(np.sum(p.kl.eigenvalues * phi**2) / 3, abs=1e-10)


@pytest.mark.parametrize("evaluation", ["grid", "nystrom"])
def test_rate_matches_central_difference(evaluation):
    s = gauss_legendre_tensor(2, 2)
    p = _proc(evaluation=evaluation)
    h = 1e-4
    for t in (0.4, 2.1, 3.33):
        fd = (evaluate_process(p, t + h, s) - evaluate_process(p, t - h, s)) / (2 * h)
        # grid mode differentiates the eigenvectors numerically on 512 points
        tol = 1e-3 if evaluation == "grid" else 1e-7
        np.testing.assert_allclose(evaluate_process_dot(p, t, s), fd, atol=tol)


def test_grid_modes_exact_at_nodes():
    p = _proc()
    np.testing.assert_allclose(p.kl.modes(p.kl.grid_coords[::37]), p.kl.eigenvectors[::37], atol=1e-14)
    nys = _proc(evaluation="nystrom")
    np.testing.assert_allclose(nys.kl.modes(nys.kl.grid_coords[::37]), nys.kl.eigenvectors[::37], atol=1e-10)


def test_range_error():
    s = gauss_legendre_tensor(2, 2)
    with pytest.raises(RangeError):
        evaluate_process(_proc(), 5.1, s)


def test_too_many_variables():
    s = gauss_legendre_tensor(1, 2)
    with pytest.raises(DimensionError):
        evaluate_process(_proc(d=2), 1.0, s)


def test_time_independent_processes_have_zero_rate():
    s = gauss_legendre_tensor(2, 2)
    f = FourierBoundaryProcess(1.0, 0.5, 2, power=1, time_dependent=False)
    pts = np.column_stack([np.linspace(-5, 5, 7), np.zeros(7)])
    np.testing.assert_array_equal(f.rates(pts, 0.7, s), 0.0)
    g = build_grid_1d(20, 0, 5)
    ic = spatial_process(np.cos, 1.0, g.axes[0], g.weights, 1.0, 2)
    np.testing.assert_array_equal(evaluate_process_dot(ic, 0.0, s), 0.0)


def test_fourier_process_rate_and_side_slopes():
    s = gauss_legendre_tensor(3, 2)
    f = FourierBoundaryProcess(1.0, 0.05, 3)
    pts = np.column_stack([np.array([-5.0, -1.0, 0.0, 2.5, 5.0]), np.zeros(5)])
    h = 1e-5
    fd = (f.values(pts, 1.3 + h, s) - f.values(pts, 1.3 - h, s)) / (2 * h)
    np.testing.assert_allclose(f.rates(pts, 1.3, s), fd, atol=1e-9)
    # zero slope at the side walls
    eps = 1e-6
    left = np.array([[-5.0, 0.0], [-5.0 + eps, 0.0]])
    v = f.values(left, 2.0, s)
    np.testing.assert_allclose((v[1] - v[0]) / eps, 0.0, atol=1e-5)
    # deterministic at t=0
    np.testing.assert_allclose(f.values(pts, 0.0, s), 1.0, atol=1e-15)
