"""Acceptance criteria 1-12. Each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` to see the lines
interleaved with the test names; without ``-s`` they are still written to
the terminal.
"""

import time

import numpy as np
import pytest

from tdb_spde import build_case, make_config
from tdb_spde.bench import read_csv, run_case
from tdb_spde.fom import (
    BcSpec,
    assemble_model,
    enforce_initial_bc,
    pcm_integrate,
    rhs_advection_diffusion_1d,
)
from tdb_spde.grid import build_grid_1d
from tdb_spde.kernels import ZeroProcess, spatial_process
from tdb_spde.kloracle import weighted_svd
from tdb_spde.lowrank import (
    DboState,
    OrthogonalityMonitor,
    boundary_rows_dbo,
    dbo_rhs,
    init_from_snapshot,
    integrate,
    step,
    weighted_qr,
)
from tdb_spde.metrics import global_error, time_average
from tdb_spde.stochastic import gauss_legendre_tensor

pytestmark = pytest.mark.acceptance

# largest |<dU_i, U_j>_x| seen by any monitored low-rank run in this module
ORTHO_SEEN: dict[str, float] = {}


@pytest.fixture
def verdict(capsys):
    def emit(num: int, name: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'} {name}: {detail}")
        return ok

    return emit


def _exact_rank(V, grid, samples, rel=1e-10):
    sig = weighted_svd(V, grid, samples, min(V.shape)).sigma
    return int(np.sum(sig > rel * sig[0]))


def _pcm_and_lowrank(P, r, method, t_end, dt, monitor=None, **kw):
    ref = pcm_integrate(P.model, P.V0, 0.0, t_end, dt, stride=100)
    state = init_from_snapshot(P.V0, P.grid, P.samples, r, method)
    lr = integrate(state, P.model, 0.0, t_end, dt, stride=100, monitor=monitor, **kw)
    errs = [global_error(s.reconstruct(), V) for s, V in zip(lr.states, ref.states)]
    return ref, lr, errs


def test_c01_full_rank_oracle_equivalence(verdict):
    P = build_case(make_config("linadv-dirichlet", n=65, d=2, q=4, dt=5e-4, t_final=1.0))
    r = _exact_rank(P.V0, P.grid, P.samples)
    t0 = time.perf_counter()
    worst = {}
    for method in ("dbo", "do"):
        mon = OrthogonalityMonitor()
        _, _, errs = _pcm_and_lowrank(P, r, method, 1.0, 5e-4, monitor=mon)
        worst[method] = max(errs)
        ORTHO_SEEN[f"c01-{method}"] = mon.max_u
    wall = time.perf_counter() - t0
    ok = r == 3 and max(worst.values()) <= 1e-6 and wall <= 60
    verdict(1, "full-rank oracle equivalence", ok,
            f"r={r} max eg dbo={worst['dbo']:.2e} do={worst['do']:.2e} (<=1e-6), wall {wall:.1f}s (<=60)")
    assert ok


def test_c02_boundary_row_identity(verdict):
    P = build_case(make_config("linadv-dirichlet"))
    rng = np.random.default_rng(2)
    wx, wxi = P.grid.weights, P.samples.w_xi
    rows = P.model.boundary_idx[np.flatnonzero(P.model.b == 0)]
    worst = 0.0
    for _ in range(100):
        r = int(rng.integers(1, 6))
        U, _ = weighted_qr(rng.standard_normal((P.grid.n, r)), wx)
        Y, _ = weighted_qr(rng.standard_normal((P.samples.s, r)), wxi)
        S = np.diag(rng.uniform(0.5, 2.0, r)) + 0.1 * rng.standard_normal((r, r))
        state = DboState(U=U, S=S, Y=Y, wx=wx, wxi=wxi)
        t = float(rng.uniform(0.0, 1.0))
        dU, _, _ = dbo_rhs(state, P.model, t)
        worst = max(worst, float(np.max(np.abs(dU[rows] - boundary_rows_dbo(state, P.model, t)))))
    ok = worst <= 1e-12
    verdict(2, "boundary-row identity", ok, f"max deviation {worst:.2e} over 100 states (<=1e-12)")
    assert ok


def _burgers_after_switch():
    cfg = make_config("burgers-dirichlet", t_final=2.8)
    P = build_case(cfg)
    V = pcm_integrate(P.model, P.V0, 0.0, cfg.t_switch, cfg.dt, stride=10**6).states[-1]
    return P, cfg, V


def test_c03_orthonormality_preservation(verdict):
    P, cfg, V = _burgers_after_switch()
    results = {}
    for reortho, n in ((True, 10_000), (False, 1_000)):
        state = init_from_snapshot(V, P.grid, P.samples, 3)
        mon = OrthogonalityMonitor()
        worst_u = worst_y = 0.0
        t = cfg.t_switch
        for _ in range(n):
            state = step(state, P.model, t, cfg.dt, reortho=reortho, monitor=mon)
            t += cfg.dt
            eu, ey = state.ortho_error()
            worst_u, worst_y = max(worst_u, eu), max(worst_y, ey)
        results[reortho] = (worst_u, worst_y)
        ORTHO_SEEN[f"c03-reortho={reortho}"] = mon.max_u
    (ru, ry), (fu, fy) = results[True], results[False]
    ok = max(ru, ry) <= 1e-8 and max(fu, fy) <= 1e-5
    verdict(3, "orthonormality preservation", ok,
            f"with reortho U {ru:.2e} Y {ry:.2e} over 1e4 steps (<=1e-8); "
            f"without U {fu:.2e} Y {fy:.2e} over 1e3 steps (<=1e-5)")
    assert ok


def test_c04_dynamical_orthogonality(verdict):
    seen = dict(ORTHO_SEEN)
    # short monitored runs on every case, in addition to the runs above
    for case in ("linadv-dirichlet", "linadv-neumann", "linadv-robin", "burgers-dirichlet",
                 "conv2d-linear", "conv2d-nonlinear"):
        over = dict(n1=17, n2=17) if case.startswith("conv2d") else dict(n=33)
        cfg = make_config(case, q=3, t_switch=0.0, **over)
        P = build_case(cfg)
        V = P.V0
        if cfg.is_2d:
            # the 2D initial state is rank one; warm up at full order first
            V = pcm_integrate(P.model, V, 0.0, 0.1, cfg.dt, stride=10**6).states[-1]
        r = min(3, _exact_rank(V, P.grid, P.samples))
        for method in ("dbo", "do"):
            mon = OrthogonalityMonitor()
            state = init_from_snapshot(V, P.grid, P.samples, r, method)
            integrate(state, P.model, 0.1, 0.15, cfg.dt, stride=10**6, monitor=mon)
            seen[f"{case}-{method}"] = mon.max_u
    worst_key = max(seen, key=seen.get)
    ok = seen[worst_key] <= 1e-12
    verdict(4, "dynamical orthogonality", ok,
            f"max |<dU_i,U_j>| {seen[worst_key]:.2e} ({worst_key}) over {len(seen)} monitored runs (<=1e-12)")
    assert ok


def _desk_1d_run(case, tmp_path, **over):
    cfg = make_config(case, n=65, d=2, q=4, r=[3], dt=5e-4, t_final=1.0, stride=50,
                      methods=["dbo"], **over)
    report = run_case(cfg, tmp_path / case, timing=False)
    ORTHO_SEEN[f"c05-{case}"] = report.ortho["dbo_r3"]
    return read_csv(tmp_path / case / "err_boundary.csv")


def test_c05_boundary_constraint(verdict, tmp_path):
    lines, ok = [], True
    for case in ("linadv-dirichlet", "linadv-neumann", "linadv-robin"):
        eb = _desk_1d_run(case, tmp_path)
        pcm_max = float(np.max(eb["eb_pcm"]))
        avg_pcm = time_average(eb["t"], eb["eb_pcm"])
        avg_dbo = time_average(eb["t"], eb["eb_dbo"])
        ratio = avg_dbo / avg_pcm
        good = pcm_max <= 1e-6 and 0.5 <= ratio <= 2.0
        ok &= good
        lines.append(f"{case} pcm max {pcm_max:.2e} dbo/pcm {ratio:.3f}")
    verdict(5, "boundary-constraint enforcement", ok, "; ".join(lines) + " (pcm<=1e-6, ratio in [0.5,2])")
    assert ok


def test_c06_rank_sweep(verdict):
    P = build_case(make_config("linadv-dirichlet", n=65, d=3, q=3, dt=5e-4, t_final=1.0))
    exact = _exact_rank(P.V0, P.grid, P.samples)
    ref = pcm_integrate(P.model, P.V0, 0.0, 1.0, 5e-4, stride=100)
    avg = {}
    for r in (2, 3, 4):
        lr = integrate(init_from_snapshot(P.V0, P.grid, P.samples, r), P.model, 0.0, 1.0, 5e-4, stride=100)
        errs = [global_error(s.reconstruct(), V) for s, V in zip(lr.states, ref.states)]
        avg[r] = time_average(ref.times, errs)
    ok = exact == 4 and avg[2] >= avg[3] >= avg[4] and avg[2] >= 10 * avg[exact]
    verdict(6, "rank-sweep monotonicity", ok,
            f"exact rank {exact}; time-averaged eg r=2 {avg[2]:.3e}, r=3 {avg[3]:.3e}, r=4 {avg[4]:.3e}")
    assert ok


def test_c07_conditioning_contrast(verdict):
    # tiny stochastic amplitudes next to an O(1) mean give sigma_max/sigma_min ~ 1e9
    scale = 1e-9
    P = build_case(make_config("linadv-dirichlet", sigma_t=scale, sigma_x=scale))
    sig = weighted_svd(P.V0, P.grid, P.samples, 3).sigma
    ratio = float(sig[0] / sig[-1])
    final = {}
    for method in ("dbo", "do"):
        # the DO covariance condition is ratio**2 > 1e12; lift the cap so DO runs
        _, _, errs = _pcm_and_lowrank(P, 3, method, 1.0, 5e-4, cond_cap=1e300)
        final[method] = errs[-1]
    factor = final["do"] / final["dbo"]
    ok = ratio >= 1e6 and factor >= 10
    verdict(7, "conditioning contrast", ok,
            f"sigma ratio {ratio:.2e}; final eg dbo {final['dbo']:.2e} do {final['do']:.2e}; "
            f"factor {factor:.3g} (>=10, regression value)")
    assert ok


def test_c08_kl_optimality(verdict):
    rng = np.random.default_rng(8)
    slack_worst = np.inf
    for _ in range(50):
        n, s = int(rng.integers(5, 40)), int(rng.integers(5, 40))
        r = int(rng.integers(1, min(n, s)))
        wx = rng.uniform(0.1, 2.0, n)
        wxi = rng.uniform(0.1, 2.0, s)
        wxi /= wxi.sum()
        V = rng.standard_normal((n, s))

        def err(W):
            return np.sqrt(np.einsum("i,ij,j->", wx, (V - W) ** 2, wxi))

        kl = weighted_svd(V, wx, wxi, r)
        best = err(kl.reconstruct())
        for k in range(10):
            if k % 2:
                W = rng.standard_normal((n, r)) @ rng.standard_normal((r, s))
            else:
                # competitors close to the optimum probe the second-order gap
                A = kl.U_kl * kl.sigma + 1e-3 * rng.standard_normal((n, r))
                W = A @ (kl.Y_kl + 1e-3 * rng.standard_normal((s, r))).T
            slack_worst = min(slack_worst, err(W) - best)
    ok = slack_worst >= -1e-12
    verdict(8, "KL optimality", ok, f"min(random - truncated) {slack_worst:.3e} over 500 factorizations (>= -1e-12)")
    assert ok


def test_c09_rk4_order(verdict):
    P = build_case(make_config("linadv-dirichlet", n=33, d=2, q=2))
    x = P.grid.axes[0]
    xi = P.samples.xi
    # a fourth random direction makes r = s = 4 full rank
    V0 = enforce_initial_bc(P.model, P.V0 + 0.3 * np.outer(np.sin(np.pi * x / 5), xi[:, 0] * xi[:, 1]))
    finals = []
    for dt in (0.04, 0.02, 0.01, 0.005):
        state = init_from_snapshot(V0, P.grid, P.samples, 4)
        finals.append(integrate(state, P.model, 0.0, 1.0, dt, stride=10**6).states[-1].reconstruct())
    diffs = [np.linalg.norm(a - b) for a, b in zip(finals[:-1], finals[1:])]
    orders = np.log2(np.array(diffs[:-1]) / np.array(diffs[1:]))
    ok = bool(np.all(np.abs(orders - 4.0) <= 0.15))
    verdict(9, "RK4 order", ok, f"observed orders {', '.join(f'{o:.3f}' for o in orders)} (4.0 +- 0.15)")
    assert ok


def test_c10_no_cost(verdict):
    P = build_case(make_config("linadv-dirichlet", n=513, d=2, q=16, t_final=1.0))
    homog = P.homogeneous()
    state = init_from_snapshot(P.V0, P.grid, P.samples, 3)
    dt = 5e-4
    for model in (P.model, homog):  # warm caches
        step(state, model, 0.0, dt)
    stoch, hom = [], []
    for k in range(300):
        pair = ((P.model, stoch), (homog, hom))
        for model, acc in pair if k % 2 == 0 else pair[::-1]:
            t0 = time.perf_counter()
            step(state, model, k * dt, dt)
            acc.append(time.perf_counter() - t0)
    ratio = float(np.median(stoch) / np.median(hom))
    ok = ratio <= 1.10
    verdict(10, "no-cost boundary treatment", ok,
            f"median step stochastic {np.median(stoch) * 1e3:.3f} ms, homogeneous {np.median(hom) * 1e3:.3f} ms, "
            f"ratio {ratio:.3f} (<=1.10; n=513 s=256 r=3)")
    assert ok


def test_c11_conservation(verdict):
    n, dt = 2049, 5e-5
    grid = build_grid_1d(n, 0.0, 5.0)
    samples = gauss_legendre_tensor(2, 2)
    bcs = [BcSpec(0.0, 1.0, ZeroProcess(), edge="left"), BcSpec(0.0, 1.0, ZeroProcess(), edge="right")]
    model = assemble_model(grid, samples, bcs, rhs_advection_diffusion_1d(grid, 0.05, 0.0))
    x = grid.axes[0]
    ic = spatial_process(lambda c: np.cos(2 * np.pi * c), 0.5, x, grid.weights, 1.0, 2)
    V0 = enforce_initial_bc(model, ic.field(x, samples))
    V1 = pcm_integrate(model, V0, 0.0, 1.0, dt, stride=10**6).states[-1]
    drift = float(np.max(np.abs(grid.weights @ V1 - grid.weights @ V0)))
    ok = drift <= 1e-6
    verdict(11, "conservation", ok, f"max |integral drift| {drift:.2e} over t_f=1 (<=1e-6; n={n})")
    assert ok


def test_c12_2d_smoke(verdict, tmp_path):
    cfg = make_config("conv2d-linear", n1=33, n2=33, d=2, q=3, r=[3], t_final=2.0, stride=100)
    t0 = time.perf_counter()
    report = run_case(cfg, tmp_path, timing=False)
    wall = time.perf_counter() - t0
    ORTHO_SEEN["c12-dbo"] = report.ortho["dbo_r3"]
    ORTHO_SEEN["c12-do"] = report.ortho["do_r3"]
    sv = read_csv(tmp_path / "singvals.csv")
    dev = max(float(np.max(np.abs(sv[f"s{i}_dbo"] - sv[f"s{i}_kl"]) / sv[f"s{i}_kl"])) for i in (1, 2, 3))
    ok = report.error is None and dev <= 0.05 and wall <= 600
    verdict(12, "2D smoke", ok, f"max relative sigma deviation {dev:.2e} (<=5%), wall {wall:.1f}s (<=600)")
    assert ok
