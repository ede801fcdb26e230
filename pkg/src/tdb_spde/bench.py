"""Benchmark runner: PCM reference and DBO/DO runs advanced in lockstep,
with singular values, aligned boundary modes and error series written as CSV."""

from __future__ import annotations

import csv
import logging
import os
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cases import Problem, build_case
from .config import CaseConfig, validate_config
from .errors import CaseRunError, TdbError
from .fom import check_cfl, fom_rhs, n_steps, rk4_step
from .kloracle import ModeAmbiguityWarning, align_modes, energetic_rank, report_sigma, weighted_svd
from .lowrank import OrthogonalityMonitor, init_from_snapshot, step
from .metrics import boundary_error, global_error, global_error_weighted, time_average

log = logging.getLogger(__name__)

CSV_FORMAT = "%.16e"  # 17 significant digits
TIMING_STEPS = 20


def emit_csv(series: Mapping[str, Sequence[float]], path) -> Path:
    """Write columns to ``path``; the first column is expected to be time.

    All columns must have the same nonzero length. Values are written in
    scientific notation with 17 significant digits so a round trip through
    ``float`` is exact.
    """
    if not series:
        raise ValueError("cannot write an empty series")
    cols = list(series)
    lengths = {len(series[c]) for c in cols}
    if len(lengths) != 1 or 0 in lengths:
        raise ValueError(f"columns must be nonempty and of equal length, got lengths {sorted(lengths)}")
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*(series[c] for c in cols)):
            w.writerow([CSV_FORMAT % v for v in row])
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {h: data[:, i] for i, h in enumerate(header)}


@dataclass
class _Track:
    """Output buffers for one low-rank method at one rank."""

    method: str
    r: int
    state: object = None
    monitor: OrthogonalityMonitor = field(default_factory=OrthogonalityMonitor)
    wall: float = 0.0
    steps: int = 0
    max_condition: float = 0.0


@dataclass
class RankOutput:
    r: int
    times: list = field(default_factory=list)
    singvals: dict = field(default_factory=dict)
    err_global: dict = field(default_factory=dict)
    err_boundary: dict = field(default_factory=dict)
    modes: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def add(self, table: dict, key: str, value: float) -> None:
        table.setdefault(key, []).append(float(value))


@dataclass
class RunReport:
    cfg: CaseConfig
    out_dir: Path
    final: dict = field(default_factory=dict)
    averages: dict = field(default_factory=dict)
    conditions: dict = field(default_factory=dict)
    ortho: dict = field(default_factory=dict)
    wall: dict = field(default_factory=dict)
    step_timing: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    error: str | None = None

    def text(self) -> str:
        c = self.cfg
        size = f"n1={c.n1} n2={c.n2}" if c.is_2d else f"n={c.n}"
        sampling = f"tensor q={c.q}" if c.sampling == "tensor" else f"mc s={c.s} seed={c.seed}"
        lines = [
            f"case: {c.case}",
            f"grid: {size}; random: d={c.d} {sampling} (s={c.sample_count})",
            f"time: dt={c.dt} t_switch={c.t_switch} t_final={c.t_final}",
            f"ranks: {c.r}; methods: {', '.join(c.methods)}",
            "",
            "final errors (plain global / weighted global / boundary):",
        ]
        for key, (eg, egw, eb) in sorted(self.final.items()):
            lines.append(f"  {key:<12} {eg:.6e}  {egw:.6e}  {eb:.6e}")
        if self.averages:
            lines.append("time-averaged plain global error:")
            for key, v in sorted(self.averages.items()):
                lines.append(f"  {key:<12} {v:.6e}")
        if self.conditions:
            lines.append("max condition number (Sigma for dbo, covariance for do):")
            for key, v in sorted(self.conditions.items()):
                lines.append(f"  {key:<12} {v:.6e}")
        if self.ortho:
            lines.append("max |<dU, U>_x| over all right-hand-side evaluations:")
            for key, v in sorted(self.ortho.items()):
                lines.append(f"  {key:<12} {v:.3e}")
        lines.append("wall time [s]:")
        for key, v in sorted(self.wall.items()):
            lines.append(f"  {key:<12} {v:.3f}")
        if self.step_timing:
            st = self.step_timing
            lines.append(
                f"dbo step time (median of {st['steps']}, r={st['r']}): stochastic bc {st['stochastic']:.6e} s, "
                f"homogeneous bc {st['homogeneous']:.6e} s, ratio {st['ratio']:.4f}"
            )
        if self.error:
            lines += ["", f"ABORTED: {self.error}"]
        return "\n".join(lines) + "\n"


def _out_dir(cfg: CaseConfig, out: str | Path | None) -> Path:
    if out is not None:
        return Path(out)
    if cfg.out:
        return Path(cfg.out)
    return Path(os.environ.get("TDB_SPDE_OUT", "runs")) / cfg.case


def _stochastic_rows(problem: Problem) -> np.ndarray:
    idx = problem.model.boundary_idx[problem.model.bc_rows(0)]
    return np.asarray(idx)


def _dbo_step_timing(problem: Problem, V: np.ndarray, t: float, r: int) -> dict:
    """Median DBO step time with the stochastic and the homogeneous model."""
    cfg = problem.cfg
    state = init_from_snapshot(V, problem.grid, problem.samples, r, "dbo")
    homog = problem.homogeneous()
    stoch_t, homog_t = [], []
    for k in range(TIMING_STEPS):
        tk = min(t + k * cfg.dt, cfg.t_final - cfg.dt)
        order = ((problem.model, stoch_t), (homog, homog_t))
        for model, acc in order if k % 2 == 0 else order[::-1]:
            t0 = time.perf_counter()
            step(state, model, tk, cfg.dt)
            acc.append(time.perf_counter() - t0)
    s, h = float(np.median(stoch_t)), float(np.median(homog_t))
    return dict(steps=TIMING_STEPS, r=r, stochastic=s, homogeneous=h, ratio=s / h)


class _Recorder:
    def __init__(self, problem: Problem, tracks: list[_Track]):
        self.p = problem
        self.tracks = tracks
        self.ranks = sorted({tr.r for tr in tracks}) or sorted(problem.cfg.r)
        self.out = {r: RankOutput(r) for r in self.ranks}
        self.bidx = _stochastic_rows(problem)
        self.kl_prev: dict[int, np.ndarray] = {}

    def record(self, t: float, V: np.ndarray) -> None:
        p = self.p
        rmax = max(self.ranks)
        kl = weighted_svd(V, p.grid, p.samples, rmax, t)
        eb_pcm = boundary_error(V, p.model, t)
        for r in self.ranks:
            o = self.out[r]
            o.times.append(t)
            kl_modes = kl.U_kl[:, :r]
            if r in self.kl_prev:
                kl_modes = self._align(kl_modes, self.kl_prev[r], o, t, "kl")
            self.kl_prev[r] = kl_modes
            sig_kl = report_sigma(kl.sigma[:r])
            V_kl = (kl.U_kl[:, :r] * kl.sigma[:r]) @ kl.Y_kl[:, :r].T
            o.add(o.err_boundary, "eb_pcm", eb_pcm)
            o.add(o.err_boundary, "eb_kl", boundary_error(V_kl, p.model, t))
            o.add(o.err_global, "eg_kl", global_error(V_kl, V))
            o.add(o.err_global, "egw_kl", global_error_weighted(V_kl, V, p.grid, p.samples))
            for i in range(r):
                o.add(o.singvals, f"s{i + 1}_kl", sig_kl[i])
            self._modes(o, "kl", kl_modes)
            for tr in self.tracks:
                if tr.r != r:
                    continue
                ranked = energetic_rank(tr.state)
                modes = self._align(ranked.U_kl, kl_modes, o, t, tr.method)
                W = tr.state.reconstruct()
                o.add(o.err_global, f"eg_{tr.method}", global_error(W, V))
                o.add(o.err_global, f"egw_{tr.method}", global_error_weighted(W, V, p.grid, p.samples))
                o.add(o.err_boundary, f"eb_{tr.method}", boundary_error(W, p.model, t))
                for i in range(r):
                    o.add(o.singvals, f"s{i + 1}_{tr.method}", report_sigma(ranked.sigma)[i])
                self._modes(o, tr.method, modes)
                tr.max_condition = max(tr.max_condition, tr.state.condition())

    def _align(self, modes, ref, o: RankOutput, t: float, label: str) -> np.ndarray:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ModeAmbiguityWarning)
            aligned = align_modes(modes, ref, self.p.grid.weights)
        if caught:
            o.warnings.append(f"t={t:.6g} {label}: modes {aligned.ambiguous} have near-zero overlap")
        return aligned.modes

    def _modes(self, o: RankOutput, method: str, modes: np.ndarray) -> None:
        table = o.modes.setdefault(method, {})
        vals = modes[self.bidx]
        for i in range(modes.shape[1]):
            for j in range(len(self.bidx)):
                table.setdefault(f"u{i + 1}_b{j}", []).append(float(vals[j, i]))


def _columns(o: RankOutput, table: dict, order: Sequence[str]) -> dict:
    cols = {"t": o.times}
    for key in order:
        if key in table and len(table[key]) == len(o.times):
            cols[key] = table[key]
    return cols


def _write_outputs(rec: _Recorder, cfg: CaseConfig, out_dir: Path, report: RunReport) -> None:
    methods = [m for m in cfg.methods if m != "pcm"]
    for r, o in rec.out.items():
        if not o.times:
            continue
        d = out_dir if len(rec.out) == 1 else out_dir / f"r{r}"
        d.mkdir(parents=True, exist_ok=True)
        order = [f"s{i + 1}_{m}" for i in range(r) for m in ["kl", *methods]]
        report.files.append(emit_csv(_columns(o, o.singvals, order), d / "singvals.csv"))
        order = [f"{k}_{m}" for k in ("eg", "egw") for m in [*methods, "kl"]]
        report.files.append(emit_csv(_columns(o, o.err_global, order), d / "err_global.csv"))
        order = [f"eb_{m}" for m in ["pcm", "kl", *methods]]
        report.files.append(emit_csv(_columns(o, o.err_boundary, order), d / "err_boundary.csv"))
        for m in ["kl", *methods]:
            table = o.modes.get(m)
            if table:
                cols = {"t": o.times, **{k: v for k, v in table.items() if len(v) == len(o.times)}}
                report.files.append(emit_csv(cols, d / f"boundary_modes_{m}.csv"))
        if o.warnings:
            (d / "warnings.txt").write_text("\n".join(o.warnings) + "\n", encoding="utf-8")


def run_case(cfg: CaseConfig, out: str | Path | None = None, *, timing: bool = True) -> RunReport:
    """Integrate the PCM reference and every requested low-rank run.

    Low-rank states are initialized from the PCM snapshot at ``t_switch``
    (the initial condition when it is zero) and then advanced in lockstep
    with the reference. Outputs are flushed even when a run aborts.
    """
    validate_config(cfg)
    out_dir = _out_dir(cfg, out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = RunReport(cfg=cfg, out_dir=out_dir)
    t_build = time.perf_counter()
    try:
        problem = build_case(cfg)
    except TdbError as exc:
        raise CaseRunError(f"{cfg.case}: building the problem failed: {exc}", case=cfg.case) from exc
    report.wall["build"] = time.perf_counter() - t_build
    check_cfl(problem.model, cfg.dt)

    steps = n_steps(0.0, cfg.t_final, cfg.dt)
    k_switch = n_steps(0.0, cfg.t_switch, cfg.dt) if cfg.t_switch > 0 else 0
    methods = [m for m in cfg.methods if m != "pcm"]
    tracks = [_Track(m, r) for r in cfg.r for m in methods]
    rec = _Recorder(problem, tracks)
    model = problem.model

    def f(V, t):
        return fom_rhs(model, V, t)

    V = problem.V0.copy()
    t = 0.0
    pcm_wall = 0.0
    try:
        for k in range(steps + 1):
            t = k * cfg.dt
            if k == k_switch:
                for tr in tracks:
                    tr.state = init_from_snapshot(V, problem.grid, problem.samples, tr.r, tr.method)
                if timing and "dbo" in methods:
                    report.step_timing = _dbo_step_timing(problem, V, t, max(cfg.r))
            if k >= k_switch and ((k - k_switch) % cfg.stride == 0 or k == steps):
                rec.record(t, V)
            if k == steps:
                break
            t0 = time.perf_counter()
            V = rk4_step(f, V, t, cfg.dt)
            pcm_wall += time.perf_counter() - t0
            if not np.all(np.isfinite(V)):
                raise CaseRunError(f"{cfg.case}: PCM reference blew up after t={t}", cfg.case, t)
            if k >= k_switch:
                for tr in tracks:
                    t0 = time.perf_counter()
                    tr.state = step(tr.state, model, t, cfg.dt, monitor=tr.monitor)
                    tr.wall += time.perf_counter() - t0
                    tr.steps += 1
    except TdbError as exc:
        report.error = f"{type(exc).__name__} at t={t:.6g}: {exc}"
        _finish(report, rec, tracks, pcm_wall, out_dir)
        if isinstance(exc, CaseRunError):
            raise
        raise CaseRunError(f"{cfg.case}: {report.error}", case=cfg.case, time=t) from exc
    _finish(report, rec, tracks, pcm_wall, out_dir)
    return report


def _finish(report: RunReport, rec: _Recorder, tracks, pcm_wall: float, out_dir: Path) -> None:
    cfg = report.cfg
    report.wall["pcm"] = pcm_wall
    for tr in tracks:
        key = f"{tr.method}_r{tr.r}"
        report.wall[key] = tr.wall
        report.conditions[key] = tr.max_condition
        report.ortho[key] = tr.monitor.max_u
        o = rec.out[tr.r]
        eg = o.err_global.get(f"eg_{tr.method}")
        if eg:
            report.final[key] = (eg[-1], o.err_global[f"egw_{tr.method}"][-1], o.err_boundary[f"eb_{tr.method}"][-1])
            report.averages[key] = time_average(o.times[: len(eg)], eg)
    for r, o in rec.out.items():
        if o.err_boundary.get("eb_pcm"):
            report.final.setdefault("pcm", (0.0, 0.0, o.err_boundary["eb_pcm"][-1]))
            report.final[f"kl_r{r}"] = (o.err_global["eg_kl"][-1], o.err_global["egw_kl"][-1],
                                        o.err_boundary["eb_kl"][-1])
    _write_outputs(rec, cfg, out_dir, report)
    path = out_dir / "report.txt"
    path.write_text(report.text(), encoding="utf-8")
    report.files.append(path)
