"""Builders for the six benchmark problems: grid, samples, boundary data,
right-hand side and a boundary-consistent initial condition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import CaseConfig, validate_config
from .fom import (
    BcSpec,
    SemiDiscreteModel,
    assemble_model,
    enforce_initial_bc,
    jet_velocity,
    linear_conduction,
    load_velocity_file,
    rhs_advection_diffusion_1d,
    rhs_advection_diffusion_2d,
    rhs_burgers_1d,
)
from .grid import Grid, build_grid_1d, build_grid_2d
from .kernels import FourierBoundaryProcess, ZeroProcess, spatial_process, temporal_process
from .stochastic import SampleSet, gauss_legendre_tensor, monte_carlo

TWO_PI = 2.0 * np.pi
LINADV_DOMAIN = (0.0, 5.0)
BURGERS_DOMAIN = (0.0, 1.0)
CONV2D_BOUNDS = ((-5.0, 5.0), (0.0, 5.0))


@dataclass(eq=False)
class Problem:
    cfg: CaseConfig
    grid: Grid
    samples: SampleSet
    model: SemiDiscreteModel
    V0: np.ndarray
    t0: float = 0.0

    def homogeneous(self) -> SemiDiscreteModel:
        """Same model with every boundary datum replaced by zero."""
        bcs = [BcSpec(bc.a, bc.b, ZeroProcess(), edge=bc.edge, idx=bc.idx) for bc in self.model.bcs]
        return assemble_model(self.grid, self.samples, bcs, self.model.rhs_interior)


def build_samples(cfg: CaseConfig) -> SampleSet:
    if cfg.sampling == "tensor":
        return gauss_legendre_tensor(cfg.d, cfg.q)
    return monte_carlo(cfg.d, cfg.s, cfg.seed)


def _linadv_boundary(cfg: CaseConfig):
    amp = cfg.bc_mean_amp
    if cfg.case == "linadv-dirichlet":
        return (lambda t: amp * np.cos(TWO_PI * t)), (lambda t: -amp * TWO_PI * np.sin(TWO_PI * t))
    if cfg.case == "linadv-neumann":
        return (lambda t: amp * TWO_PI * np.sin(TWO_PI * t)), (lambda t: amp * TWO_PI**2 * np.cos(TWO_PI * t))
    return (
        lambda t: amp * (-np.cos(TWO_PI * t) + TWO_PI * np.sin(TWO_PI * t)),
        lambda t: amp * (TWO_PI * np.sin(TWO_PI * t) + TWO_PI**2 * np.cos(TWO_PI * t)),
    )


def _build_1d(cfg: CaseConfig, samples: SampleSet) -> Problem:
    burgers = cfg.case == "burgers-dirichlet"
    lo, hi = BURGERS_DOMAIN if burgers else LINADV_DOMAIN
    grid = build_grid_1d(cfg.n, lo, hi)
    x = grid.axes[0]
    if burgers:
        amp = cfg.bc_mean_amp
        mean, mean_dot = (lambda t: -amp * np.sin(TWO_PI * t)), (lambda t: -amp * TWO_PI * np.cos(TWO_PI * t))
        ic_mean = lambda c: cfg.ic_mean_amp * np.sin(TWO_PI * c)  # noqa: E731
        rhs = rhs_burgers_1d(grid, cfg.nu)
    else:
        mean, mean_dot = _linadv_boundary(cfg)
        ic_mean = lambda c: cfg.ic_mean_amp * np.cos(TWO_PI * c)  # noqa: E731
        rhs = rhs_advection_diffusion_1d(grid, cfg.nu, cfg.c)
    g = temporal_process(mean, mean_dot, cfg.sigma_t, cfg.t_final, cfg.l_t, cfg.d,
                         cfg.kl_points, cfg.kl_evaluation)
    # boundary data are written with d/dx; the outward normal at x=0 is -x
    bcs = [
        BcSpec(cfg.a, -cfg.b, g, edge="left"),
        BcSpec(0.0, 1.0, ZeroProcess(), edge="right"),
    ]
    model = assemble_model(grid, samples, bcs, rhs)
    ic = spatial_process(ic_mean, cfg.sigma_x, x, grid.weights, cfg.l_x, cfg.d)
    V0 = enforce_initial_bc(model, ic.field(x, samples), 0.0)
    return Problem(cfg, grid, samples, model, V0)


def _build_2d(cfg: CaseConfig, samples: SampleSet) -> Problem:
    grid = build_grid_2d(cfg.n1, cfg.n2, CONV2D_BOUNDS)
    velocity = load_velocity_file(cfg.velocity_file) if cfg.velocity_file else jet_velocity
    kappa = cfg.alpha / (cfg.reynolds * cfg.prandtl)
    conduction = None
    if cfg.beta != 0.0:
        conduction = linear_conduction(cfg.alpha, cfg.beta, cfg.reynolds, 1.0 / cfg.prandtl)
    rhs = rhs_advection_diffusion_2d(grid, velocity, conduction, kappa=kappa)
    nonlinear = cfg.case == "conv2d-nonlinear"
    g = FourierBoundaryProcess(
        mean=cfg.bc_mean_amp,
        sigma=cfg.sigma_x,
        d=cfg.d,
        length_x=CONV2D_BOUNDS[0][1],
        length_t=5.0,
        power=1 if nonlinear else 3,
        time_dependent=not nonlinear,
    )
    bcs = [
        BcSpec(1.0, 0.0, g, edge="bottom"),
        BcSpec(1.0, 0.0, ZeroProcess(), edge="top"),
        BcSpec(0.0, 1.0, ZeroProcess(), edge="left"),
        BcSpec(0.0, 1.0, ZeroProcess(), edge="right"),
    ]
    model = assemble_model(grid, samples, bcs, rhs)
    V0 = enforce_initial_bc(model, np.zeros((grid.n, samples.s)), 0.0)
    return Problem(cfg, grid, samples, model, V0)


def build_case(cfg: CaseConfig) -> Problem:
    """Assemble the full-order problem described by ``cfg``."""
    validate_config(cfg)
    samples = build_samples(cfg)
    if cfg.is_2d:
        return _build_2d(cfg, samples)
    return _build_1d(cfg, samples)
