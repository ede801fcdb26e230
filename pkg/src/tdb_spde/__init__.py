"""Low-rank time-dependent-basis solvers (DBO, DO) for stochastic PDEs with
stochastic boundary conditions, plus a collocation reference solver."""

from .errors import *  # noqa: F401,F403
from .grid import Grid, build_grid_1d, build_grid_2d, inner_x, normal_derivative_rows
from .stochastic import SampleSet, gauss_legendre_tensor, monte_carlo, inner_xi
from .kernels import KLExpansion, StochasticProcess, kl_decompose, se_kernel_matrix
from .fom import BcSpec, SemiDiscreteModel, assemble_model, fom_rhs, pcm_integrate
from .lowrank import DboState, DoState, dbo_rhs, do_rhs, boundary_rows_dbo, init_from_snapshot, step, integrate
from .kloracle import KlSnapshot, weighted_svd, energetic_rank, align_modes
from .metrics import ErrorSeries, global_error, boundary_error, singular_value_error
from .config import CaseConfig, make_config, read_config
from .cases import Problem, build_case

__version__ = "0.1.0"
