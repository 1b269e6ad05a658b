"""Dependency models: sample dependent or constrained random vectors as
``X_{~j} = r_j(X_j, Z)`` and rank the d pivot choices by generalized
sensitivity indices."""

from . import univariate
from .constrained import (
    ConstraintSpec,
    MarginalSet,
    constraint_for,
    elliptical_shell_dm,
    gamma_sum_dm,
    gaussian_linsum_dm,
    gaussian_quad_dm,
    general_linsum_dm,
    general_quad_dm,
    general_sum_dm,
    sigma_c,
    trapezoid_constraint,
    trapezoid_dm,
)
from .core import (
    DependencyModel,
    DmSpec,
    SampleBatch,
    chain_from_conditionals,
    check_triangular,
    linear_lift,
    push_forward,
    sample_batch,
)
from .elliptical import cauchy_dm, gaussian_dm, student_t_dm
from .errors import *  # noqa: F401,F403
from .gsi import (
    GsiReport,
    SelectionResult,
    gsi_gaussian_analytic,
    gsi_pick_freeze,
    gsi_trapezoid_analytic,
    select_efficient_dm,
)
from .numerics import RngStream
from .registry import build_dm
from .simplex import dirichlet_dm, gd_dm, pgd_dm, pgd_sphere_dm, uniform_pball_dm, uniform_psphere_dm
from .specfile import load as load_spec
from .univariate import DistributionSpec

__version__ = "0.1.0"
