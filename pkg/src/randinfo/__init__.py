"""Radii of random ellipsoid sections and recovery from Gaussian information.

The package computes, for seeded realizations of a Gaussian information
matrix, the exact radius of the induced ellipsoid section (the worst-case
error of optimal recovery), the worst-case error of the least-squares
estimator, all the analytic high-probability bounds on these quantities, and
Monte Carlo experiments that verify the probabilistic statements at desk
scale.
"""

from .bounds import (BoundReport, bvh_threshold, elementary_lb, gordon_an, lb_main,
                     mstar_estimate, mstar_section_bound, realization_ub,
                     ub_exponential, ub_main)
from .concentration import (TailCheck, check_bvh, check_davidson_szarek,
                            check_gordon_comparison, check_laurent_massart,
                            check_smin_basic, check_szarek)
from .errors import (ConvergenceError, NumericalError, RankDeficiencyError,
                     ResourceLimitError)
from .experiments import (SweepConfig, SweepSummary, TrialRecord,
                          dichotomy_experiment, regime_report, run_sweep)
from .geometry import SectionRadius, ball_coordinate_sq, coordinate_radius, section_radius
from .randmat import (GaussianInfo, KernelProjector, StructuredMatrix,
                      kernel_projector_apply, sample, singular_values,
                      top_sv_of_projected_diag)
from .recovery import EstimatorSpec, apply_estimator, optimal_radius, worst_case_error
from .sequences import SemiAxes

__version__ = "0.1.0"
