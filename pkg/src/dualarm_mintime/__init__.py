"""Minimum-time dual-arm trajectory optimization along a relative Cartesian path.

Joint trajectories are polynomials in the path parameter with coefficients
confined to a joint-limit-safe box; a sampling-based reverse-diffusion
solver (plus CEM and random-search baselines) minimizes traversal time
under an adaptive penalty on the relative-pose tracking error.
"""

__version__ = "0.1.0"

from .baselines import BaselineConfig, run_cem, run_random_search
from .diffusion import NoiseSchedule, SolverConfig, build_schedule, solve
from .kinematics import (
    ArmModel,
    DesiredPath,
    IKResult,
    Joint,
    fit_nominal_coefficients,
    forward_kinematics,
    inverse_kinematics_path,
    jacobian,
    make_arm,
    relative_pose,
)
from .objective import (
    Evaluation,
    ObjectiveConfig,
    TrajectoryObjective,
    cartesian_error,
    min_time,
    update_penalty,
)
from .parameterization import (
    BasisConfig,
    ExplorationBounds,
    basis_matrix,
    basis_row,
    map_latent,
    reconstruct_trajectory,
    select_sigma,
)
from .runner import ResultBundle, prepare, run
from .scenario import Scenario, ScenarioError, load_builtin, load_scenario

__all__ = [
    "ArmModel",
    "BaselineConfig",
    "BasisConfig",
    "DesiredPath",
    "Evaluation",
    "ExplorationBounds",
    "IKResult",
    "Joint",
    "NoiseSchedule",
    "ObjectiveConfig",
    "ResultBundle",
    "Scenario",
    "ScenarioError",
    "SolverConfig",
    "TrajectoryObjective",
    "__version__",
    "basis_matrix",
    "basis_row",
    "build_schedule",
    "cartesian_error",
    "fit_nominal_coefficients",
    "forward_kinematics",
    "inverse_kinematics_path",
    "jacobian",
    "load_builtin",
    "load_scenario",
    "make_arm",
    "map_latent",
    "min_time",
    "prepare",
    "reconstruct_trajectory",
    "relative_pose",
    "run",
    "run_cem",
    "run_random_search",
    "select_sigma",
    "solve",
    "update_penalty",
]
