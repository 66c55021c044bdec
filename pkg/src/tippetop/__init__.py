"""Dynamics, steady states and stability of the eccentric-sphere tippe top."""
from .dynamics import (
    FullState,
    energy,
    energy_rate,
    full_rhs,
    jellet,
    normal_reaction,
    slip_velocity,
    state_from_spin,
)
from .equilibria import (
    SteadyKind,
    SteadyState,
    continue_branch,
    solve_intermediate,
    vertical_states,
)
from .errors import ChartSingularity, DegenerateCase, ModelBreakdown, ParameterError
from .model import TopParams, load_params, save_params, validate
from .presets import GROUP_RATIOS, all_presets, demo_preset, group_preset
from .reduction import ReducedState, reduced_rhs, to_full, to_reduced
from .simulate import (
    IntegratorConfig,
    Termination,
    Trajectory,
    integrate_full,
    integrate_reduced,
    monitor_report,
)
from .stability import (
    ClassificationReport,
    classify,
    diagram,
    eigenvalues,
    is_linearly_stable,
    threshold_n1,
    threshold_n2,
)

__version__ = "0.1.0"

__all__ = [
    "ChartSingularity", "ClassificationReport", "DegenerateCase", "FullState", "GROUP_RATIOS",
    "IntegratorConfig", "ModelBreakdown", "ParameterError", "ReducedState", "SteadyKind",
    "SteadyState", "Termination", "TopParams", "Trajectory", "all_presets", "classify",
    "continue_branch", "demo_preset", "diagram", "eigenvalues", "energy", "energy_rate",
    "full_rhs", "group_preset", "integrate_full", "integrate_reduced", "is_linearly_stable",
    "jellet", "load_params", "monitor_report", "normal_reaction", "reduced_rhs", "save_params",
    "slip_velocity", "solve_intermediate", "state_from_spin", "threshold_n1", "threshold_n2",
    "to_full", "to_reduced", "validate", "vertical_states",
]
