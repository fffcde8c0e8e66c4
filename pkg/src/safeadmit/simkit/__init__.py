from .log import TrajectoryLog, SchemaError, trajectory_columns
from .loop import run_scenario
from .metrics import MetricsRecord, compute_metrics, error_signal, integral_indices, total_variation
from .profiles import Disturbance, ForceProfile, disturbance, force_profile
from .scenario import DisturbanceConfig, ObserverConfig, PrecheckReport, Scenario, precheck

__all__ = [
    "Disturbance", "DisturbanceConfig", "ForceProfile", "MetricsRecord", "ObserverConfig",
    "PrecheckReport", "Scenario", "SchemaError", "TrajectoryLog", "compute_metrics",
    "disturbance", "error_signal", "force_profile", "integral_indices", "precheck",
    "run_scenario", "total_variation", "trajectory_columns",
]
