"""Switched model-reference admittance control with invariance-based safety."""
from . import admittance, baselines, bounds, dynamics, mrac, observer, reference, safety
from .config import bundled_config, load_bundled, load_scenario, loads_scenario
from .errors import (ConditionViolated, ConfigRejected, NoCommonP, NonInvertibleMass, NotHurwitz,
                     NumericalDivergence, SafeAdmitError, SingularInertia, StructureMismatch, Underdamped)
from .simkit import Scenario, TrajectoryLog, compute_metrics, precheck, run_scenario

__version__ = "0.1.0"
