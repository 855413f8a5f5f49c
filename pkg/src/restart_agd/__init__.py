"""Accelerated gradient descent with adaptive restarts and runtime-certified bounds."""

from .certify import (CertificateReport, CheckResult, certify_trace, classical_bound,
                      multi_restart_bound, restart_aware_bound, single_restart_bound)
from .config import ExperimentConfig
from .engine import agd_step, run
from .errors import (ArgumentError, ConfigError, DomainError, GenerationError, NumericError,
                     PreconditionError, RestartAGDError)
from .experiments import bench, run_experiment, sweep
from .iterates import MomentumSchedule, RunTrace, SolverState
from .objectives import (HinderLubinProblem, HuberProblem, Objective, QuadraticProblem,
                         ScalarProblem, asymmetric_piecewise, grad_check, make_hinder_lubin,
                         make_huber, make_modified_hinder_lubin, make_quadratic,
                         scalar_huber, scaled_quadratic)
from .policies import RestartPolicy
from .prng import Prng

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "CertificateReport", "CheckResult", "ConfigError", "DomainError",
    "ExperimentConfig", "GenerationError", "HinderLubinProblem", "HuberProblem",
    "MomentumSchedule", "NumericError", "Objective", "PreconditionError", "Prng",
    "QuadraticProblem", "RestartAGDError", "RestartPolicy", "RunTrace", "ScalarProblem",
    "SolverState", "agd_step", "asymmetric_piecewise", "bench", "certify_trace",
    "classical_bound", "grad_check", "make_hinder_lubin", "make_huber",
    "make_modified_hinder_lubin", "make_quadratic", "multi_restart_bound",
    "restart_aware_bound", "run", "run_experiment", "scalar_huber", "scaled_quadratic",
    "single_restart_bound", "sweep",
]
