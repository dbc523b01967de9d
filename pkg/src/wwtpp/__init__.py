"""Toolkit for the wastewater treatment plant scheduling problem."""

from .model import (
    Discharge,
    Industry,
    Instance,
    InstanceError,
    Sat,
    Solution,
    Timeout,
    Unknown,
    Unsat,
    build_grid,
    read_instance,
    read_solution,
    validate_instance,
    write_instance,
    write_solution,
)
from .semantics import VerifyOptions, simulate_buffers, verify
from .solver import SolverConfig, oracle_solve, solve

__version__ = "0.1.0"
