"""Sparse inverse covariance estimation (graphical lasso) with pISTA."""
from .gista import solve_gista
from .objective import Problem
from .pista import solve_pista
from .solver import SolveResult, SolverConfig, Termination

__all__ = ["Problem", "SolveResult", "SolverConfig", "Termination", "solve_gista", "solve_pista"]
