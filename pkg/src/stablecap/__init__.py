"""Exact and heuristic solvers for stable matching with capacity expansion."""
from .instance import (Instance, InstanceError, Solution, generate_random, load_instance,
                       penalty_preset, save_instance)
from .matching import blocking_pairs, da_school_optimal, da_student_optimal, f_of_t, objective_value
from .cutting_plane import solve_cpm
from .heuristics import greedy, lph
from .oracle import solve_exhaustive

__all__ = [
    "Instance", "InstanceError", "Solution", "generate_random", "load_instance",
    "penalty_preset", "save_instance", "blocking_pairs", "da_school_optimal",
    "da_student_optimal", "f_of_t", "objective_value", "solve_cpm", "greedy", "lph",
    "solve_exhaustive",
]
__version__ = "0.1.0"
