"""Neural multigrid solvers (C++ core)."""

from ._core import (
    CheckpointError,
    NeuralSolver,
    NumericalFailure,
    ProblemSpec,
    apply,
    cg_solve,
    dense,
    jacobi_reduction_factor,
    load_solver,
    make_rhs,
    mask,
    mg_solve,
    train,
    untrained_solver,
)

__all__ = [
    "CheckpointError",
    "NeuralSolver",
    "NumericalFailure",
    "ProblemSpec",
    "apply",
    "cg_solve",
    "dense",
    "jacobi_reduction_factor",
    "load_solver",
    "make_rhs",
    "mask",
    "mg_solve",
    "train",
    "untrained_solver",
]
