"""Fixed-point solver turning optimization problems into conservative
signal-processing architectures: orthonormal scattering interconnections
coupled to nonlinear constitutive maps through synchronous or asynchronous
delays."""

from ._core import (
    Problem,
    ProblemParseError,
    SolverError,
    element_map,
    grid_solve,
    inverse_transform,
    kkt_solve,
    scattering_matrix,
    solve,
    transform,
    verify,
)

__all__ = [
    "Problem",
    "ProblemParseError",
    "SolverError",
    "element_map",
    "grid_solve",
    "inverse_transform",
    "kkt_solve",
    "scattering_matrix",
    "solve",
    "transform",
    "verify",
]
