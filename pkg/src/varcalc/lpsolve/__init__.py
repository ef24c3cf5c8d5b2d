"""Dense desk-scale linear programming and polyhedral geometry kernels.

Everything in here is deliberately small and deterministic: a two-phase
primal simplex with Bland's rule and checkable certificates, a double
description converter between halfspace and generator representations,
an active-set Euclidean projection, and eigenvalue bounds on cone faces.
Intended scale is tens of variables and a few hundred rows; no sparse
structures, no parallelism.
"""

from .simplex import LpProblem, LpResult, LpNumericalError, lp_solve
from .dd import cone_generators, vertex_enumerate, hrep_from_generators, VRep
from .qp import project_onto_polyhedron, ProjectionResult
from .spectra import min_quadratic_on_cone_face, FaceMinimum

__all__ = [
    "LpProblem",
    "LpResult",
    "LpNumericalError",
    "lp_solve",
    "cone_generators",
    "vertex_enumerate",
    "hrep_from_generators",
    "VRep",
    "project_onto_polyhedron",
    "ProjectionResult",
    "min_quadratic_on_cone_face",
    "FaceMinimum",
]
