"""Numerical checks of isoperimetric inequalities for the principal Robin
eigenvalue with positive boundary parameter, and for a class of Neumann
energies, on planar domains."""

from .ball import BallEigenResult, BallProblem, ball_eigenvalue, shooting_eigenvalue
from .domains import DomainError, DomainSpec
from .fem import EigenResult, ScalarField, SolverError, robin_principal_eigen
from .mesh import Mesh, MeshError, triangulate
from .reports import VERSION as __version__
from .reports import ExperimentReport
from .transplant import GreenData, green_function, harmonic_center, theorem1_check, transplant

__all__ = [
    "BallEigenResult",
    "BallProblem",
    "DomainError",
    "DomainSpec",
    "EigenResult",
    "ExperimentReport",
    "GreenData",
    "Mesh",
    "MeshError",
    "ScalarField",
    "SolverError",
    "ball_eigenvalue",
    "green_function",
    "harmonic_center",
    "robin_principal_eigen",
    "shooting_eigenvalue",
    "theorem1_check",
    "transplant",
    "triangulate",
]
