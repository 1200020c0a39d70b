"""Symplectic normal spaces of cotangent-lifted Lie group actions.

The package computes, at a point of the cotangent bundle of a Riemannian
G-manifold given in a single chart, the adapted splittings of the Lie
algebra and the tangent space, the Witt-Artin decomposition at the momentum
value, and an explicit embedded symplectic normal space with its block
normal form and momentum map.  Every closed formula is backed by an
independent finite-difference check in :mod:`sympslice.fdchecks`.
"""

from .subspaces import (
    BilinearForm,
    LinearMapRep,
    Subspace,
    intersect,
    kernel_of,
    ortho_complement,
    span_of,
    symplectic_orthogonal,
    compatible_complex_structure,
    solve_exact,
)
from .liealg import LieAlgebra
from .geometry import FDConfig, MechanicalGSystem, PointFrame, point_frame
from .wittartin import CoadjointSplitting, witt_artin_split, verify_splitting
from .normalspace import (
    NormalSpaceResult,
    PointData,
    analyze_point,
    build_normal_space,
    lifted_generator_closed_form,
    momentum_JN,
)
from .systems import instantiate, list_systems
from .residuals import ResidualReport
from .fdchecks import (
    chart_canonical_form_check,
    covariant_cross_check,
    fd_lifted_generator,
    locked_inertia_identity_check,
)
from .verify import point_suite

__version__ = "0.1.0"

__all__ = [
    "BilinearForm",
    "LinearMapRep",
    "Subspace",
    "LieAlgebra",
    "FDConfig",
    "MechanicalGSystem",
    "PointFrame",
    "CoadjointSplitting",
    "NormalSpaceResult",
    "PointData",
    "analyze_point",
    "build_normal_space",
    "lifted_generator_closed_form",
    "momentum_JN",
    "point_frame",
    "witt_artin_split",
    "verify_splitting",
    "instantiate",
    "list_systems",
    "ResidualReport",
    "chart_canonical_form_check",
    "covariant_cross_check",
    "fd_lifted_generator",
    "locked_inertia_identity_check",
    "point_suite",
    "span_of",
    "kernel_of",
    "intersect",
    "ortho_complement",
    "symplectic_orthogonal",
    "compatible_complex_structure",
    "solve_exact",
    "__version__",
]
