"""Integral-integral affine manifolds, their prequantized torus fibrations,
and exact checks of vol(B) = |B_Z| and RR(M) = |BS|."""

from .affine import AffineMap, AffineTier, apply, classify, compose, invert, orbit_reps
from .almodels import (
    ALTransition,
    EnhancedALModel,
    FibreLoop,
    bohr_sommerfeld_set,
    holonomy,
    holonomy_numeric,
    is_bohr_sommerfeld,
    is_enhanced_isomorphism,
    is_symplectomorphism,
)
from .dualbundle import (
    AFFINE_LATTICE,
    PREQUANTIZATION,
    ZERO_SECTION,
    BundleSection,
    TorusBundleChart,
    intersection_number,
    prequantization_section_check,
    section_coincidence_points,
)
from .linalg import RMatrix, det, inverse, is_gl_n_z, matmul
from .quotient import (
    Polytope,
    QuotientPresentation,
    builtin_presentation,
    integral_points,
    monte_carlo_volume,
    validate_tiling,
    volume,
)
from .riemann_roch import VerificationReport, riemann_roch_number, verify_all

__version__ = "0.1.0"
