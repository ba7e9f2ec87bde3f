"""Exact symbolic calculus for closed symplectic 4-manifolds built from
labeled blocks by fiber sums: integer Euler characteristics and signatures,
presentation-level fundamental groups, marked-surface bookkeeping, and
geography analytics relative to the slope-9 line."""

from .blocks import Block, ComplementData, MarkedSurface, block, validate
from .constructions import (
    ConstructionReport,
    build_A,
    build_J,
    build_MGn,
    build_W,
    build_Z,
    build_ZE,
)
from .fpgroup import (
    AbelianInvariants,
    GroupHom,
    Presentation,
    Word,
    abelianization,
    free_product,
    free_reduce,
    is_presentation_trivial,
    parse_presentation,
    parse_word,
    quotient_by_normal_closure,
    smith_normal_form,
    tietze_simplify,
)
from .geography import GeographyPoint, QuadraticFamily, f_value, family_behavior, main_family, point, slope_limit
from .sumcalc import (
    GluingSpec,
    IntersectionConfig,
    SignedPermutation,
    fiber_sum,
    free_product_rule,
    resolve_intersections,
)

__version__ = "0.1.0"
