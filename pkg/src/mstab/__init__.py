"""Combinatorial engine for n-pointed curves of arithmetic genus one.

Validate decorated dual graphs, decide stability with exact rational
weights, analyse semistable tails of elliptic m-fold points, run the
stable-limit and weighted-reduction pipelines, and enumerate equisingular
strata with witness-certified specialisation relations.
"""

from .decomposition import Decomposition, decompose, level, level_minimality_check
from .degeneration import (
    DegenerationModel,
    blow_up_marking,
    contract_elliptic,
    from_stable_fiber,
    initial_model,
    insert_chain,
    stabilize,
    stable_limit,
    weighted_reduce,
)
from .enumeration import (
    SpecializationEdge,
    Stratum,
    build_poset,
    enumerate_strata,
    specializes,
)
from .errors import (
    BoundExceededError,
    InternalInvariantError,
    InvalidModelError,
    MalformedModelError,
    MstabError,
    ParseError,
    PreconditionError,
    UnbalancedTailError,
)
from .model import (
    Component,
    CurveModel,
    EllipticPoint,
    Marking,
    WeightVector,
    arithmetic_genus,
    canonical_form,
    canonicalize,
    curve,
    distinguished_points,
    is_isomorphic,
    is_valid,
    omega_degree,
    total_omega_degree,
    validate,
)
from .serialize import (
    emit_dot,
    emit_dot_poset,
    parse_model,
    parse_tail,
    parse_weights,
    serialize_model,
)
from .stability import (
    StabilityReport,
    StabilityViolation,
    is_m_stable,
    is_mA_stable,
    stratum_dimension,
)
from .tails import (
    AttachMark,
    DiscrepancySolution,
    SemistableTail,
    VerticalDivisor,
    degree_zero,
    discrepancy_closed_form,
    discrepancy_solve,
    distance_to_core,
    is_balanced,
    semistable_tail,
    tail_canonical_form,
)

__all__ = [name for name in dir() if not name.startswith("_")]
