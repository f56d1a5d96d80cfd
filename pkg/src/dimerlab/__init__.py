"""Dimer models on the torus: dual quivers, zigzag paths and consistency checks."""

__version__ = "0.1.0"

from .core import (
    DimerModel,
    Edge,
    Face,
    ModelSyntaxError,
    load_model,
    make_model,
    parse_model,
    serialize_model,
    trace_faces,
    validate_model,
)
from .matchings import (
    NoPerfectMatchingError,
    enumerate_perfect_matchings,
    find_perfect_matching,
    is_non_degenerate,
    crossing_number,
)
from .quiver import (
    BoundError,
    Quiver,
    QuiverPath,
    are_equivalent,
    are_weakly_equivalent,
    find_first_consistency_counterexample,
    is_minimal,
    reduce_via_matching,
)
from .zigzag import (
    ZigzagPath,
    pair_intersections,
    self_intersections,
    slope_cyclic_order,
    trace_zigzags,
    zigzags_through_node,
)
from .consistency import check_consistent, check_ks_criterion, check_properly_ordered, cross_check
from .corpus import build_hexagonal, build_square, conifold, corpus, fixture, hexagon

__all__ = [name for name in dir() if not name.startswith("_")]
