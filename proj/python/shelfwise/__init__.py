"""Continuous-time Markov chain discovery and what-if analysis for shelf stock."""

from ._core import (  # noqa: F401
    Ctmc,
    Event,
    EventLog,
    ProductSublog,
    ShelfwiseError,
    analyze,
    discover_ctmc,
    empirical_occupancy,
    enhance_with_supply,
    expected_quantity,
    expected_surplus,
    extract_sublog,
    is_irreducible,
    list_products,
    parse_log,
    quantity_classes,
    sample_trajectory,
    steady_state,
    undersupply_probability,
    validate,
    what_if_sweep,
)

__version__ = "0.1.0"
