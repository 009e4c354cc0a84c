"""Maximum quantum nonlocality for the 46 tight tripartite Bell inequalities.

The package computes exact local bounds, variational quantum maxima over
three-qubit states, entanglement and incompatibility profiles of the
optimizers, and moment-matrix upper bounds, for every inequality of the
three-party, two-setting, two-outcome scenario.
"""

from .bell_expr import (
    BellExpression,
    BellParseError,
    CatalogEntry,
    catalog_entry,
    deterministic_value,
    format_expression,
    load_catalog,
    local_bound,
    parse_expression,
    substitute_identity,
)

__version__ = "0.1.0"
