"""Input validation helpers shared by the functional API and the estimators."""

import math
import numbers

from .exceptions import EmptyGraphError, GraphError


def check_alpha(alpha):
    if not isinstance(alpha, numbers.Real) or isinstance(alpha, bool):
        raise TypeError(f"alpha must be a real number, got {type(alpha).__name__}")
    if not math.isfinite(alpha) or alpha < 0:
        raise ValueError(f"alpha must be a finite value >= 0, got {alpha!r}")
    return float(alpha)


def check_significance(significance):
    """Significance thresholds live in the open interval (0, 1)."""
    if not isinstance(significance, numbers.Real) or isinstance(significance, bool):
        raise TypeError("significance must be a real number")
    if not 0.0 < significance < 1.0:
        raise ValueError(f"significance must lie in (0, 1), got {significance!r}")
    return float(significance)


def check_count(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_share(value, name):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_graph(g, allow_empty=False):
    """Accept anything exposing the WeightedCountryGraph surface."""
    for attr in ("nodes", "weights", "neighbors"):
        if not hasattr(g, attr):
            raise TypeError(f"expected a weighted country graph, got {type(g).__name__}")
    if not allow_empty and not g.nodes:
        raise EmptyGraphError("graph has no nodes")
    return g


def check_node(g, node):
    if node not in g.index:
        raise GraphError(f"unknown country {node!r}")
    return node
