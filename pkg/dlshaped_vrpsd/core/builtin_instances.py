"""
Small instances shipped with the package, stored as native JSON documents.
"""

from typing import Any, Dict, List

from .errors import InstanceFormatError
from .instance import Instance, parse_instance

# Three customers on a path-like layout with Poisson demands. Q=20 and one
# vehicle. OR recourse of (1,3) is far above that of (1,2,3): serving the
# light customer 2 in between gives a cheap restocking opportunity.
# Demands are conditioned on not exceeding Q, so no customer fails alone.
NON_MONOTONE: Dict[str, Any] = {
    "name": "non-monotone",
    "n": 3,
    "distance": [
        [0, 12, 2, 12],
        [12, 0, 10, 8],
        [2, 10, 0, 10],
        [12, 8, 10, 0],
    ],
    "Q": 20,
    "f": 1.0,
    "M": [1],
    "bF": 0.0,
    "bP": 0.0,
    "demands": [
        {"type": "poisson", "lambda": 9, "cap": 20},
        {"type": "poisson", "lambda": 1, "cap": 20},
        {"type": "poisson", "lambda": 9, "cap": 20},
    ],
}

# Four Bernoulli(0.5) customers on a unit square around the depot (all depot
# legs 1, sides 1, diagonals 2), Q=3, one vehicle. Every path over the four
# customers that uses a diagonal restocks for free, so L(N,1)=0 and no S-cut
# is informative; the optimal ring routes cost 5 + 1/8.
VANISHING_S_CUTS: Dict[str, Any] = {
    "name": "vanishing-s-cuts",
    "n": 4,
    "distance": [
        [0, 1, 1, 1, 1],
        [1, 0, 1, 2, 1],
        [1, 1, 0, 1, 2],
        [1, 2, 1, 0, 1],
        [1, 1, 2, 1, 0],
    ],
    "Q": 3,
    "f": 1.0,
    "M": [1],
    "bF": 0.0,
    "bP": 0.0,
    "demands": [{"type": "discrete", "support": [0, 1], "mass": [0.5, 0.5]} for _ in range(4)],
}


def _star_distances(depot_legs: List[float]) -> List[List[float]]:
    """c_0i as given, c_ij = c_0i + c_0j between customers."""
    legs = [0.0] + list(depot_legs)
    size = len(legs)
    return [[0.0 if a == b else (legs[a] if b == 0 else legs[b] if a == 0 else legs[a] + legs[b])
             for b in range(size)] for a in range(size)]


# Eight Bernoulli(0.9) customers, Q=3, b^F=0, failure costs 2 at customers
# 1, 4, 5, 8 and 0 elsewhere. The route (1,...,8) dominates every one of its
# subsequences under DTD, yet its halves (1,2,3,4) and (5,6,7,8) sum to more.
OVERESTIMATION: Dict[str, Any] = {
    "name": "overestimation",
    "n": 8,
    "distance": _star_distances([1, 0, 0, 1, 1, 0, 0, 1]),
    "Q": 3,
    "f": "auto",
    "M": "auto",
    "bF": 0.0,
    "bP": 0.0,
    "demands": [{"type": "discrete", "support": [0, 1], "mass": [0.1, 0.9]} for _ in range(8)],
}

SINGLE_CUSTOMER: Dict[str, Any] = {
    "name": "single-customer",
    "n": 1,
    "distance": [[0, 1], [1, 0]],
    "Q": 1,
    "f": 1.0,
    "M": [1],
    "demands": [{"type": "deterministic", "value": 1}],
}

BUILTIN_INSTANCES: Dict[str, Dict[str, Any]] = {
    doc["name"]: doc for doc in (NON_MONOTONE, VANISHING_S_CUTS, OVERESTIMATION, SINGLE_CUSTOMER)
}


# Short names used in example commands and scripts.
BUILTIN_ALIASES: Dict[str, str] = {
    "fig1": "non-monotone",
    "fig2": "vanishing-s-cuts",
    "thm4": "overestimation",
}


def builtin_names() -> List[str]:
    return sorted(BUILTIN_INSTANCES)


def resolve_builtin(name: str) -> str:
    """Canonical name of a built-in instance or of one of its aliases."""
    return BUILTIN_ALIASES.get(name, name)


def load_builtin(name: str) -> Instance:
    """Instance registered under name."""
    name = resolve_builtin(name)
    try:
        doc = BUILTIN_INSTANCES[name]
    except KeyError:
        raise InstanceFormatError(f"Unknown built-in instance {name!r}, expected one of {builtin_names()}") from None
    return parse_instance(doc, name=name)
