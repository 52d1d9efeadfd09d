"""Random Cayley graph girth toolkit.

Construct random Cayley graphs over symmetric groups, SL2/PGL2 over prime
fields and binary tree automorphism groups, compute their girth exactly as
the shortest nontrivial relation, estimate word-map return probabilities,
and simulate the crossover model that governs girth in the tree case.
"""

from .girth import (
    GeneratorTuple,
    GirthMemoryError,
    GirthResult,
    girth,
    girth_oracle,
    moore_bound,
    power_upper_bound,
)
from .groups import (
    GroupContext,
    PGL2Context,
    SL2Context,
    SymmetricContext,
    WreathContext,
    make_context,
)
from .words import (
    cyclic_reduce,
    enumerate_cyclically_reduced,
    enumerate_reduced,
    evaluate,
    format_word,
    free_reduce,
    parse_word,
    random_reduced_word,
)

__version__ = "0.1.0"

__all__ = [
    "GeneratorTuple",
    "GirthMemoryError",
    "GirthResult",
    "GroupContext",
    "PGL2Context",
    "SL2Context",
    "SymmetricContext",
    "WreathContext",
    "cyclic_reduce",
    "enumerate_cyclically_reduced",
    "enumerate_reduced",
    "evaluate",
    "format_word",
    "free_reduce",
    "girth",
    "girth_oracle",
    "make_context",
    "moore_bound",
    "parse_word",
    "power_upper_bound",
    "random_reduced_word",
]
