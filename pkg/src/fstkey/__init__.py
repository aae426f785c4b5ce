"""fstkey: keyboard input decoding on weighted finite-state transducers."""

from fstkey.fst import (
    Arc,
    EPSILON,
    FstError,
    ONE,
    SymbolTable,
    WeightedFst,
    ZERO,
    arc_sort,
    compose,
    connect,
    shortest_path,
)

__all__ = [
    "Arc",
    "EPSILON",
    "FstError",
    "ONE",
    "SymbolTable",
    "WeightedFst",
    "ZERO",
    "arc_sort",
    "compose",
    "connect",
    "shortest_path",
]

__version__ = "0.1.0"
