"""Symmetric circuits over structured bases.

Construction, evaluation, normalization, and symmetry analysis of
circuits whose gates compute structured Boolean functions, including
rank gates over finite fields.
"""

from .core import (
    Circuit,
    ConstantGate,
    Gate,
    IndexElement,
    InternalGate,
    RelationalGate,
    SortedUniverse,
    StructuredFunction,
    SymcircError,
    TooLarge,
    Vocabulary,
    index_of,
    rank_fn,
    remove_redundant,
    structural_metrics,
    sym_fn,
    validate,
)
from .evaluation import (
    BitMatrix,
    RhoStructure,
    apply_function,
    decide_invariant,
    evaluate,
    evaluate_gates,
    rank_mod_p,
    semantic_gate_equal,
)
from .equivalence import (
    EquivalenceClasses,
    NotTransparent,
    index_iso_check,
    quotient,
    syntactic_classes,
)
from .gireduce import (
    BipartiteGraph,
    bipartite_iso,
    gen_symmetry_instance,
    gen_syntactic_instance,
    gen_unique_children_instance,
    gen_unique_labels_instance,
)
from .majcompile import SymmetricSpec, compile_symmetric, lower_to_majority
from .normalize import has_unique_labels, is_transparent, to_unique_labels
from .partitions import Partition, SupportInfo, canonical_support, join
from .rankeval import (
    EvSet,
    SupportAssignment,
    build_rank_matrix,
    compatible,
    combine,
    ev_set,
    rank_gate_from_supports,
    shift_vector,
)
from .serialize import parse_circuit, serialize_circuit
from .symmetry import (
    GateMap,
    Permutation,
    element_action,
    extend_permutation,
    gate_orbits,
    is_symmetric,
    orbit_and_sp,
    parse_permutation,
    universe_orbits,
)

__all__ = [name for name in dir() if not name.startswith("_")]
