"""Neighbour-transitive codes in the symplectic generalised quadrangle W(3, q)."""

from .codegraph import (Code, classify, counting_check, distance_partition, incidence_graph,
                        min_distance)
from .constructions import (subgroup_partial_spread, hyperbolic_line_code, pair_code, regular_spread,
                            sharply_transitive_subgroups, spread_minus_line, w33_five_code)
from .field import FieldSpec, gf
from .geometry import build_w3, standard_gram, verify_gq_axioms
from .groupaction import (SemilinearMap, VertexPerm, automorphism_group, certify_nt, decide_nt,
                          find_duality, induce_permutation, local_nt_check, sp4_generators)
from .permgroup import PermGroup
from .search import SearchSpec, enumerate_codes, enumerate_nt_maximal, max_delta3_code

__version__ = "0.1.0"

__all__ = [
    "Code", "FieldSpec", "PermGroup", "SearchSpec", "SemilinearMap", "VertexPerm",
    "automorphism_group", "build_w3", "certify_nt", "classify", "subgroup_partial_spread",
    "counting_check", "decide_nt", "distance_partition", "enumerate_codes", "enumerate_nt_maximal",
    "find_duality", "gf", "hyperbolic_line_code", "incidence_graph", "induce_permutation",
    "local_nt_check", "max_delta3_code", "min_distance", "pair_code", "regular_spread",
    "sharply_transitive_subgroups", "sp4_generators", "spread_minus_line", "standard_gram",
    "verify_gq_axioms", "w33_five_code",
]
