"""Train track maps and relative train track maps for free products.

Graphs of groups with trivial edge groups and finite vertex groups carry
topological representatives of outer automorphisms; this package computes
with them exactly: edge-path tightening, transition matrices with exact
Perron-Frobenius eigenvalues, the elementary moves (subdivision, folding,
twisting, collapsing, valence homotopies), the train track descent for
irreducible automorphisms, and the relative train track pipeline with its
checker.
"""

from .errors import *  # noqa: F401,F403
from .groups import GroupElement, GroupMap, GroupOracle, group_iso, iso_apply
from .paths import (EdgePath, GraphOfGroups, SubgraphOfGroups, concat_paths,
                    cyclic_tighten, fwd, graph_invariants,
                    is_collapsible_forest, loops_conjugate, rev,
                    reverse_path, tighten)
from .eigen import (AlgebraicReal, char_poly, matrix_is_aperiodic,
                    matrix_is_irreducible, pf_eigenvalue, poly_str)
from .rep import (GraphMap, TopRep, TransitionMatrix, Turn, apply_rep,
                  derivative, directions_at, is_train_track, is_turn_legal,
                  reps_isomorphic, transition_matrix, turns_taken,
                  verify_outer_class)
from .moves import (MoveReceipt, collapse, collapse_connecting_path,
                    find_max_invariant_forest, find_max_pretrivial_forest,
                    fold, fold_turn, invariant_core_subdivision, subdivide,
                    subdivide_multi, tighten_rep, twist, valence_one_homotopy,
                    valence_two_homotopy)
from .traintrack import (AutomorphismInput, build_thistle, find_reduction,
                         normalize, rep_from_automorphism,
                         train_track_algorithm, word_to_loop)
from .rtt import (Filtration, Stratum, bounded_check, check_rtt,
                  maximal_filtration, pf_compare, pf_sequence,
                  relative_train_track_algorithm)

__version__ = "0.1.0"
