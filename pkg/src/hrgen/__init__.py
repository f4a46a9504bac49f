"""Hyperedge replacement grammars learned from clique trees, with exact,
stochastic and size-constrained graph generation and comparison metrics."""

from .baselines import (DegreeModel, DegreeSequence, chung_lu_generate, fit_degree_model,
                        sample_degree_sequence)
from .cliquetree import CliqueTree, clique_tree, mcs_order, triangulate, validate_clique_tree
from .estimators import HRG, ChungLu, GraphletCorrelation, check_graph
from .generate import (NoDerivationError, SizeTable, exact_generate,
                       size_constrained_generate, stochastic_generate)
from .grammar import (DerivationTrace, Grammar, Production, canonical_signature,
                      extract_grammar, merge_grammars)
from .graph import Hypergraph, SampleSpec, bfs_sample, load_edge_list, write_edge_list
from .metrics import (centrality_cosine_distance, degree_distribution, eigenvector_centrality,
                      gcd, hop_plot, orbit_counts)

__version__ = "0.1.0"
