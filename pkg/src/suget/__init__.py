"""Gene-tree supertrees and correction by duplication+loss reconciliation."""

from .consistency import Consistent, Inconsistent, TripletConstraint, check_consistency, \
    extract_triplets
from .errors import *  # noqa: F401,F403
from .newick import RawNode, RawTree, parse_newick, read_newick_file, serialize_newick
from .reconciliation import lca_reconcile, local_cost, reconciliation_cost
from .supertree import Bipartition, Placement, Solution, enumerate_bipartitions, find_core, \
    min_lsgt, min_sgt, min_sgt_core
from .trees import EventLabel, GeneTree, GeneTreeBuilder, SpeciesTree, displays, \
    highest_duplications, restrict
from .triplet import CorrectionReport, SubtreeDecomposition, correct, cost_tr_graft, \
    decompose_at_highest_speciations, min_ltrs, min_trs, triplet_respecting

__version__ = "0.1.0"
