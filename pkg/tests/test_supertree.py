import random

import pytest
from hypothesis import given, settings, strategies as st

from families import labeled_supertree_case, supertree_case
from suget.errors import InconsistentInput, NoLabelCompatibleSolution, UnlabeledNode
from suget.oracle import brute_min
from suget.reconciliation import lca_reconcile, reconciliation_cost
from suget.supertree import (Placement, bipartition_bound, enumerate_bipartitions, find_core,
                             min_lsgt, min_sgt, min_sgt_core)
from suget.trees import EventLabel, GeneTree, SpeciesTree, displays

S = SpeciesTree.from_newick("((human,mouse),(rat,dog));")


def gene(text, s=S):
    return GeneTree.from_newick(text, s, require_species=False)


def plain(text):
    return GeneTree.from_newick(text, require_species=False)


def test_bound():
    assert [bipartition_bound(k) for k in (1, 2, 3)] == [1, 7, 31]


def test_seven_bipartitions_for_disjoint_pair():
    trees = [plain("(a,b);"), plain("((c,d),e);")]
    parts = list(enumerate_bipartitions(trees))
    assert len(parts) == 7
    assert len({(p.left, p.right) for p in parts}) == 7
    union = frozenset("abcde")
    for p in parts:
        assert p.left | p.right == union and not p.left & p.right
        assert p.left and p.right
        assert p.assignment[0] in (Placement.ALL_LEFT, Placement.SPLIT_LR)


def test_single_tree_one_bipartition():
    parts = list(enumerate_bipartitions([plain("((a,b),c);")]))
    assert [(sorted(p.left), sorted(p.right)) for p in parts] == [(["a", "b"], ["c"])]


def test_shared_leaves_filtered():
    # same genes, different topologies: only splits keeping shared genes together
    trees = [plain("((a,b),c);"), plain("(a,(b,c));")]
    parts = list(enumerate_bipartitions(trees))
    assert parts == []
    same = list(enumerate_bipartitions([plain("((a,b),c);"), plain("((b,a),c);")]))
    assert [(sorted(p.left), sorted(p.right)) for p in same] == [(["a", "b"], ["c"])]


def test_single_tree_is_its_own_supertree():
    g = lca_reconcile(gene("((a__human,b__rat),(c__mouse,d__human));"), S)
    sol = min_sgt([g], S)
    assert sol.cost == reconciliation_cost(g, S).total
    assert sol.tree.clusters() == g.clusters()


def test_same_single_leaf():
    sol = min_sgt([gene("a__human;"), gene("a__human;")], S)
    assert sol.cost == 0 and sol.tree.genes == ["a__human"]


def test_inconsistent():
    with pytest.raises(InconsistentInput):
        min_sgt([gene("((a__human,b__rat),c__dog);"), gene("((a__human,c__dog),b__rat);")], S)


def test_labeled_requires_labels():
    with pytest.raises(UnlabeledNode):
        min_lsgt([gene("(a__human,b__rat);")], S)


def test_labels_matching_lca_are_free():
    g = lca_reconcile(gene("((a__human,b__mouse),(c__rat,d__human));"), S)
    assert min_lsgt([g], S).cost == min_sgt([g], S).cost


def test_two_dup_cherries():
    trees = [lca_reconcile(gene("(a__human,b__human);"), S),
             lca_reconcile(gene("(c__human,d__human);"), S)]
    sol = min_lsgt(trees, S)
    assert sol.cost == brute_min(trees, S, labels=True).cost
    for t in trees:
        node = sol.tree.lca_of_genes(t.genes)
        assert sol.tree.events[node] is EventLabel.DUP


def test_label_conflict():
    # the same cherry is a speciation in one input and a duplication in the other
    spec = lca_reconcile(gene("(a__human,b__rat);"), S)
    dup = spec.with_events([EventLabel.DUP if e is not None else None for e in spec.events])
    with pytest.raises(NoLabelCompatibleSolution):
        min_lsgt([spec, dup], S)


def test_find_core():
    full = plain("((a,b),(c,d));")
    assert find_core([full]) == [0]
    disjoint = [plain("(a,b);"), plain("(c,d);"), plain("e;")]
    assert sorted(find_core(disjoint)) == [0, 1, 2]
    trees = [plain("((a,b),(c,d));"), plain("(d,e);"), plain("e;")]
    assert find_core(trees) == [0, 1]


def test_core_same_as_full_when_core_is_everything():
    trees = [gene("(a__human,b__rat);"), gene("(c__dog,d__mouse);")]
    full, core = min_sgt(trees, S), min_sgt_core(trees, S)
    assert (full.cost, full.tree.to_newick()) == (core.cost, core.tree.to_newick())
    assert full.stats["memo_size"] == core.stats["memo_size"]


def test_core_tests_fewer_bipartitions():
    big = lca_reconcile(gene("(((a__human,b__mouse),(c__rat,d__dog)),((e__human,f__rat),g__dog));"), S)
    tiny = [lca_reconcile(gene(t), S) for t in ("(a__human,b__mouse);", "(e__human,f__rat);",
                                                 "(c__rat,d__dog);")]
    full, core = min_sgt([big] + tiny, S), min_sgt_core([big] + tiny, S)
    assert core.cost == full.cost
    assert core.stats["k_driving"] == 1
    assert core.stats["options_examined"] < full.stats["options_examined"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_min_sgt_against_oracle(seed):
    s, trees = supertree_case(seed)
    sol = min_sgt(trees, s)
    assert sol.cost == brute_min(trees, s).cost
    assert sol.cost == reconciliation_cost(sol.tree, s).total
    assert all(displays(sol.tree, t) for t in trees)
    assert sol.stats["max_bipartitions"] <= bipartition_bound(len(trees))
    assert min_sgt_core(trees, s).cost == sol.cost


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_min_lsgt_against_oracle(seed):
    s, trees = labeled_supertree_case(seed)
    expected = brute_min(trees, s, labels=True)
    try:
        sol = min_lsgt(trees, s)
    except NoLabelCompatibleSolution:
        assert expected is None
        return
    assert sol.cost == expected.cost
    assert sol.cost >= min_sgt(trees, s).cost
    assert sol.cost == reconciliation_cost(sol.tree, s, use_labels=True).total
    assert min_lsgt(trees, s, core=True).cost == sol.cost
