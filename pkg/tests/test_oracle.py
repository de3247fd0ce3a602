import pytest

from suget.errors import TooManyLeaves
from suget.oracle import brute_consistent, brute_min, embedding_cost, enumerate_topologies
from suget.reconciliation import lca_reconcile, reconciliation_cost
from suget.trees import GeneTree, SpeciesTree

S = SpeciesTree.from_newick("((h,m),(r,d));")


@pytest.mark.parametrize("n, count", [(1, 1), (2, 1), (3, 3), (4, 15), (5, 105), (6, 945)])
def test_topology_counts(n, count):
    leaves = [f"g{i}" for i in range(n)]
    trees = [t.to_newick(annotate=False) for t in enumerate_topologies(leaves)]
    assert len(trees) == count
    assert len({frozenset(GeneTree.from_newick(t, require_species=False).clusters())
                for t in trees}) == count


def test_deterministic_order():
    first = [t.to_newick() for t in enumerate_topologies("abcd")]
    assert first == [t.to_newick() for t in enumerate_topologies("abcd")]
    assert first[0] == "(((a,b),c),d);"


def test_cap(monkeypatch):
    with pytest.raises(TooManyLeaves):
        next(enumerate_topologies([f"g{i}" for i in range(9)]))
    monkeypatch.setenv("SUGET_MAX_ORACLE_N", "4")
    with pytest.raises(TooManyLeaves):
        next(enumerate_topologies("abcde"))


def test_single_tree_own_cost():
    g = GeneTree.from_newick("((a__h,b__r),(c__m,d__h));", S)
    assert brute_min([g], S).cost == reconciliation_cost(g, S).total


def test_inconsistent_pair_infeasible():
    trees = [GeneTree.from_newick("((a__h,b__r),c__d);", S),
             GeneTree.from_newick("((a__h,c__d),b__r);", S)]
    assert brute_min(trees, S) is None
    assert not brute_consistent(trees)


def test_labels_filter():
    g = lca_reconcile(GeneTree.from_newick("((a__h,b__m),c__r);", S), S)
    result = brute_min([g], S, labels=True)
    assert result.cost == reconciliation_cost(g, S).total
    assert result.feasible == 1


def test_embedding_simple():
    g = GeneTree.from_newick("((a__h,b__r),c__h);", S)
    # root Dup at the root of S with one child staying there: 1 dup, 1 + 1 losses
    # below: (h, r) is a speciation losing m and d
    assert embedding_cost(g, S) == (1, 4)
    assert reconciliation_cost(g, S).total == 5
