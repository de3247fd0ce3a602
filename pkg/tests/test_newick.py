import random

import pytest
from hypothesis import given, settings, strategies as st

from families import random_raw_tree
from suget.errors import (DuplicateLeafLabel, EmptyLabelOnLeaf, NewickError, TrailingGarbage,
                          UnbalancedParens)
from suget.newick import (RawNode, RawTree, parse_newick, parse_newick_many, serialize_newick,
                          split_statements)

ANNOTATED = "((a[&&NHX:S=human],b[&&NHX:S=mouse])[&&NHX:Ev=Dup],c[&&NHX:S=rat]);"


def test_cherry():
    tree = parse_newick("(a,b);")
    assert tree.nodes[0].children == [1, 2]
    assert tree.leaf_labels() == ["a", "b"]


def test_three_leaves():
    tree = parse_newick("((a,b),c);")
    root = tree.nodes[tree.root]
    assert len(root.children) == 2
    inner, c = (tree.nodes[i] for i in root.children)
    assert [tree.nodes[i].label for i in inner.children] == ["a", "b"]
    assert c.label == "c" and not c.children


def test_annotated_structure():
    expected = RawTree([
        RawNode("", [1, 4]),
        RawNode("", [2, 3], {"Ev": "Dup"}),
        RawNode("a", [], {"S": "human"}),
        RawNode("b", [], {"S": "mouse"}),
        RawNode("c", [], {"S": "rat"}),
    ])
    assert parse_newick(ANNOTATED) == expected
    assert serialize_newick(expected) == ANNOTATED


@pytest.mark.parametrize("text", ["(a,b);", ANNOTATED, "((x,y)inner,z)top;", "a;"])
def test_round_trip_fixed(text):
    assert serialize_newick(parse_newick(text)) == text


def test_branch_lengths_and_comments_dropped():
    tree = parse_newick("((a:0.1,b:2e-3)[note]:1,c : 4) ;")
    assert serialize_newick(tree) == "((a,b),c);"


def test_quoted_labels():
    tree = parse_newick("('it''s (x)',b);")
    assert tree.leaf_labels() == ["it's (x)", "b"]
    assert serialize_newick(tree) == "('it''s (x)',b);"


@pytest.mark.parametrize("text, error", [
    ("((a,b),c;", UnbalancedParens),
    ("(a,b));", UnbalancedParens),
    ("(a,);", EmptyLabelOnLeaf),
    ("(a,a);", DuplicateLeafLabel),
    ("(a,b);x", TrailingGarbage),
    ("(a:x,b);", NewickError),
    ("(a,b)", NewickError),
    ("('a,b);", NewickError),
])
def test_errors(text, error):
    with pytest.raises(error):
        parse_newick(text)


def test_many_statements():
    text = "(a,b);\n('x;y',c[;]);\n"
    assert list(split_statements(text))[1].strip() == "('x;y',c[;]);"
    assert len(parse_newick_many(text)) == 2


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_normal_form_idempotent(seed):
    text = serialize_newick(random_raw_tree(random.Random(seed)))
    once = serialize_newick(parse_newick(text))
    assert once == text
    assert serialize_newick(parse_newick(once)) == once


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_structure_preserved(seed):
    tree = random_raw_tree(random.Random(seed))
    assert parse_newick(serialize_newick(tree)) == tree
