"""Seeded instance families shared by the oracle and acceptance tests."""

import random

from suget.reconciliation import lca_reconcile
from suget.simulate import gen_instance, perturb_labels, random_gene_tree, random_species_tree
from suget.triplet import SubtreeDecomposition, decompose_at_highest_speciations


def supertree_case(seed):
    """Consistent shattered instance: <= 7 genes, k in {2, 3}."""
    rng = random.Random(seed)
    inst = gen_instance(seed, rng.randint(2, 5), rng.randint(3, 7), rng.randint(2, 3), 0.4, 0.1)
    return inst.species, inst.inputs


def labeled_supertree_case(seed):
    """Same family with LCA labels, some Spec labels flipped to Dup."""
    s, trees = supertree_case(seed)
    rng = random.Random(seed + 10_000)
    return s, [perturb_labels(rng, t, 0.3) for t in trees]


def triplet_case(seed, perturb=False):
    """Random LCA-labeled initial tree on <= 7 genes cut at highest speciations."""
    rng = random.Random(seed)
    s = random_species_tree(rng, rng.randint(2, 4))
    init = lca_reconcile(random_gene_tree(rng, s, rng.randint(3, 7)), s)
    dec = decompose_at_highest_speciations(init)
    if perturb:
        # flipping Spec to Dup only touches nodes inside the subtrees
        dec = SubtreeDecomposition.from_roots(perturb_labels(rng, init, 0.3), dec.roots)
    return s, dec


_LABEL_CHARS = "abcXYZ019_-. '():;,[]"
_NOTE_CHARS = "abcXYZ019_-. ('=;,"


def random_raw_tree(rng, max_leaves=12):
    """Random multifurcating RawTree with awkward labels and NHX notes."""
    from suget.newick import RawNode, RawTree

    def text(chars, lo, hi):
        return "".join(rng.choice(chars) for _ in range(rng.randint(lo, hi)))

    def notes():
        out = {}
        for _ in range(rng.choice((0, 0, 1, 2))):
            key = text("abcSEv_019", 1, 3)
            out[key] = text(_NOTE_CHARS, 0, 4)
        return out

    n = rng.randint(1, max_leaves)
    labels = set()
    while len(labels) < n:
        labels.add(text(_LABEL_CHARS, 1, 5))
    pool = [RawNode(label, [], notes()) for label in sorted(labels)]
    rng.shuffle(pool)
    # pool items become subtrees; nodes are laid out in preorder at the end
    forest = [(node, []) for node in pool]
    while len(forest) > 1:
        width = rng.randint(2, min(3, len(forest)))
        picked = [forest.pop(rng.randrange(len(forest))) for _ in range(width)]
        label = text(_LABEL_CHARS, 0, 3) if rng.random() < 0.3 else ""
        forest.append((RawNode(label, [], notes()), picked))
    nodes = []

    def lay(item):
        node, kids = item
        index = len(nodes)
        nodes.append(RawNode(node.label, [], node.annotations))
        for kid in kids:
            nodes[index].children.append(lay(kid))
        return index

    lay(forest[0])
    return RawTree(nodes=nodes, root=0)
