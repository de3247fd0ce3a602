"""
Synthetic instances: random species trees, gene families evolved by a
discrete duplication-loss process, shattered supertree inputs and
perturbed trees for correction, plus caterpillar stress instances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .reconciliation import lca_reconcile
from .trees import EventLabel, GeneTree, GeneTreeBuilder, SpeciesTree, restrict

MAX_DUPS_PER_BRANCH = 3


def random_species_tree(rng: random.Random, n_species: int) -> SpeciesTree:
    """Random binary species tree on S1..Sn by repeated random joins."""
    if n_species < 1:
        raise ValueError("need at least one species")
    pool = [f"S{i + 1}" for i in range(n_species)]
    while len(pool) > 1:
        i, j = sorted(rng.sample(range(len(pool)), 2))
        right = pool.pop(j)
        left = pool.pop(i)
        pool.append(f"({left},{right})")
    return SpeciesTree.from_newick(pool[0] + ";")


def evolve(rng: random.Random, s: SpeciesTree, dup_rate: float, loss_rate: float) -> Optional[GeneTree]:
    """
    One gene family evolved down ``s``.

    Every lineage entering a species node may duplicate (each copy evolving
    independently below), is lost with probability ``loss_rate`` on every
    non-root branch, and speciates at internal species nodes. Returns None
    if every lineage was lost.
    """
    builder = GeneTreeBuilder()
    counter = [0]

    def lineage(node: int, at_root: bool) -> Optional[int]:
        if not at_root and rng.random() < loss_rate:
            return None
        copies = 1
        while copies <= MAX_DUPS_PER_BRANCH and rng.random() < dup_rate:
            copies += 1
        built = [x for x in (descend(node) for _ in range(copies)) if x is not None]
        return _join_all(builder, built, EventLabel.DUP)

    def descend(node: int) -> Optional[int]:
        kids = s.children[node]
        if not kids:
            counter[0] += 1
            name = s.labels[node]
            return builder.leaf(f"{name.lower()}_{counter[0]}", name)
        parts = [lineage(kid, False) for kid in kids]
        built = [x for x in parts if x is not None]
        return _join_all(builder, built, EventLabel.SPEC)

    root = lineage(s.root, True)
    if root is None:
        return None
    return builder.finish(root, s)


def _join_all(builder: GeneTreeBuilder, nodes: List[int], event: EventLabel) -> Optional[int]:
    if not nodes:
        return None
    out = nodes[0]
    for other in nodes[1:]:
        out = builder.join(out, other, event)
    return out


def random_gene_tree(rng: random.Random, s: SpeciesTree, n_genes: int) -> GeneTree:
    """Uniform-ish random topology with genes in random species."""
    species = [s.labels[x] for x in s.leaves()]
    builder = GeneTreeBuilder()
    pool = []
    for i in range(n_genes):
        sp = rng.choice(species)
        pool.append(builder.leaf(f"{sp.lower()}_{i + 1}", sp))
    while len(pool) > 1:
        i, j = sorted(rng.sample(range(len(pool)), 2))
        right = pool.pop(j)
        left = pool.pop(i)
        pool.append(builder.join(left, right))
    return builder.finish(pool[0], s)


def shatter(rng: random.Random, tree: GeneTree, k: int) -> List[GeneTree]:
    """
    ``k`` restrictions of ``tree`` whose leafsets cover every gene; every
    piece keeps at least two genes when the tree has them.
    """
    genes = sorted(tree.genes)
    if k <= 1 or len(genes) < 2:
        return [tree]
    buckets: List[set] = [set() for _ in range(k)]
    order = genes[:]
    rng.shuffle(order)
    for i, gene in enumerate(order):
        buckets[i % k].add(gene)
    for bucket in buckets:
        # overlap: each piece borrows a few genes from elsewhere
        extra = rng.randint(0, max(0, len(genes) // 2))
        bucket.update(rng.sample(genes, extra))
        while len(bucket) < 2:
            bucket.add(rng.choice(genes))
    return [restrict(tree, bucket) for bucket in buckets]


def nni(rng: random.Random, tree: GeneTree) -> GeneTree:
    """One random nearest-neighbour interchange (events cleared)."""
    candidates = [x for x in tree.internal_nodes()
                  if any(tree.children[c] for c in tree.children[x])]
    if not candidates:
        return tree.unlabeled()
    x = rng.choice(candidates)
    inner = rng.choice([c for c in tree.children[x] if tree.children[c]])
    outer = next(c for c in tree.children[x] if c != inner)
    moved = rng.choice(tree.children[inner])
    stay = next(c for c in tree.children[inner] if c != moved)
    children = [list(kids) for kids in tree.children]
    children[x] = [inner, moved]
    children[inner] = [stay, outer]
    return GeneTree(children, tree.labels, tree.root, tree.species, None, tree.species_tree)


def perturb_labels(rng: random.Random, tree: GeneTree, p: float = 0.3) -> GeneTree:
    """Flip some Spec labels to Dup; the result stays a valid labeling."""
    events = list(tree.events)
    for x in tree.internal_nodes():
        if events[x] is EventLabel.SPEC and rng.random() < p:
            events[x] = EventLabel.DUP
    return tree.with_events(events)


@dataclass
class Instance:
    species: SpeciesTree
    truth: GeneTree
    inputs: List[GeneTree]
    perturbed: GeneTree


def gen_instance(seed: int, n_species: int, n_genes: int, k: int,
                 dup_rate: float, loss_rate: float, moves: int = 2) -> Instance:
    """
    Deterministic instance for ``seed``.

    The true tree is evolved down a random species tree and, if it has more
    than ``n_genes`` leaves, restricted to a random subset of that size.
    ``inputs`` shatters it into ``k`` overlapping pieces (always
    consistent); ``perturbed`` applies ``moves`` random NNIs to it.
    """
    rng = random.Random(seed)
    s = random_species_tree(rng, n_species)
    truth = None
    while truth is None:
        truth = evolve(rng, s, dup_rate, loss_rate)
    if len(truth.genes) > n_genes:
        truth = restrict(truth, rng.sample(sorted(truth.genes), n_genes))
    truth = lca_reconcile(truth, s)
    inputs = [lca_reconcile(t, s) for t in shatter(rng, truth, k)]
    perturbed = truth.unlabeled()
    for _ in range(moves):
        perturbed = nni(rng, perturbed)
    return Instance(s, truth, inputs, lca_reconcile(perturbed, s))


def caterpillar_instance(n: int, pieces: int = 10) -> Tuple[GeneTree, SpeciesTree]:
    """
    Stress instance of roughly ``n`` leaves: a duplication backbone carrying
    ``pieces`` caterpillar speciation subtrees, closed by two cherries.
    """
    width = max(2, (n - 4) // pieces)
    names = [f"S{i + 1}" for i in range(width)]
    text = names[0]
    for name in names[1:]:
        text = f"({text},{name})"
    s = SpeciesTree.from_newick(text + ";")
    builder = GeneTreeBuilder()

    def piece(tag: str) -> int:
        node = builder.leaf(f"{tag}_1", names[0])
        for i, name in enumerate(names[1:], start=2):
            node = builder.join(node, builder.leaf(f"{tag}_{i}", name), EventLabel.SPEC)
        return node

    def cherry(tag: str) -> int:
        return builder.join(builder.leaf(f"{tag}_1", names[0]),
                            builder.leaf(f"{tag}_2", names[1]), EventLabel.SPEC)

    bottom = builder.join(cherry("b1"), cherry("b2"), EventLabel.DUP)
    for p in range(pieces):
        bottom = builder.join(piece(f"p{p + 1}"), bottom, EventLabel.DUP)
    return lca_reconcile(builder.finish(bottom, s), s), s
