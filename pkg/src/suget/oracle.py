"""
Brute-force references for the solvers.

Everything here is deliberately naive: topologies are enumerated by
inserting leaves one at a time on every edge (and above the root), species
LCAs come from walking parent pointers, and losses are counted by walking
each gene-tree edge through the species tree. None of it shares code with
the dynamic programs it is meant to check.
"""

from __future__ import annotations

import os
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import SharedGeneSpeciesMismatch, TooManyLeaves
from .trees import EventLabel, GeneTree, GeneTreeBuilder, SpeciesTree

DEFAULT_MAX_N = 8

Shape = Union[str, tuple]


def max_oracle_n() -> int:
    return int(os.environ.get("SUGET_MAX_ORACLE_N", DEFAULT_MAX_N))


def _check_size(n: int) -> None:
    cap = max_oracle_n()
    if n > cap:
        raise TooManyLeaves(f"oracle enumerates (2n-3)!! trees; refusing n={n} > {cap}")
    if n < 1:
        raise ValueError("need at least one leaf")


def enumerate_shapes(leaves: Sequence[str]) -> Iterator[Shape]:
    """Every rooted binary topology on ``leaves`` as nested 2-tuples."""
    _check_size(len(leaves))

    def insert(shape: Shape, leaf: str) -> Iterator[Shape]:
        yield (shape, leaf)
        if isinstance(shape, tuple):
            left, right = shape
            for sub in insert(left, leaf):
                yield (sub, right)
            for sub in insert(right, leaf):
                yield (left, sub)

    def grow(i: int, shape: Shape) -> Iterator[Shape]:
        if i == len(leaves):
            yield shape
            return
        for bigger in insert(shape, leaves[i]):
            yield from grow(i + 1, bigger)

    yield from grow(1, leaves[0])


def shape_to_tree(shape: Shape, species: Dict[str, str],
                  events: Optional[Dict[Shape, EventLabel]] = None,
                  species_tree: Optional[SpeciesTree] = None) -> GeneTree:
    builder = GeneTreeBuilder()

    def walk(node: Shape) -> int:
        if isinstance(node, tuple):
            left, right = walk(node[0]), walk(node[1])
            return builder.join(left, right, (events or {}).get(node))
        return builder.leaf(node, species.get(node))

    return builder.finish(walk(shape), species_tree)


def enumerate_topologies(leaves: Sequence[str], species: Optional[Dict[str, str]] = None
                         ) -> Iterator[GeneTree]:
    for shape in enumerate_shapes(list(leaves)):
        yield shape_to_tree(shape, species or {})


# ---------------------------------------------------------------------------
# Naive species-tree arithmetic
# ---------------------------------------------------------------------------

class _NaiveSpecies:
    def __init__(self, s: SpeciesTree):
        self.s = s
        self.chain: Dict[int, List[int]] = {}
        for node in range(len(s)):
            chain = [node]
            while s.parent[chain[-1]] != -1:
                chain.append(s.parent[chain[-1]])
            self.chain[node] = chain
        self._lca: Dict[Tuple[int, int], int] = {}

    def lca(self, a: int, b: int) -> int:
        key = (a, b)
        if key not in self._lca:
            ups = set(self.chain[b])
            self._lca[key] = next(x for x in self.chain[a] if x in ups)
        return self._lca[key]

    def between(self, top: int, bottom: int) -> int:
        """Species nodes strictly between ``top`` and its descendant ``bottom``."""
        chain = self.chain[bottom]
        return chain.index(top) - 1 if top != bottom else 0

    def edge_losses(self, parent_image: int, child_image: int, event: EventLabel) -> int:
        losses = self.between(parent_image, child_image)
        if event is EventLabel.DUP and parent_image != child_image:
            losses += 1
        return losses


def embedding_cost(g: GeneTree, s: SpeciesTree, use_labels: bool = False) -> Tuple[int, int]:
    """
    (duplications, losses) of ``g`` by explicit embedding into ``s``.

    Each internal node sits at the LCA of its leaves' species. Along a gene
    edge the lineage passes every species node between the two images and
    is lost on the branch it does not take; a duplication child that leaves
    the parent's species also loses the parent's other branch. With
    ``use_labels`` the tree's labels replace LCA events.
    """
    naive = _NaiveSpecies(s)
    image: Dict[int, int] = {}
    dups = losses = 0
    for node in g.postorder:
        kids = g.children[node]
        if not kids:
            image[node] = s.index[g.species[node]]
            continue
        a, b = image[kids[0]], image[kids[1]]
        here = naive.lca(a, b)
        image[node] = here
        event = g.events[node] if use_labels and g.events[node] is not None else None
        if event is None:
            event = EventLabel.SPEC if a != here and b != here else EventLabel.DUP
        elif event is EventLabel.SPEC and (a == here or b == here):
            raise ValueError(f"Spec label at node {node} is impossible")
        dups += event is EventLabel.DUP
        losses += naive.edge_losses(here, a, event) + naive.edge_losses(here, b, event)
    return dups, losses


# ---------------------------------------------------------------------------
# Exhaustive optimization
# ---------------------------------------------------------------------------

class _Candidate:
    """Flattened topology: per node mask, children, species image."""

    __slots__ = ("masks", "kids", "images", "internal")

    def __init__(self, shape: Shape, bit: Dict[str, int], leaf_image: Dict[str, int],
                 naive: Optional[_NaiveSpecies]):
        self.masks: List[int] = []
        self.kids: List[Optional[Tuple[int, int]]] = []
        self.images: List[int] = []
        self.internal: List[int] = []

        def walk(node: Shape) -> int:
            if isinstance(node, tuple):
                left, right = walk(node[0]), walk(node[1])
                self.masks.append(self.masks[left] | self.masks[right])
                self.kids.append((left, right))
                if naive is not None:
                    self.images.append(naive.lca(self.images[left], self.images[right]))
                self.internal.append(len(self.masks) - 1)
            else:
                self.masks.append(bit[node])
                self.kids.append(None)
                if naive is not None:
                    self.images.append(leaf_image[node])
            return len(self.masks) - 1

        walk(shape)

    def displays(self, leafset: int, clusters: frozenset) -> bool:
        return {m & leafset for m in self.masks} - {0} == clusters

    def lca_node(self, mask: int) -> int:
        for v in self.internal:
            if mask & ~self.masks[v]:
                continue
            a, b = self.kids[v]
            if mask & ~self.masks[a] and mask & ~self.masks[b]:
                return v
        raise AssertionError("mask not below any node")

    def respects(self, triplets: Sequence[Tuple[int, int]]) -> bool:
        for pair, out in triplets:
            if not any(m & pair == pair and not m & out for m in self.masks):
                return False
        return True


class _Problem:
    def __init__(self, trees: Sequence[GeneTree], s: Optional[SpeciesTree]):
        species: Dict[str, Optional[str]] = {}
        for tree in trees:
            for gene, sp in tree.gene_species().items():
                if species.setdefault(gene, sp) != sp:
                    raise SharedGeneSpeciesMismatch(f"gene {gene!r} has two species")
        self.species = species
        self.genes = sorted(species)
        self.bit = {g: 1 << i for i, g in enumerate(self.genes)}
        self.naive = _NaiveSpecies(s) if s is not None else None
        self.leaf_image = {g: s.index[sp] for g, sp in species.items()} if s is not None else {}
        self.shapes: List[Tuple[int, frozenset]] = []
        self.labels: List[Tuple[int, EventLabel]] = []
        for tree in trees:
            masks: Dict[int, int] = {}
            for node in tree.postorder:
                kids = tree.children[node]
                if kids:
                    masks[node] = masks[kids[0]] | masks[kids[1]]
                    if tree.events[node] is not None:
                        self.labels.append((masks[node], tree.events[node]))
                else:
                    masks[node] = self.bit[tree.labels[node]]
            self.shapes.append((masks[tree.root], frozenset(masks.values())))

    def candidate(self, shape: Shape) -> _Candidate:
        return _Candidate(shape, self.bit, self.leaf_image, self.naive)

    def cost(self, cand: _Candidate, use_labels: bool
             ) -> Optional[Tuple[int, Dict[int, EventLabel]]]:
        forced: Dict[int, EventLabel] = {}
        if use_labels:
            for mask, event in self.labels:
                v = cand.lca_node(mask)
                if forced.setdefault(v, event) is not event:
                    return None
        naive = self.naive
        total = 0
        chosen: Dict[int, EventLabel] = {}
        for v in cand.internal:
            a, b = cand.kids[v]
            here, ia, ib = cand.images[v], cand.images[a], cand.images[b]
            spec_ok = ia != here and ib != here
            options = []
            if forced.get(v) in (None, EventLabel.SPEC) and spec_ok:
                options.append(EventLabel.SPEC)
            if forced.get(v) in (None, EventLabel.DUP):
                options.append(EventLabel.DUP)
            if not options:
                return None
            best = None
            for event in options:
                c = (event is EventLabel.DUP) + naive.edge_losses(here, ia, event) \
                    + naive.edge_losses(here, ib, event)
                if best is None or c < best[0]:
                    best = (c, event)
            total += best[0]
            chosen[v] = best[1]
        return total, chosen


def _triplet_masks(decomposition, bit: Dict[str, int]) -> List[Tuple[int, int]]:
    init = decomposition.init
    groups = [sorted(init.leafset(r)) for r in decomposition.roots]
    out = []
    for ga, gb, gc in combinations(groups, 3):
        for a in ga:
            for b in gb:
                for c in gc:
                    outgroup = init.triplet_outgroup(a, b, c)
                    pair = [g for g in (a, b, c) if g != outgroup]
                    out.append((bit[pair[0]] | bit[pair[1]], bit[outgroup]))
    return out


class OracleSolution:
    """Result of ``brute_min``: cost, optimal tree, and how many were scanned."""

    def __init__(self, cost: int, tree: GeneTree, examined: int, feasible: int):
        self.cost = cost
        self.tree = tree
        self.examined = examined
        self.feasible = feasible

    def __repr__(self) -> str:
        return f"OracleSolution(cost={self.cost}, tree={self.tree.to_newick()})"


def brute_min(trees: Optional[Sequence[GeneTree]], s: SpeciesTree, labels: bool = False,
              triplets=None) -> Optional[OracleSolution]:
    """
    Minimum cost over all binary trees on the genes of ``trees`` that display
    every input; None when no tree qualifies.

    ``labels`` additionally imposes the input event labels; ``triplets`` (a
    SubtreeDecomposition) requires respecting its initial tree's triplets
    and, when ``trees`` is None, supplies the subtrees as inputs.
    """
    if trees is None:
        trees = triplets.subtrees()
    problem = _Problem(trees, s)
    _check_size(len(problem.genes))
    constraints = _triplet_masks(triplets, problem.bit) if triplets is not None else []
    best = None
    examined = feasible = 0
    for shape in enumerate_shapes(problem.genes):
        examined += 1
        cand = problem.candidate(shape)
        if not all(cand.displays(leafset, clusters) for leafset, clusters in problem.shapes):
            continue
        if constraints and not cand.respects(constraints):
            continue
        scored = problem.cost(cand, labels)
        if scored is None:
            continue
        feasible += 1
        if best is None or scored[0] < best[0]:
            best = (scored[0], shape, cand, scored[1])
    if best is None:
        return None
    cost, shape, cand, chosen = best
    events = _shape_events(shape, cand, chosen)
    tree = shape_to_tree(shape, problem.species, events, s)
    return OracleSolution(cost, tree, examined, feasible)


def _shape_events(shape: Shape, cand: _Candidate, chosen: Dict[int, EventLabel]):
    events = {}
    counter = [0]

    def walk(node: Shape) -> None:
        if isinstance(node, tuple):
            walk(node[0])
            walk(node[1])
        index = counter[0]
        counter[0] += 1
        if isinstance(node, tuple):
            events[node] = chosen[index]

    walk(shape)
    return events


def brute_consistent(trees: Sequence[GeneTree]) -> bool:
    """True iff some binary tree on the union of genes displays every input."""
    problem = _Problem(trees, None)
    for shape in enumerate_shapes(problem.genes):
        cand = problem.candidate(shape)
        if all(cand.displays(leafset, clusters) for leafset, clusters in problem.shapes):
            return True
    return False
