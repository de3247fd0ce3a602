"""
Immutable rooted trees with constant-time LCA queries.

Nodes are integer indices into flat tuples (an arena); nothing is mutated
after construction, and every derived tree (restriction, mapping) is a new
object. LCA uses a sparse table over the Euler tour, so ``lca``,
``is_ancestor`` and ``inter`` are O(1) after O(n log n) preprocessing.
"""

from __future__ import annotations

from enum import Enum
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import (
    EmptyRestriction,
    LeafNotPresent,
    MissingSpecies,
    NodeNotInTree,
    NonBinaryInput,
    NotAncestor,
    UnknownSpecies,
)
from .newick import RawNode, RawTree, parse_newick


class EventLabel(str, Enum):
    DUP = "Dup"
    SPEC = "Spec"

    def __str__(self) -> str:
        return self.value


class RootedTree:
    """Topology plus LCA preprocessing; base of species and gene trees."""

    def __init__(self, children: Sequence[Sequence[int]], labels: Sequence[str], root: int):
        self.children: Tuple[Tuple[int, ...], ...] = tuple(tuple(c) for c in children)
        self.labels: Tuple[str, ...] = tuple(labels)
        self.root = root
        n = len(self.children)
        if not 0 <= root < n:
            raise NodeNotInTree(f"root {root} out of range")

        parent = [-1] * n
        depth = [0] * n
        preorder: List[int] = []
        stack = [root]
        while stack:
            node = stack.pop()
            preorder.append(node)
            for child in reversed(self.children[node]):
                if parent[child] != -1 or child == root:
                    raise ValueError("node has several parents")
                parent[child] = node
                depth[child] = depth[node] + 1
                stack.append(child)
        if len(preorder) != n:
            raise ValueError("arena contains nodes unreachable from the root")
        self.parent = tuple(parent)
        self.depth = tuple(depth)
        self.preorder = tuple(preorder)
        self.postorder = tuple(self._postorder())
        self._build_lca()

    def _postorder(self) -> List[int]:
        out: List[int] = []
        stack: List[Tuple[int, bool]] = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded or not self.children[node]:
                out.append(node)
                continue
            stack.append((node, True))
            for child in reversed(self.children[node]):
                stack.append((child, False))
        return out

    def _build_lca(self) -> None:
        n = len(self.children)
        tour: List[int] = []
        first = [0] * n
        last = [0] * n
        stack: List[Tuple[int, int]] = [(self.root, 0)]
        while stack:
            node, pos = stack.pop()
            if pos == 0:
                first[node] = len(tour)
            tour.append(node)
            last[node] = len(tour) - 1
            if pos < len(self.children[node]):
                stack.append((node, pos + 1))
                stack.append((self.children[node][pos], 0))
        self._first = first
        self._last = last
        self._tour = tour

        depth = self.depth
        # table[j][i]: shallowest node of tour[i : i + 2**j]
        table = [tour]
        span = 1
        while 2 * span <= len(tour):
            prev = table[-1]
            row = []
            for i in range(len(tour) - 2 * span + 1):
                a = prev[i]
                b = prev[i + span]
                row.append(a if depth[a] <= depth[b] else b)
            table.append(row)
            span *= 2
        self._table = table

    # -- basic queries ------------------------------------------------------

    def __len__(self) -> int:
        return len(self.children)

    def is_leaf(self, node: int) -> bool:
        return not self.children[node]

    def leaves(self) -> List[int]:
        return [x for x in self.preorder if not self.children[x]]

    def internal_nodes(self) -> List[int]:
        return [x for x in self.postorder if self.children[x]]

    def check_node(self, node: int) -> None:
        if not isinstance(node, int) or not 0 <= node < len(self.children):
            raise NodeNotInTree(f"node {node!r} is not in the tree")

    def lca2(self, a: int, b: int) -> int:
        i, j = self._first[a], self._first[b]
        if i > j:
            i, j = j, i
        level = (j - i + 1).bit_length() - 1
        row = self._table[level]
        x = row[i]
        y = row[j - (1 << level) + 1]
        return x if self.depth[x] <= self.depth[y] else y

    def lca(self, nodes: Iterable[int]) -> int:
        result = None
        for node in nodes:
            self.check_node(node)
            result = node if result is None else self.lca2(result, node)
        if result is None:
            raise ValueError("lca of an empty node set")
        return result

    def is_ancestor(self, x: int, y: int) -> bool:
        """True when x is y or a strict ancestor of y."""
        return self._first[x] <= self._first[y] <= self._last[x]

    def separated(self, x: int, y: int) -> bool:
        return not self.is_ancestor(x, y) and not self.is_ancestor(y, x)

    def inter(self, x: int, y: int) -> int:
        """Number of nodes strictly between ancestor ``x`` and ``y``."""
        if x == y:
            return 0
        if not self.is_ancestor(x, y):
            raise NotAncestor(f"{x} is not an ancestor of {y}")
        return self.depth[y] - self.depth[x] - 1

    def subtree_nodes(self, node: int) -> List[int]:
        out = []
        stack = [node]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(self.children[x]))
        return out

    def is_binary(self) -> bool:
        return all(len(c) in (0, 2) for c in self.children)


def lca(tree: RootedTree, nodes: Iterable[int]) -> int:
    return tree.lca(nodes)


def inter(tree: RootedTree, x: int, y: int) -> int:
    tree.check_node(x)
    tree.check_node(y)
    return tree.inter(x, y)


def _require_binary(raw: RawTree, what: str) -> None:
    for node in raw.nodes:
        if len(node.children) not in (0, 2):
            raise NonBinaryInput(
                f"{what} node {node.label or '<internal>'} has "
                f"{len(node.children)} children; trees must be binary"
            )


# ---------------------------------------------------------------------------
# Species trees
# ---------------------------------------------------------------------------

class SpeciesTree(RootedTree):
    """Rooted binary species tree; ``index`` maps species names to leaves."""

    def __init__(self, children, labels, root):
        super().__init__(children, labels, root)
        if not self.is_binary():
            raise NonBinaryInput("species tree must be binary")
        self.index: Dict[str, int] = {}
        for leaf in self.leaves():
            name = self.labels[leaf]
            if not name:
                raise MissingSpecies("species tree leaf without a name")
            if name in self.index:
                raise ValueError(f"species {name!r} appears twice")
            self.index[name] = leaf
        self._names: Dict[int, str] = {}

    @classmethod
    def from_raw(cls, raw: RawTree) -> "SpeciesTree":
        _require_binary(raw, "species tree")
        return cls([n.children for n in raw.nodes], [n.label for n in raw.nodes], raw.root)

    @classmethod
    def from_newick(cls, text: str) -> "SpeciesTree":
        return cls.from_raw(parse_newick(text))

    def leaf_names(self, node: int) -> List[str]:
        return sorted(self.labels[x] for x in self.subtree_nodes(node) if self.is_leaf(x))

    def name(self, node: int) -> str:
        """Label of ``node``, or its '+'-joined species when unlabeled."""
        if self.labels[node]:
            return self.labels[node]
        if node not in self._names:
            self._names[node] = "+".join(self.leaf_names(node))
        return self._names[node]

    def to_raw(self) -> RawTree:
        return _to_raw(self, lambda x: {})

    def __repr__(self) -> str:
        return f"SpeciesTree({self.to_raw()})"


# ---------------------------------------------------------------------------
# Gene trees
# ---------------------------------------------------------------------------

class GeneTree(RootedTree):
    """
    Rooted binary gene tree.

    Leaves carry a gene id (their label, unique in the tree) and a species
    name; internal nodes may carry an EventLabel. ``smap`` holds the
    species-tree image of every node once the tree has been mapped.
    """

    def __init__(
        self,
        children,
        labels,
        root: int,
        species: Sequence[Optional[str]],
        events: Optional[Sequence[Optional[EventLabel]]] = None,
        species_tree: Optional[SpeciesTree] = None,
    ):
        super().__init__(children, labels, root)
        if not self.is_binary():
            raise NonBinaryInput("gene tree must be binary")
        n = len(self.children)
        self.species: Tuple[Optional[str], ...] = tuple(species)
        self.events: Tuple[Optional[EventLabel], ...] = (
            tuple(events) if events is not None else (None,) * n
        )
        self.gene_index: Dict[str, int] = {}
        for leaf in self.leaves():
            gene = self.labels[leaf]
            if gene in self.gene_index:
                raise ValueError(f"gene {gene!r} appears twice in one tree")
            self.gene_index[gene] = leaf
            if self.events[leaf] is not None:
                raise ValueError("event labels are not allowed on leaves")
        self._leafsets: Optional[List[FrozenSet[str]]] = None
        self.species_tree: Optional[SpeciesTree] = None
        self.smap: Optional[Tuple[int, ...]] = None
        if species_tree is not None:
            self._map(species_tree)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_raw(cls, raw: RawTree, species_tree: Optional[SpeciesTree] = None,
                 require_species: bool = True) -> "GeneTree":
        """
        Interpret a parsed tree as a gene tree.

        A leaf's species is its ``S`` tag, else the text after the last
        ``__`` in its label. Internal ``Ev`` tags become event labels.
        """
        _require_binary(raw, "gene tree")
        species: List[Optional[str]] = []
        events: List[Optional[EventLabel]] = []
        for node in raw.nodes:
            if node.children:
                species.append(None)
                ev = node.annotations.get("Ev")
                events.append(EventLabel(ev) if ev is not None else None)
                continue
            events.append(None)
            sp = node.annotations.get("S")
            if sp is None and "__" in node.label:
                sp = node.label.rsplit("__", 1)[1] or None
            if sp is None and require_species:
                raise MissingSpecies(f"no species for gene {node.label!r}")
            species.append(sp)
        return cls(
            [n.children for n in raw.nodes],
            [n.label for n in raw.nodes],
            raw.root,
            species,
            events,
            species_tree=species_tree,
        )

    @classmethod
    def from_newick(cls, text: str, species_tree: Optional[SpeciesTree] = None,
                    require_species: bool = True) -> "GeneTree":
        return cls.from_raw(parse_newick(text), species_tree, require_species)

    def _map(self, species_tree: SpeciesTree) -> None:
        smap = [0] * len(self.children)
        for node in self.postorder:
            kids = self.children[node]
            if kids:
                smap[node] = species_tree.lca2(smap[kids[0]], smap[kids[1]])
            else:
                name = self.species[node]
                if name not in species_tree.index:
                    raise UnknownSpecies(
                        f"species {name!r} of gene {self.labels[node]!r} "
                        "is not in the species tree"
                    )
                smap[node] = species_tree.index[name]
        self.species_tree = species_tree
        self.smap = tuple(smap)

    def with_events(self, events: Sequence[Optional[EventLabel]]) -> "GeneTree":
        return GeneTree(self.children, self.labels, self.root, self.species,
                        events, self.species_tree)

    def unlabeled(self) -> "GeneTree":
        return self.with_events([None] * len(self))

    # -- queries ------------------------------------------------------------

    @property
    def genes(self) -> List[str]:
        return [self.labels[x] for x in self.leaves()]

    def gene_species(self) -> Dict[str, Optional[str]]:
        return {self.labels[x]: self.species[x] for x in self.leaves()}

    def leafset(self, node: int) -> FrozenSet[str]:
        if self._leafsets is None:
            sets: List[FrozenSet[str]] = [frozenset()] * len(self.children)
            for x in self.postorder:
                kids = self.children[x]
                if kids:
                    sets[x] = sets[kids[0]] | sets[kids[1]]
                else:
                    sets[x] = frozenset((self.labels[x],))
            self._leafsets = sets
        return self._leafsets[node]

    def clusters(self) -> Set[FrozenSet[str]]:
        return {self.leafset(x) for x in range(len(self))}

    def is_labeled(self) -> bool:
        return all(self.events[x] is not None for x in self.internal_nodes())

    def lca_of_genes(self, genes: Iterable[str]) -> int:
        nodes = []
        for gene in genes:
            if gene not in self.gene_index:
                raise LeafNotPresent(f"gene {gene!r} is not a leaf of the tree")
            nodes.append(self.gene_index[gene])
        return self.lca(nodes)

    def triplet_outgroup(self, a: str, b: str, c: str) -> str:
        """Return the gene of {a, b, c} that is outside the cherry."""
        ab = self.lca_of_genes((a, b))
        ac = self.lca_of_genes((a, c))
        bc = self.lca_of_genes((b, c))
        depth = self.depth
        best = max((depth[ab], c), (depth[ac], b), (depth[bc], a), key=lambda t: t[0])
        return best[1]

    def to_raw(self, annotate: bool = True) -> RawTree:
        def notes(x: int) -> Dict[str, str]:
            if not annotate:
                return {}
            if self.is_leaf(x):
                sp = self.species[x]
                return {"S": sp} if sp is not None else {}
            ev = self.events[x]
            return {"Ev": ev.value} if ev is not None else {}
        return _to_raw(self, notes)

    def to_newick(self, annotate: bool = True) -> str:
        return str(self.to_raw(annotate))

    def __repr__(self) -> str:
        return f"GeneTree({self.to_newick()})"


def _to_raw(tree: RootedTree, notes) -> RawTree:
    position = {node: i for i, node in enumerate(tree.preorder)}
    nodes = [
        RawNode(
            label=tree.labels[x],
            children=[position[c] for c in tree.children[x]],
            annotations=notes(x),
        )
        for x in tree.preorder
    ]
    return RawTree(nodes=nodes, root=0)


class GeneTreeBuilder:
    """Accumulates nodes bottom-up and freezes them into a GeneTree."""

    def __init__(self) -> None:
        self.children: List[Tuple[int, ...]] = []
        self.labels: List[str] = []
        self.species: List[Optional[str]] = []
        self.events: List[Optional[EventLabel]] = []

    def leaf(self, gene: str, species: Optional[str]) -> int:
        self.children.append(())
        self.labels.append(gene)
        self.species.append(species)
        self.events.append(None)
        return len(self.children) - 1

    def join(self, left: int, right: int, event: Optional[EventLabel] = None,
             label: str = "") -> int:
        self.children.append((left, right))
        self.labels.append(label)
        self.species.append(None)
        self.events.append(event)
        return len(self.children) - 1

    def finish(self, root: int, species_tree: Optional[SpeciesTree] = None) -> GeneTree:
        return GeneTree(self.children, self.labels, root, self.species,
                        self.events, species_tree)


# ---------------------------------------------------------------------------
# Restriction and display
# ---------------------------------------------------------------------------

def map_to_species(gene_tree: GeneTree, species_tree: SpeciesTree) -> GeneTree:
    """Return a copy of ``gene_tree`` with the species mapping cached."""
    return GeneTree(gene_tree.children, gene_tree.labels, gene_tree.root,
                    gene_tree.species, gene_tree.events, species_tree)


def restrict(tree: GeneTree, leaves: Iterable[str]) -> GeneTree:
    """
    Restriction of ``tree`` to the genes in ``leaves``.

    Unary nodes left by the pruning are suppressed; surviving internal
    nodes keep their event labels and internal labels.
    """
    keep = set(leaves)
    if not keep:
        raise EmptyRestriction("cannot restrict a tree to no leaves")
    missing = keep - set(tree.gene_index)
    if missing:
        raise LeafNotPresent(f"genes not in tree: {sorted(missing)}")

    builder = GeneTreeBuilder()
    image: Dict[int, Optional[int]] = {}
    for node in tree.postorder:
        kids = tree.children[node]
        if not kids:
            gene = tree.labels[node]
            image[node] = builder.leaf(gene, tree.species[node]) if gene in keep else None
            continue
        left, right = image[kids[0]], image[kids[1]]
        if left is not None and right is not None:
            image[node] = builder.join(left, right, tree.events[node], tree.labels[node])
        else:
            image[node] = left if left is not None else right
    root = image[tree.root]
    assert root is not None
    return builder.finish(root, tree.species_tree)


def subtree(tree: GeneTree, node: int) -> GeneTree:
    return restrict(tree, tree.leafset(node))


def displays(big: GeneTree, small: GeneTree) -> bool:
    """True iff ``big`` restricted to ``small``'s genes has its topology."""
    genes = small.leafset(small.root)
    if not genes <= set(big.gene_index):
        raise LeafNotPresent("small tree has genes absent from big tree")
    return restrict(big, genes).clusters() == small.clusters()


def highest_duplications(tree: GeneTree) -> int:
    """Duplication nodes all of whose strict ancestors are duplications."""
    count = 0
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if tree.events[node] is EventLabel.DUP:
            count += 1
            stack.extend(tree.children[node])
    return count


def all_triples(genes: Iterable[str]):
    return combinations(sorted(genes), 3)
