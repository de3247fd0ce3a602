"""Consistency of rooted gene trees via BUILD, and rooted triplets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

from .errors import SharedGeneSpeciesMismatch
from .newick import RawNode, RawTree
from .trees import GeneTree, all_triples, restrict


@dataclass(frozen=True, order=True)
class TripletConstraint:
    """Rooted triplet ``(pair[0], pair[1] | outgroup)``."""

    pair: Tuple[str, str]
    outgroup: str

    @classmethod
    def of(cls, a: str, b: str, outgroup: str) -> "TripletConstraint":
        if len({a, b, outgroup}) != 3:
            raise ValueError("a triplet needs three distinct genes")
        return cls(tuple(sorted((a, b))), outgroup)

    @property
    def genes(self) -> FrozenSet[str]:
        return frozenset((*self.pair, self.outgroup))

    def __str__(self) -> str:
        return f"({self.pair[0]},{self.pair[1]})|{self.outgroup}"


@dataclass(frozen=True)
class Consistent:
    supertree: RawTree

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Inconsistent:
    """
    BUILD failed on ``component``. ``witness`` is the lexicographically
    smallest gene triple on which two input trees disagree, with those trees'
    indices and topologies; it is None when the conflict only arises from
    the combination of three or more trees.
    """

    component: FrozenSet[str]
    witness: Optional[Tuple[str, str, str]] = None
    trees: Optional[Tuple[int, int]] = None
    topologies: Optional[Tuple[TripletConstraint, TripletConstraint]] = None

    def __bool__(self) -> bool:
        return False

    def describe(self) -> str:
        if self.witness is None:
            genes = ",".join(sorted(self.component))
            return f"inconsistent: no supertree for genes {{{genes}}}"
        i, j = self.trees
        a, b = self.topologies
        return (f"inconsistent: triple {{{','.join(self.witness)}}} is {a} "
                f"in tree {i + 1} but {b} in tree {j + 1}")


ConsistencyResult = Union[Consistent, Inconsistent]


def check_shared_species(trees: Sequence[GeneTree]) -> Dict[str, Optional[str]]:
    """Gene -> species over all trees; shared genes must agree on species."""
    species: Dict[str, Optional[str]] = {}
    for i, tree in enumerate(trees):
        for gene, sp in tree.gene_species().items():
            if gene in species and species[gene] != sp:
                raise SharedGeneSpeciesMismatch(
                    f"gene {gene!r} has species {species[gene]!r} in one tree "
                    f"and {sp!r} in tree {i + 1}"
                )
            species[gene] = sp
    return species


def extract_triplets(tree: GeneTree) -> Set[TripletConstraint]:
    """All rooted triplets displayed by a binary gene tree."""
    out = set()
    for a, b, c in all_triples(tree.genes):
        outgroup = tree.triplet_outgroup(a, b, c)
        x, y = [g for g in (a, b, c) if g != outgroup]
        out.add(TripletConstraint.of(x, y, outgroup))
    return out


def _components(genes: FrozenSet[str], trees: List[GeneTree]) -> List[FrozenSet[str]]:
    parent = {g: g for g in genes}

    def find(g):
        while parent[g] != g:
            parent[g] = parent[parent[g]]
            g = parent[g]
        return g

    for tree in trees:
        for child in tree.children[tree.root]:
            members = list(tree.leafset(child))
            root = find(members[0])
            for g in members[1:]:
                other = find(g)
                if other != root:
                    parent[other] = root
    groups: Dict[str, Set[str]] = {}
    for g in sorted(genes):
        groups.setdefault(find(g), set()).add(g)
    return [frozenset(v) for v in groups.values()]


def _witness(component: FrozenSet[str], trees: Sequence[GeneTree]) -> Inconsistent:
    for triple in all_triples(component):
        seen: Dict[str, Tuple[int, TripletConstraint]] = {}
        for i, tree in enumerate(trees):
            if not set(triple) <= tree.gene_index.keys():
                continue
            out = tree.triplet_outgroup(*triple)
            topo = TripletConstraint.of(*[g for g in triple if g != out], out)
            for j, other in seen.values():
                if other != topo:
                    return Inconsistent(component, triple, (j, i), (other, topo))
            seen[out] = (i, topo)
    return Inconsistent(component)


def check_consistency(trees: Sequence[GeneTree]) -> ConsistencyResult:
    """
    Run BUILD on the input trees.

    Returns Consistent with a (possibly non-binary) supertree displaying all
    inputs, or Inconsistent with a diagnostic.
    """
    if not trees:
        raise ValueError("need at least one tree")
    check_shared_species(trees)

    nodes: List[RawNode] = [RawNode()]
    # (raw node index, gene set, trees restricted to it)
    work = [(0, frozenset().union(*(t.leafset(t.root) for t in trees)), list(trees))]
    species = {}
    for tree in trees:
        species.update(tree.gene_species())
    while work:
        index, genes, current = work.pop()
        if len(genes) == 1:
            (gene,) = genes
            nodes[index].label = gene
            if species.get(gene) is not None:
                nodes[index].annotations["S"] = species[gene]
            continue
        relevant = [t for t in current if len(t.gene_index) > 1]
        parts = _components(genes, relevant)
        if len(parts) == 1:
            return _witness(genes, trees)
        for part in sorted(parts, key=lambda p: min(p)):
            child = len(nodes)
            nodes.append(RawNode())
            nodes[index].children.append(child)
            sub = []
            for tree in relevant:
                keep = part & tree.gene_index.keys()
                if keep:
                    sub.append(restrict(tree, keep))
            work.append((child, part, sub))
    return Consistent(_preorder(RawTree(nodes=nodes, root=0)))


def _preorder(tree: RawTree) -> RawTree:
    order = []
    stack = [tree.root]
    while stack:
        x = stack.pop()
        order.append(x)
        stack.extend(reversed(tree.nodes[x].children))
    position = {x: i for i, x in enumerate(order)}
    nodes = [RawNode(tree.nodes[x].label, [position[c] for c in tree.nodes[x].children],
                     dict(tree.nodes[x].annotations)) for x in order]
    return RawTree(nodes=nodes, root=0)
