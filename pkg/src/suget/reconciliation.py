"""
LCA-reconciliation and duplication+loss cost.

The cost of a gene tree is a sum of per-node local costs computed from the
species images of a node and its two children. With ``L`` the image of
the node and ``Ll``, ``Lr`` those of its children:

* Spec (L differs from both):        inter(L, Ll) + inter(L, Lr)
* Dup, both children at L:           1 + inter(L, Ll) + inter(L, Lr)
* Dup, exactly one child at L:       2 + inter(L, Ll) + inter(L, Lr)
* forced Dup on a Spec-shaped node:  3 + inter(L, Ll) + inter(L, Lr)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import InvalidLabeling, InvalidLcaTriple
from .trees import EventLabel, GeneTree, SpeciesTree, map_to_species

DUP = EventLabel.DUP
SPEC = EventLabel.SPEC


def local_cost(s: SpeciesTree, image: int, left: int, right: int) -> Tuple[int, EventLabel]:
    """Local LCA-reconciliation cost and event of a node with the given images."""
    if s.lca2(left, right) != image:
        raise InvalidLcaTriple(f"{image} is not the lca of {left} and {right}")
    extra = s.inter(image, left) + s.inter(image, right)
    if image != left and image != right:
        return extra, SPEC
    if image == left and image == right:
        return 1 + extra, DUP
    return 2 + extra, DUP


def labeled_local_cost(s: SpeciesTree, image: int, left: int, right: int,
                       forced: Optional[EventLabel]) -> int:
    """
    Local cost of a node whose event may be imposed by the input trees.

    A Dup forced onto a node whose children fall in distinct child
    lineages of ``image`` costs one duplication and two extra losses.
    Every other case is the plain LCA local cost; whether a forced Spec is
    admissible at all is decided by ``spec_allowed``.
    """
    cost, event = local_cost(s, image, left, right)
    if forced is DUP and event is SPEC:
        return 3 + cost
    return cost


def spec_allowed(image: int, left: int, right: int) -> bool:
    return image != left and image != right


def forced_cost(s: SpeciesTree, image: int, left: int, right: int,
                forced: Optional[EventLabel]) -> Optional[int]:
    """``labeled_local_cost``, or None when a forced Spec is impossible."""
    if forced is SPEC and not spec_allowed(image, left, right):
        return None
    return labeled_local_cost(s, image, left, right, forced)


@dataclass(frozen=True)
class NodeReport:
    node: int
    event: EventLabel
    species: int
    cost: int


@dataclass(frozen=True)
class ReconciliationReport:
    duplications: int
    losses: int
    nodes: Tuple[NodeReport, ...]

    @property
    def total(self) -> int:
        return self.duplications + self.losses

    def cost_line(self) -> str:
        return f"cost={self.duplications}+{self.losses}={self.total}"


def _mapped(g: GeneTree, s: SpeciesTree) -> GeneTree:
    if g.species_tree is s and g.smap is not None:
        return g
    return map_to_species(g, s)


def lca_reconcile(g: GeneTree, s: SpeciesTree) -> GeneTree:
    """Label every internal node Spec iff its children's images are separated."""
    g = _mapped(g, s)
    smap = g.smap
    events: List[Optional[EventLabel]] = [None] * len(g)
    for node in g.internal_nodes():
        left, right = g.children[node]
        events[node] = SPEC if s.separated(smap[left], smap[right]) else DUP
    return g.with_events(events)


def reconciliation_cost(g: GeneTree, s: SpeciesTree,
                        use_labels: bool = False) -> ReconciliationReport:
    """
    Duplication and loss counts of ``g`` against ``s``.

    With ``use_labels`` the tree's own event labels are imposed (unlabeled
    nodes fall back to the LCA event); a Spec label on a node whose
    children are not separated raises InvalidLabeling.
    """
    g = _mapped(g, s)
    smap = g.smap
    dups = 0
    total = 0
    rows = []
    for node in g.internal_nodes():
        left, right = g.children[node]
        image, li, ri = smap[node], smap[left], smap[right]
        forced = g.events[node] if use_labels else None
        cost = forced_cost(s, image, li, ri, forced)
        if cost is None:
            raise InvalidLabeling(
                f"node {node} is labeled Spec but its children are not separated"
            )
        _, event = local_cost(s, image, li, ri)
        if forced is not None:
            event = forced
        dups += event is DUP
        total += cost
        rows.append(NodeReport(node, event, image, cost))
    return ReconciliationReport(dups, total - dups, tuple(rows))
