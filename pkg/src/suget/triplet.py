"""
Triplet-respecting correction of a gene tree.

A gene tree ``init`` is cut into separated subtrees. The corrected tree must
display every subtree and keep, for genes taken from three different
subtrees, the rooted topology ``init`` gives them. Working top-down over
nodes of ``init`` above the cut:

* a node whose two children are subtrees: best supertree of the pair;
* a node with one subtree child (the host) and a composite sibling: the
  sibling's solution is grafted onto an edge of the host, every edge tried;
* a node with two composite children: both solved independently.

Graft costs are accumulated along the host's root paths, so each host is
scanned once and the whole solve is quadratic in the tree size.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    DegenerateDecomposition,
    GraftNodeOutsideHost,
    NoLabelCompatibleSolution,
    UnlabeledNode,
)
from .reconciliation import (
    DUP,
    forced_cost,
    lca_reconcile,
    local_cost,
    reconciliation_cost,
)
from .supertree import Solution, _raise_recursion_limit, min_lsgt, min_sgt
from .trees import (
    EventLabel,
    GeneTree,
    GeneTreeBuilder,
    SpeciesTree,
    highest_duplications,
    map_to_species,
    subtree,
)


@dataclass(frozen=True)
class SubtreeDecomposition:
    """Separated subtrees of ``init`` (given by their roots) covering its leaves."""

    init: GeneTree
    roots: Tuple[int, ...]
    counts: Tuple[int, ...] = field(repr=False, default=())

    @classmethod
    def from_roots(cls, init: GeneTree, roots: Sequence[int]) -> "SubtreeDecomposition":
        roots = tuple(sorted(set(roots), key=init.preorder.index))
        marked = set(roots)
        for r in roots:
            init.check_node(r)
        counts = [0] * len(init)
        uncovered: Dict[int, str] = {}
        for node in init.postorder:
            kids = init.children[node]
            below = sum(counts[c] for c in kids)
            if node in marked:
                if below:
                    raise DegenerateDecomposition(
                        f"subtree roots {node} and a descendant are not separated"
                    )
                counts[node] = 1
                continue
            counts[node] = below
            missing = [uncovered[c] for c in kids if c in uncovered]
            if not kids:
                uncovered[node] = init.labels[node]
            elif missing:
                uncovered[node] = missing[0]
        if init.root in uncovered:
            raise DegenerateDecomposition(
                f"gene {uncovered[init.root]!r} is not covered by any subtree"
            )
        return cls(init, roots, tuple(counts))

    @property
    def k(self) -> int:
        return len(self.roots)

    def subtrees(self) -> List[GeneTree]:
        return [subtree(self.init, r) for r in self.roots]

    def owner(self) -> Dict[str, int]:
        """Gene -> index of the subtree containing it."""
        out = {}
        for i, r in enumerate(self.roots):
            for gene in self.init.leafset(r):
                out[gene] = i
        return out


def decompose_at_highest_speciations(g: GeneTree) -> SubtreeDecomposition:
    """Cut ``g`` at its topmost Spec nodes (and leaves) under a Dup-only path."""
    roots = []
    stack = [g.root]
    while stack:
        node = stack.pop()
        if g.is_leaf(node):
            roots.append(node)
            continue
        event = g.events[node]
        if event is None:
            raise UnlabeledNode(f"node {node} has no event label")
        if event is DUP:
            stack.extend(reversed(g.children[node]))
        else:
            roots.append(node)
    return SubtreeDecomposition.from_roots(g, roots)


def triplet_respecting(candidate: GeneTree, decomposition: SubtreeDecomposition) -> bool:
    """Same rooted topology as ``init`` on every triple spanning three subtrees."""
    init = decomposition.init
    groups = [sorted(init.leafset(r)) for r in decomposition.roots]
    for ga, gb, gc in combinations(groups, 3):
        for a in ga:
            for b in gb:
                for c in gc:
                    if candidate.triplet_outgroup(a, b, c) != init.triplet_outgroup(a, b, c):
                        return False
    return True


# ---------------------------------------------------------------------------
# Graft costs
# ---------------------------------------------------------------------------

def _path_to(init: GeneTree, host: int, graft: int) -> List[int]:
    """Strict ancestors of ``graft`` inside the subtree at ``host``, top-down."""
    path = []
    node = graft
    while node != host:
        node = init.parent[node]
        if node == -1:
            raise GraftNodeOutsideHost(f"node {graft} is not below host {host}")
        path.append(node)
    path.reverse()
    return path


def cost_tr_graft(init: GeneTree, host: int, grafted: int, graft: int,
                  s: SpeciesTree, labeled: bool = False) -> Optional[int]:
    """
    Cost of the host's nodes plus the new node after grafting ``grafted``'s
    genes as sibling of ``graft`` (a node of the host subtree).

    Host nodes on the path above ``graft`` gain the grafted genes on the side
    leading to ``graft``; other host nodes are unchanged; the new node joins
    ``graft`` and the grafted set. With ``labeled`` every host node keeps its
    event label and None is returned when a Spec label becomes impossible.
    """
    if init.smap is None or init.species_tree is not s:
        init = map_to_species(init, s)
    init.check_node(graft)
    ancestors = _path_to(init, host, graft) if graft != host else []
    on_path = set(ancestors)
    smap = init.smap
    extra = smap[grafted]
    total = 0
    for u in init.subtree_nodes(host):
        kids = init.children[u]
        if not kids:
            continue
        a, b = kids
        la, lb = smap[a], smap[b]
        image = smap[u]
        if u in on_path:
            if init.is_ancestor(a, graft):
                la = s.lca2(la, extra)
            else:
                lb = s.lca2(lb, extra)
            image = s.lca2(image, extra)
        forced = init.events[u] if labeled else None
        cost = forced_cost(s, image, la, lb, forced)
        if cost is None:
            return None
        total += cost
    total += local_cost(s, s.lca2(smap[graft], extra), smap[graft], extra)[0]
    return total


def _best_graft(init: GeneTree, host: int, extra: int, s: SpeciesTree,
                labeled: bool) -> Optional[Tuple[int, int]]:
    """
    (cost, graft node) minimizing ``cost_tr_graft`` over the host subtree.

    Ties go to the deepest graft node, then to the first in pre-order.
    """
    smap = init.smap
    events = init.events
    children = init.children

    def plain(u):
        a, b = children[u]
        return forced_cost(s, smap[u], smap[a], smap[b], events[u] if labeled else None)

    base_sum = 0
    base_bad = 0
    for u in init.subtree_nodes(host):
        if children[u]:
            c = plain(u)
            if c is None:
                base_bad += 1
            else:
                base_sum += c

    best: Optional[Tuple[int, int, int]] = None   # (cost, -depth, node)
    # (node, strict-ancestor sums: plain, plain-infeasible, grafted, grafted-infeasible)
    stack = [(host, 0, 0, 0, 0)]
    while stack:
        node, sum0, bad0, sum1, bad1 = stack.pop()
        if bad1 == 0 and base_bad == bad0:
            image = s.lca2(smap[node], extra)
            total = base_sum - sum0 + sum1 + local_cost(s, image, smap[node], extra)[0]
            rank = (total, -init.depth[node])
            if best is None or rank < best[:2]:
                best = (total, -init.depth[node], node)
        kids = children[node]
        if not kids:
            continue
        c0 = plain(node)
        image = s.lca2(smap[node], extra)
        forced = events[node] if labeled else None
        a, b = kids
        down = []
        for child, la, lb in ((a, s.lca2(smap[a], extra), smap[b]),
                              (b, smap[a], s.lca2(smap[b], extra))):
            c1 = forced_cost(s, image, la, lb, forced)
            down.append((
                child,
                sum0 + (c0 or 0), bad0 + (c0 is None),
                sum1 + (c1 or 0), bad1 + (c1 is None),
            ))
        stack.append(down[1])
        stack.append(down[0])
    if best is None:
        return None
    return best[0], best[2]


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

class _TripletSolver:
    def __init__(self, decomposition: SubtreeDecomposition, s: SpeciesTree, labeled: bool):
        init = decomposition.init
        if init.smap is None or init.species_tree is not s:
            init = map_to_species(init, s)
        self.init = init
        self.counts = decomposition.counts
        self.roots = set(decomposition.roots)
        self.s = s
        self.labeled = labeled
        # node -> ("pair", Solution) | ("graft", host, graft node) | ("join",)
        self.plan: Dict[int, tuple] = {}
        self.contributions: Dict[int, int] = {}
        self.grafts_scanned = 0

    def solve(self, x: int) -> Optional[int]:
        init, counts, s = self.init, self.counts, self.s
        left, right = init.children[x]
        if counts[x] == 2:
            pair = [subtree(init, left), subtree(init, right)]
            try:
                sol = (min_lsgt if self.labeled else min_sgt)(pair, s)
            except NoLabelCompatibleSolution:
                return None
            self.plan[x] = ("pair", sol)
            self.contributions[x] = sol.cost
            return sol.cost

        if counts[left] == 1 or counts[right] == 1:
            host, other = (left, right) if counts[left] == 1 else (right, left)
            rest = self.solve(other)
            if rest is None:
                return None
            self.grafts_scanned += len(init.subtree_nodes(host))
            found = _best_graft(init, host, init.smap[other], s, self.labeled)
            if found is None:
                return None
            cost, node = found
            self.plan[x] = ("graft", host, node)
            self.contributions[x] = cost
            return cost + rest

        a = self.solve(left)
        if a is None:
            return None
        b = self.solve(right)
        if b is None:
            return None
        local = local_cost(s, init.smap[x], init.smap[left], init.smap[right])[0]
        self.plan[x] = ("join",)
        self.contributions[x] = local
        return local + a + b

    def build(self) -> GeneTree:
        init = self.init
        builder = GeneTreeBuilder()

        def copy(node: int, graft_at: Optional[int] = None, graft_id: Optional[int] = None,
                 graft_first: bool = False) -> int:
            out: Dict[int, int] = {}
            for u in init.subtree_nodes(node)[::-1]:
                kids = init.children[u]
                if kids:
                    out[u] = builder.join(out[kids[0]], out[kids[1]], init.events[u])
                else:
                    out[u] = builder.leaf(init.labels[u], init.species[u])
                if u == graft_at:
                    pair = (graft_id, out[u]) if graft_first else (out[u], graft_id)
                    out[u] = builder.join(*pair)
            return out[node]

        def emit(x: int) -> int:
            step = self.plan.get(x)
            if step is None:
                return copy(x)
            if step[0] == "pair":
                sol = step[1].tree
                return _copy_tree(builder, sol, sol.root)
            if step[0] == "join":
                left, right = init.children[x]
                return builder.join(emit(left), emit(right))
            _, host, graft = step
            other = [c for c in init.children[x] if c != host][0]
            grafted = emit(other)
            return copy(host, graft, grafted, graft_first=init.children[x][0] == other)

        root = emit(init.root) if self.counts[init.root] >= 2 else copy(init.root)
        tree = builder.finish(root, self.s)
        return _finalize_events(tree, self.s, self.labeled)

    def v_cons(self) -> List[int]:
        return [x for x in range(len(self.init)) if self.counts[x] >= 2]


def _copy_tree(builder: GeneTreeBuilder, tree: GeneTree, node: int) -> int:
    out: Dict[int, int] = {}
    for u in tree.subtree_nodes(node)[::-1]:
        kids = tree.children[u]
        if kids:
            out[u] = builder.join(out[kids[0]], out[kids[1]], tree.events[u])
        else:
            out[u] = builder.leaf(tree.labels[u], tree.species[u])
    return out[node]


def _finalize_events(tree: GeneTree, s: SpeciesTree, labeled: bool) -> GeneTree:
    """LCA events everywhere, except labels carried over in labeled mode."""
    lca_tree = lca_reconcile(tree, s)
    if not labeled:
        return lca_tree
    events = [tree.events[x] if tree.events[x] is not None else lca_tree.events[x]
              for x in range(len(tree))]
    return tree.with_events(events)


def _solve(decomposition: SubtreeDecomposition, s: SpeciesTree, labeled: bool) -> Solution:
    started = time.perf_counter()
    init = decomposition.init
    if labeled:
        for r in decomposition.roots:
            for u in init.subtree_nodes(r):
                if init.children[u] and init.events[u] is None:
                    raise UnlabeledNode(f"node {u} of a subtree has no event label")
    _raise_recursion_limit(len(init))
    if decomposition.k < 2:
        tree = init if labeled else lca_reconcile(init, s)
        report = reconciliation_cost(tree, s, use_labels=labeled)
        return Solution(report.total, map_to_species(tree, s), report.duplications,
                        {"k": decomposition.k, "seconds": time.perf_counter() - started})

    solver = _TripletSolver(decomposition, s, labeled)
    cost = solver.solve(solver.init.root)
    if cost is None:
        raise NoLabelCompatibleSolution("no label-compatible triplet-respecting tree")
    tree = solver.build()
    dups = sum(1 for x in tree.internal_nodes() if tree.events[x] is DUP)
    stats = {
        "k": decomposition.k,
        "v_cons": len(solver.v_cons()),
        "graft_points": solver.grafts_scanned,
        "seconds": time.perf_counter() - started,
        "contributions": dict(solver.contributions),
    }
    return Solution(cost, tree, dups, stats)


def min_trs(decomposition: SubtreeDecomposition, s: SpeciesTree) -> Solution:
    """Minimum-cost triplet-respecting supertree of the decomposition."""
    return _solve(decomposition, s, labeled=False)


def min_ltrs(decomposition: SubtreeDecomposition, s: SpeciesTree) -> Solution:
    """Labeled variant: subtree event labels must be preserved."""
    return _solve(decomposition, s, labeled=True)


# ---------------------------------------------------------------------------
# Correction pipeline
# ---------------------------------------------------------------------------

MODES = ("trs", "ltrs", "sgt", "lsgt")


@dataclass
class CorrectionReport:
    name: str
    n_leaves: int
    k_subtrees: int
    orig_cost: int
    new_cost: int
    high_dups_before: int
    high_dups_after: int
    millis: float
    tree: GeneTree
    notice: str = ""

    @property
    def reduction(self) -> int:
        return self.orig_cost - self.new_cost

    @property
    def reduction_pct(self) -> float:
        if self.orig_cost == 0:
            return 0.0
        return 100.0 * self.reduction / self.orig_cost

    COLUMNS = ("name", "n_leaves", "k_subtrees", "orig_cost", "new_cost",
               "reduction_pct", "high_dups_before", "high_dups_after", "millis")

    def row(self) -> List[str]:
        return [self.name, str(self.n_leaves), str(self.k_subtrees), str(self.orig_cost),
                str(self.new_cost), f"{self.reduction_pct:.2f}", str(self.high_dups_before),
                str(self.high_dups_after), f"{self.millis:.1f}"]


def correct(g: GeneTree, s: SpeciesTree, mode: str = "trs", name: str = "tree") -> CorrectionReport:
    """
    Cut ``g`` at its highest speciation nodes and recombine the pieces.

    Labeled modes keep ``g``'s own labels when it is fully labeled, else
    they use its LCA labels. Trees not rooted at a duplication are returned
    unchanged with a notice.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    started = time.perf_counter()
    labeled_mode = mode in ("ltrs", "lsgt")
    g = map_to_species(g, s)
    labeled = g if (labeled_mode and g.is_labeled()) else lca_reconcile(g, s)
    orig = reconciliation_cost(labeled, s, use_labels=labeled_mode).total
    before = highest_duplications(lca_reconcile(g, s))

    def unchanged(notice: str, k: int) -> CorrectionReport:
        return CorrectionReport(name, len(g.genes), k, orig, orig, before, before,
                                1000 * (time.perf_counter() - started), labeled, notice)

    if g.is_leaf(g.root) or labeled.events[labeled.root] is not DUP:
        return unchanged("root is not a duplication; tree left unchanged", 1)

    decomposition = decompose_at_highest_speciations(labeled)
    if mode == "trs":
        sol = min_trs(decomposition, s)
    elif mode == "ltrs":
        sol = min_ltrs(decomposition, s)
    elif mode == "sgt":
        sol = min_sgt(decomposition.subtrees(), s)
    else:
        sol = min_lsgt(decomposition.subtrees(), s)
    after = highest_duplications(lca_reconcile(sol.tree, s))
    return CorrectionReport(name, len(g.genes), decomposition.k, orig, sol.cost, before, after,
                            1000 * (time.perf_counter() - started), sol.tree)
