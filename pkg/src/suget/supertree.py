"""
Minimum-reconciliation supertrees of consistent gene trees.

The solver builds the supertree top-down. At a subproblem every input tree
is reduced to one of its complete subtrees (or is absent), and each tree
either sends its whole current subtree to one side of the root split, or
sends its two child subtrees to opposite sides. Enumerating these choices
gives every compatible bipartition; the best one is found by memoized
recursion over tuples of current subtree roots.

Three entry points share the machinery:

* ``min_sgt``       plain duplication+loss cost
* ``min_lsgt``      input trees carry Dup/Spec labels that must be kept
* ``min_sgt_core``  only a covering subset of trees drives the enumeration;
                    the others just filter candidate bipartitions
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .consistency import check_consistency, check_shared_species
from .errors import (
    InconsistentInput,
    NoLabelCompatibleSolution,
    UnlabeledNode,
)
from .reconciliation import DUP, SPEC, local_cost, labeled_local_cost, spec_allowed
from .trees import EventLabel, GeneTree, GeneTreeBuilder, SpeciesTree, map_to_species

_RECURSION_FLOOR = 20000


class Placement(Enum):
    ALL_LEFT = "all-left"
    ALL_RIGHT = "all-right"
    SPLIT_LR = "split"
    SPLIT_RL = "split-swapped"
    ABSENT = "absent"

    @property
    def separates(self) -> bool:
        return self in (Placement.SPLIT_LR, Placement.SPLIT_RL)


@dataclass(frozen=True)
class Bipartition:
    left: FrozenSet[str]
    right: FrozenSet[str]
    assignment: Tuple[Placement, ...]


@dataclass
class Solution:
    """Optimal tree with its cost; ``stats`` holds solver counters."""

    cost: int
    tree: GeneTree
    duplications: int
    stats: Dict[str, float] = field(default_factory=dict)

    @property
    def losses(self) -> int:
        return self.cost - self.duplications

    def cost_line(self) -> str:
        return f"cost={self.duplications}+{self.losses}={self.cost}"


def bipartition_bound(k: int) -> int:
    return 4 ** k // 2 - 1


# ---------------------------------------------------------------------------
# Instance preprocessing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Option:
    placement: Placement
    left: Optional[int]     # node sent to the left side, if any
    right: Optional[int]
    lmask: int
    rmask: int


class _Instance:
    """Bitmask view of the input trees shared by every solve."""

    def __init__(self, trees: Sequence[GeneTree], s: Optional[SpeciesTree]):
        self.species = check_shared_species(trees)
        self.s = s
        if s is None:
            self.trees = list(trees)
        else:
            self.trees = [t if t.species_tree is s and t.smap is not None
                          else map_to_species(t, s) for t in trees]
        self.genes: List[str] = []
        bit: Dict[str, int] = {}
        for tree in self.trees:
            for gene in tree.genes:
                if gene not in bit:
                    bit[gene] = 1 << len(self.genes)
                    self.genes.append(gene)

        self.masks: List[List[int]] = []
        self.clusters: List[Dict[int, int]] = []
        for tree in self.trees:
            mask = [0] * len(tree)
            for node in tree.postorder:
                kids = tree.children[node]
                if kids:
                    mask[node] = mask[kids[0]] | mask[kids[1]]
                else:
                    mask[node] = bit[tree.labels[node]]
            self.masks.append(mask)
            self.clusters.append({m: node for node, m in enumerate(mask)})
        self.full = 0
        for mask, tree in zip(self.masks, self.trees):
            self.full |= mask[tree.root]
        self._options: Dict[Tuple[int, int], List[_Option]] = {}

    def options(self, t: int, node: int, first: bool) -> List[_Option]:
        opts = self._options.get((t, node))
        if opts is None:
            mask = self.masks[t]
            kids = self.trees[t].children[node]
            opts = [
                _Option(Placement.ALL_LEFT, node, None, mask[node], 0),
                _Option(Placement.ALL_RIGHT, None, node, 0, mask[node]),
            ]
            if kids:
                a, b = kids
                opts.append(_Option(Placement.SPLIT_LR, a, b, mask[a], mask[b]))
                opts.append(_Option(Placement.SPLIT_RL, b, a, mask[b], mask[a]))
            self._options[(t, node)] = opts
        if first:
            # mirror images of these are produced by the remaining options
            return opts[0::2]
        return opts

    def image(self, t: int, node: int) -> int:
        return self.trees[t].smap[node]


# ---------------------------------------------------------------------------
# Dynamic program
# ---------------------------------------------------------------------------

_MISSING = object()


class _SupertreeDP:
    """
    Memoized recursion over subproblem keys.

    A key holds, for each driving tree, the root of its current complete
    subtree or None when the tree has no gene in the subproblem. Trees in
    ``checked`` are not part of the key; they only veto bipartitions.
    """

    def __init__(self, inst: _Instance, active: Sequence[int], checked: Sequence[int] = (),
                 labeled: bool = False):
        self.inst = inst
        self.active = list(active)
        self.checked = list(checked)
        self.labeled = labeled
        self.memo: Dict[tuple, Optional[Tuple[int, Optional[tuple]]]] = {}
        self.candidates = 0
        self.examined = 0
        self.max_per_subproblem = 0

    # -- enumeration --------------------------------------------------------

    def candidates_for(self, key: tuple) -> Iterator[Tuple[_Option, ...]]:
        """Yield option tuples (over present trees) forming valid bipartitions."""
        present = [(pos, node) for pos, node in enumerate(key) if node is not None]
        opts = [self.inst.options(self.active[pos], node, first=(i == 0))
                for i, (pos, node) in enumerate(present)]
        n = len(opts)
        chosen: List[Optional[_Option]] = [None] * n

        def extend(i: int, lmask: int, rmask: int):
            if i == n:
                if lmask and rmask:
                    yield tuple(chosen)
                return
            for opt in opts[i]:
                self.examined += 1
                if opt.lmask & rmask or opt.rmask & lmask:
                    continue
                chosen[i] = opt
                yield from extend(i + 1, lmask | opt.lmask, rmask | opt.rmask)

        return extend(0, 0, 0)

    def _checked_state(self, union: int) -> List[Tuple[int, int]]:
        state = []
        inst = self.inst
        for t in self.checked:
            part = union & inst.masks[t][inst.trees[t].root]
            if part:
                node = inst.clusters[t].get(part)
                assert node is not None, "non-core tree lost its subtree structure"
                state.append((t, node))
        return state

    # -- recursion ----------------------------------------------------------

    def solve(self, key: tuple) -> Optional[int]:
        hit = self.memo.get(key, _MISSING)
        if hit is not _MISSING:
            return None if hit is None else hit[0]

        inst = self.inst
        s = inst.s
        present = [(self.active[pos], node) for pos, node in enumerate(key) if node is not None]
        union = 0
        image = None
        for t, node in present:
            union |= inst.masks[t][node]
            img = inst.image(t, node)
            image = img if image is None else s.lca2(image, img)

        if union & (union - 1) == 0:
            self.memo[key] = (0, None)
            return 0

        checked = self._checked_state(union) if self.checked else []
        best: Optional[Tuple[int, Optional[tuple]]] = None
        positions = _present_positions(key)
        count = 0
        for combo in self.candidates_for(key):
            count += 1
            lmask = rmask = 0
            limg = rimg = None
            left_key = list(key)
            right_key = list(key)
            forced: Optional[EventLabel] = None
            conflict = False
            for (t, node), opt, pos in zip(present, combo, positions):
                left_key[pos] = opt.left
                right_key[pos] = opt.right
                lmask |= opt.lmask
                rmask |= opt.rmask
                if opt.left is not None:
                    img = inst.image(t, opt.left)
                    limg = img if limg is None else s.lca2(limg, img)
                if opt.right is not None:
                    img = inst.image(t, opt.right)
                    rimg = img if rimg is None else s.lca2(rimg, img)
                if self.labeled and opt.placement.separates:
                    ev = inst.trees[t].events[node]
                    if forced is None:
                        forced = ev
                    elif ev is not forced:
                        conflict = True
            if conflict:
                continue

            ok = True
            for t, node in checked:
                m = inst.masks[t][node]
                if not m & rmask or not m & lmask:
                    continue
                kids = inst.trees[t].children[node]
                if not kids:
                    ok = False
                    break
                a, b = inst.masks[t][kids[0]], inst.masks[t][kids[1]]
                if not ((a & ~lmask == 0 and b & ~rmask == 0)
                        or (a & ~rmask == 0 and b & ~lmask == 0)):
                    ok = False
                    break
                if self.labeled:
                    ev = inst.trees[t].events[node]
                    if forced is None:
                        forced = ev
                    elif ev is not forced:
                        ok = False
                        break
            if not ok:
                continue
            self.candidates += 1

            if self.labeled:
                if forced is SPEC and not spec_allowed(image, limg, rimg):
                    continue
                local = labeled_local_cost(s, image, limg, rimg, forced)
                event = forced if forced is not None else local_cost(s, image, limg, rimg)[1]
            else:
                local, event = local_cost(s, image, limg, rimg)
            left_key = tuple(left_key)
            lc = self.solve(left_key)
            if lc is None:
                continue
            right_key = tuple(right_key)
            rc = self.solve(right_key)
            if rc is None:
                continue
            total = local + lc + rc
            if best is None or total < best[0]:
                best = (total, (left_key, right_key, event))

        assert count <= bipartition_bound(len(present)), "more bipartitions than 4^k/2-1"
        self.max_per_subproblem = max(self.max_per_subproblem, count)
        self.memo[key] = best
        return None if best is None else best[0]

    # -- reconstruction -----------------------------------------------------

    def build(self, key: tuple) -> Tuple[GeneTree, int]:
        inst = self.inst
        builder = GeneTreeBuilder()
        dups = 0
        # post-order over the optimal choice tree
        out: Dict[tuple, int] = {}
        stack: List[Tuple[tuple, bool]] = [(key, False)]
        while stack:
            k, expanded = stack.pop()
            entry = self.memo[k]
            assert entry is not None
            choice = entry[1]
            if choice is None:
                union = 0
                for pos, node in enumerate(k):
                    if node is not None:
                        union |= inst.masks[self.active[pos]][node]
                gene = inst.genes[union.bit_length() - 1]
                out[k] = builder.leaf(gene, inst.species[gene])
                continue
            left_key, right_key, event = choice
            if not expanded:
                stack.append((k, True))
                stack.append((right_key, False))
                stack.append((left_key, False))
                continue
            dups += event is DUP
            out[k] = builder.join(out[left_key], out[right_key], event)
        return builder.finish(out[key], inst.s), dups


def _present_positions(key: tuple) -> List[int]:
    return [pos for pos, node in enumerate(key) if node is not None]


def _raise_recursion_limit(n: int) -> None:
    want = max(_RECURSION_FLOOR, 8 * n + 1000)
    if sys.getrecursionlimit() < want:
        sys.setrecursionlimit(want)


def _run(trees: Sequence[GeneTree], s: SpeciesTree, labeled: bool,
         core: Optional[List[int]] = None) -> Solution:
    if not trees:
        raise ValueError("need at least one gene tree")
    if labeled:
        for i, tree in enumerate(trees):
            if not tree.is_labeled():
                raise UnlabeledNode(f"tree {i + 1} has internal nodes without Dup/Spec label")
    started = time.perf_counter()
    inst = _Instance(trees, s)
    _raise_recursion_limit(len(inst.genes))
    active = list(range(len(trees))) if core is None else sorted(core)
    checked = [] if core is None else [i for i in range(len(trees)) if i not in set(core)]
    dp = _SupertreeDP(inst, active, checked, labeled)
    root_key = tuple(inst.trees[t].root for t in active)
    cost = dp.solve(root_key)
    if cost is None:
        if labeled and check_consistency(trees):
            raise NoLabelCompatibleSolution("no label-compatible supertree exists")
        raise InconsistentInput("input trees are not consistent: no compatible bipartition")
    tree, dups = dp.build(root_key)
    stats = {
        "memo_size": len(dp.memo),
        "bipartitions": dp.candidates,
        "max_bipartitions": dp.max_per_subproblem,
        "options_examined": dp.examined,
        "k": len(trees),
        "k_driving": len(active),
        "seconds": time.perf_counter() - started,
    }
    return Solution(cost, tree, dups, stats)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def enumerate_bipartitions(trees: Sequence[GeneTree],
                           roots: Optional[Sequence[Optional[int]]] = None
                           ) -> Iterator[Bipartition]:
    """
    Valid bipartitions of the current subproblem, in canonical order.

    ``roots`` gives each tree's current subtree root (None = absent);
    by default the tree roots. Trees need species for the shared-gene
    check only, so unmapped trees are fine.
    """
    inst = _Instance(trees, None)
    if roots is None:
        roots = [t.root for t in trees]
    dp = _SupertreeDP(inst, range(len(trees)))

    def genes_of(mask: int) -> FrozenSet[str]:
        return frozenset(g for i, g in enumerate(inst.genes) if mask >> i & 1)

    present = _present_positions(tuple(roots))
    for combo in dp.candidates_for(tuple(roots)):
        assignment = [Placement.ABSENT] * len(trees)
        lmask = rmask = 0
        for pos, opt in zip(present, combo):
            assignment[pos] = opt.placement
            lmask |= opt.lmask
            rmask |= opt.rmask
        yield Bipartition(genes_of(lmask), genes_of(rmask), tuple(assignment))


def min_sgt(trees: Sequence[GeneTree], s: SpeciesTree) -> Solution:
    """Supertree of minimum LCA-reconciliation cost displaying every input."""
    return _run(trees, s, labeled=False)


def min_lsgt(trees: Sequence[GeneTree], s: SpeciesTree, core: bool = False) -> Solution:
    """Label-compatible supertree of minimum reconciliation cost."""
    return _run(trees, s, labeled=True, core=find_core(trees) if core else None)


def find_core(trees: Sequence[GeneTree]) -> List[int]:
    """
    Indices of a covering subset of ``trees``, greedily chosen.

    Starts from a largest tree, then repeatedly adds the tree covering the
    most still-missing genes; ties go to the earliest tree.
    """
    sets = [frozenset(t.genes) for t in trees]
    if not sets:
        return []
    universe = frozenset().union(*sets)
    first = max(range(len(sets)), key=lambda i: (len(sets[i]), -i))
    core = [first]
    covered = set(sets[first])
    while covered != universe:
        gain, pick = max((len(sets[i] - covered), -i) for i in range(len(sets)))
        core.append(-pick)
        covered |= sets[-pick]
    return core


def min_sgt_core(trees: Sequence[GeneTree], s: SpeciesTree) -> Solution:
    """``min_sgt`` with the enumeration driven by a greedy core only."""
    return _run(trees, s, labeled=False, core=find_core(trees))
