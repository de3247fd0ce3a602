"""
Command-line entry point.

    suget reconcile SPECIES GENES          per-tree LCA labels and cost
    suget check GENES                      BUILD consistency test
    suget minsgt SPECIES GENES [--core]    supertree of all trees in GENES
    suget minlsgt SPECIES GENES [--core]   label-compatible supertree
    suget mintrs SPECIES GENES             per tree: cut and recombine
    suget minltrs SPECIES GENES            labeled variant
    suget correct SPECIES GENES --mode=trs --report=tsv
    suget oracle SPECIES GENES --mode=sgt  brute force, n <= 8
    suget gen --seed 1 --prefix out/inst   write a synthetic instance
    suget bench scaling|correct            desk-scale benchmarks

Exit status: 0 success, 1 some tree failed, 2 bad configuration or input.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import time
from pathlib import Path
from typing import List, Optional, Tuple

from . import oracle as oracle_mod
from .consistency import check_consistency
from .errors import NewickError, SugetError, TreeError
from .newick import RawTree, read_newick_file, serialize_newick
from .reconciliation import lca_reconcile, reconciliation_cost
from .simulate import caterpillar_instance, gen_instance
from .supertree import bipartition_bound, min_lsgt, min_sgt, min_sgt_core
from .trees import GeneTree, SpeciesTree
from .triplet import MODES, CorrectionReport, correct, decompose_at_highest_speciations, \
    min_ltrs, min_trs

DEFAULT_MAX_K = 8


class ConfigError(Exception):
    pass


def _default_max_k() -> int:
    return int(os.environ.get("SUGET_MAX_K", DEFAULT_MAX_K))


# -- input -----------------------------------------------------------------

def _read(path: str) -> List[RawTree]:
    if not Path(path).exists():
        raise ConfigError(f"{path}: no such file")
    try:
        trees = read_newick_file(path)
    except NewickError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not trees:
        raise ConfigError(f"{path}: no trees found")
    return trees


def _species(path: str) -> SpeciesTree:
    raw = _read(path)[0]
    try:
        return SpeciesTree.from_raw(raw)
    except (TreeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _genes(path: str, s: Optional[SpeciesTree]) -> List[Tuple[str, GeneTree]]:
    out = []
    for i, raw in enumerate(_read(path)):
        name = raw.nodes[raw.root].label or f"tree{i + 1}"
        try:
            out.append((name, GeneTree.from_raw(raw, s, require_species=s is not None)))
        except (SugetError, ValueError) as exc:
            raise ConfigError(f"{path}: tree {i + 1}: {exc}") from exc
    return out


def _stats(args, stats: dict, prefix: str = "") -> None:
    if not args.stats:
        return
    fields = " ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}"
                      for k, v in stats.items() if not isinstance(v, dict))
    print(f"stats {prefix}{fields}".rstrip(), file=sys.stderr)


def _check_k(k: int, max_k: int) -> None:
    if k > max_k:
        raise ConfigError(
            f"{k} input trees exceed --max-k={max_k}: each subproblem may test up to "
            f"4^k/2-1 = {bipartition_bound(k)} bipartitions"
        )


def _emit(tree: GeneTree, line: str) -> None:
    print(tree.to_newick())
    print(line)


def _batch(items, work) -> int:
    """Run ``work`` on each (name, tree); failures reported and isolated."""
    status = 0
    for i, (name, tree) in enumerate(items):
        try:
            work(name, tree)
        except SugetError as exc:
            print(f"error: tree {i + 1} ({name}): {exc}", file=sys.stderr)
            status = 1
    return status


# -- subcommands -----------------------------------------------------------

def cmd_reconcile(args) -> int:
    s = _species(args.species)

    def work(name, g):
        labeled = g if args.labels and g.is_labeled() else lca_reconcile(g, s)
        report = reconciliation_cost(labeled, s, use_labels=args.labels)
        _emit(labeled, report.cost_line())

    return _batch(_genes(args.genes, s), work)


def cmd_check(args) -> int:
    trees = [t for _, t in _genes(args.genes, None)]
    try:
        result = check_consistency(trees)
    except SugetError as exc:
        raise ConfigError(str(exc)) from exc
    if result:
        print(serialize_newick(result.supertree))
        return 0
    print(result.describe(), file=sys.stderr)
    return 1


def _supertree(args, labeled: bool) -> int:
    s = _species(args.species)
    trees = [t for _, t in _genes(args.genes, s)]
    _check_k(len(trees), args.max_k)
    try:
        if labeled:
            sol = min_lsgt(trees, s, core=args.core)
        else:
            sol = min_sgt_core(trees, s) if args.core else min_sgt(trees, s)
    except SugetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(sol.tree, sol.cost_line())
    _stats(args, sol.stats)
    return 0


def cmd_minsgt(args) -> int:
    return _supertree(args, labeled=False)


def cmd_minlsgt(args) -> int:
    return _supertree(args, labeled=True)


def _triplet(args, labeled: bool) -> int:
    s = _species(args.species)

    def work(name, g):
        init = g if labeled and g.is_labeled() else lca_reconcile(g, s)
        dec = decompose_at_highest_speciations(init)
        sol = (min_ltrs if labeled else min_trs)(dec, s)
        _emit(sol.tree, sol.cost_line())
        _stats(args, sol.stats, f"{name} ")

    return _batch(_genes(args.genes, s), work)


def cmd_mintrs(args) -> int:
    return _triplet(args, labeled=False)


def cmd_minltrs(args) -> int:
    return _triplet(args, labeled=True)


def cmd_correct(args) -> int:
    s = _species(args.species)
    items = _genes(args.genes, s)
    if args.report == "tsv":
        print("\t".join(CorrectionReport.COLUMNS))

    def work(name, g):
        if args.mode in ("sgt", "lsgt"):
            init = lca_reconcile(g, s)
            k = decompose_at_highest_speciations(init).k
            if k > args.max_k:
                raise _TooMany(f"{k} subtrees exceed --max-k={args.max_k}")
        report = correct(g, s, args.mode, name)
        if report.notice:
            print(f"note: {name}: {report.notice}", file=sys.stderr)
        if args.report == "tsv":
            print("\t".join(report.row()))
        else:
            print(report.tree.to_newick())
            print(f"cost={report.orig_cost}->{report.new_cost}")

    return _batch(items, work)


class _TooMany(SugetError):
    pass


def cmd_oracle(args) -> int:
    if args.max_oracle_n is not None:
        os.environ["SUGET_MAX_ORACLE_N"] = str(args.max_oracle_n)
    s = _species(args.species)
    items = _genes(args.genes, s)
    labels = args.mode in ("lsgt", "ltrs")
    if args.mode in ("sgt", "lsgt"):
        trees = [t for _, t in items]
        if labels and not all(t.is_labeled() for t in trees):
            print("error: labeled mode needs Ev tags on every internal node", file=sys.stderr)
            return 1
        try:
            result = oracle_mod.brute_min(trees, s, labels=labels)
        except SugetError as exc:
            raise ConfigError(str(exc)) from exc
        return _oracle_out(result)

    def work(name, g):
        init = g if labels and g.is_labeled() else lca_reconcile(g, s)
        dec = decompose_at_highest_speciations(init)
        status = _oracle_out(oracle_mod.brute_min(None, s, labels=labels, triplets=dec))
        if status:
            raise _TooMany("infeasible")

    return _batch(items, work)


def _oracle_out(result) -> int:
    if result is None:
        print("infeasible", file=sys.stderr)
        return 1
    dups = sum(1 for x in result.tree.internal_nodes()
               if result.tree.events[x] is not None and result.tree.events[x].value == "Dup")
    print(result.tree.to_newick())
    print(f"cost={dups}+{result.cost - dups}={result.cost}")
    return 0


def cmd_gen(args) -> int:
    inst = gen_instance(args.seed, args.species_count, args.genes_count, args.k,
                        args.dup_rate, args.loss_rate, args.moves)
    prefix = Path(args.prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    files = {
        "species": [str(inst.species.to_raw())],
        "truth": [inst.truth.to_newick()],
        "inputs": [t.to_newick() for t in inst.inputs],
        "perturbed": [inst.perturbed.to_newick()],
    }
    for part, lines in files.items():
        path = Path(f"{prefix}.{part}.nwk")
        path.write_text("\n".join(lines) + "\n")
        print(path)
    return 0


def cmd_bench(args) -> int:
    if args.kind == "scaling":
        print("n_leaves\tseconds\tratio")
        previous = None
        for n in args.sizes:
            g, s = caterpillar_instance(n)
            dec = decompose_at_highest_speciations(g)
            started = time.perf_counter()
            min_trs(dec, s)
            took = time.perf_counter() - started
            ratio = f"{took / previous:.2f}" if previous else "-"
            print(f"{len(g.genes)}\t{took:.4f}\t{ratio}")
            previous = took
        return 0
    rng = random.Random(args.seed)
    print("\t".join(CorrectionReport.COLUMNS))
    for i in range(args.count):
        inst = gen_instance(rng.randrange(2 ** 31), args.species_count, args.genes_count, 1,
                            args.dup_rate, args.loss_rate, args.moves)
        print("\t".join(correct(inst.perturbed, inst.species, args.mode, f"gen{i + 1}").row()))
    return 0


# -- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="suget", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, species=True, genes=True):
        if species:
            p.add_argument("species", help="Newick file with the species tree")
        if genes:
            p.add_argument("genes", help="Newick file with one or more gene trees")
        p.add_argument("--stats", action="store_true", help="solver statistics on stderr")
        p.add_argument("--max-k", type=int, default=_default_max_k(),
                       help="refuse more input trees than this (default %(default)s)")

    p = sub.add_parser("reconcile", help="LCA-reconcile each gene tree")
    common(p)
    p.add_argument("--labels", action="store_true", help="cost the trees' own event labels")
    p.set_defaults(func=cmd_reconcile)

    p = sub.add_parser("check", help="are the gene trees consistent?")
    common(p, species=False)
    p.set_defaults(func=cmd_check)

    for name, func, what in (("minsgt", cmd_minsgt, "minimum-cost supertree"),
                             ("minlsgt", cmd_minlsgt, "label-compatible minimum-cost supertree")):
        p = sub.add_parser(name, help=f"{what} of all trees in the file")
        common(p)
        p.add_argument("--core", action="store_true", help="drive the DP by a greedy core")
        p.set_defaults(func=func)

    for name, func, what in (("mintrs", cmd_mintrs, "triplet-respecting"),
                             ("minltrs", cmd_minltrs, "label-preserving triplet-respecting")):
        p = sub.add_parser(name, help=f"{what} correction of each tree")
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("correct", help="correction report for each tree")
    common(p)
    p.add_argument("--mode", choices=MODES, default="trs")
    p.add_argument("--report", choices=("tsv", "newick"), default="tsv")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("oracle", help="brute-force optimum (at most 8 genes)")
    common(p)
    p.add_argument("--mode", choices=MODES, default="sgt")
    p.add_argument("--max-oracle-n", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    def sim(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--species", dest="species_count", type=int, default=5)
        p.add_argument("--genes", dest="genes_count", type=int, default=8)
        p.add_argument("--dup-rate", type=float, default=0.3)
        p.add_argument("--loss-rate", type=float, default=0.1)
        p.add_argument("--moves", type=int, default=2, help="random NNIs for the perturbed tree")

    p = sub.add_parser("gen", help="write a synthetic instance")
    sim(p)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--prefix", default="instance")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="desk-scale benchmarks")
    p.add_argument("kind", choices=("scaling", "correct"))
    p.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 800])
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--mode", choices=MODES, default="trs")
    sim(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
