"""``mcl`` command line.

Exit codes: 0 ok, 1 assertion or invariant failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from mcl import __version__, datasets, experiments, treeio
from mcl.domains import KINDS, Domain, sample_points
from mcl.rng import stream
from mcl.tree import STRATEGIES, BuildParams, RangeQuery, build, nn_search, range_search, validate_tree

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcl", description="Metric trees and concentration of measure experiments.")
    p.add_argument("--version", action="version", version=f"mcl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="sample a dataset from a domain's measure")
    g.add_argument("--kind", choices=KINDS, default="hamming")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--binary", action="store_true", help="write the MCL1 binary layout instead of text")
    g.add_argument("--out", required=True)

    b = sub.add_parser("build", help="build a metric tree over a dataset file")
    b.add_argument("data")
    b.add_argument("--strategy", choices=STRATEGIES, default="vp")
    b.add_argument("--b", type=int, default=16)
    b.add_argument("--c", type=int, default=16)
    b.add_argument("--h", type=int, default=48)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)

    q = sub.add_parser("query", help="run range or nearest-neighbour queries against a tree")
    q.add_argument("data")
    q.add_argument("tree")
    q.add_argument("--radius", type=float, help="range query radius (default: nearest neighbour)")
    q.add_argument("--point", action="append", default=[],
                   help="query centre: a bitstring for hamming, comma-separated reals otherwise (repeatable)")
    q.add_argument("--random", type=int, default=0, help="number of random query centres from the domain measure")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", help="write results here instead of standard output")

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="override the config (and MCL_SEED) seed")
    r.add_argument("--out", help="artifact directory (default: config value or ./results)")
    r.add_argument("--threads", type=int, default=1)

    s = sub.add_parser("report", help="summarise experiment artifacts and check assertions")
    s.add_argument("dir")
    return p


def _gen_data(args) -> int:
    if args.n < 1 or args.d < 1 or args.seed < 0:
        raise UsageError("need n >= 1, d >= 1 and seed >= 0")
    dom = Domain(args.kind, args.d)
    ds = datasets.Dataset(dom, sample_points(dom, args.seed, args.n), args.seed)
    datasets.write(args.out, ds, binary=args.binary)
    print(f"wrote {ds.n} {dom.kind} points (d={dom.d}) to {args.out}")
    return EXIT_OK


def _build(args) -> int:
    ds = datasets.read(args.data)
    tree = build(ds.points, ds.domain, BuildParams(args.strategy, args.b, args.c, args.h), seed=args.seed)
    rep = validate_tree(tree)
    if not rep.ok:
        print(f"tree failed validation: {rep.violations[:3]}", file=sys.stderr)
        return EXIT_FAIL
    treeio.save(args.out, tree)
    print(f"built {args.strategy} tree: {tree.internal_count} internal nodes, {tree.leaf_count} bins, depth {tree.depth}")
    return EXIT_OK


def _parse_point(dom: Domain, text: str) -> np.ndarray:
    try:
        if dom.is_bits:
            return dom.point(text.strip())
        return dom.point([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"bad query point {text!r}: {exc}") from exc


def _query(args) -> int:
    ds = datasets.read(args.data)
    tree = treeio.load(args.tree, ds.points)
    dom = tree.domain
    centers = [_parse_point(dom, t) for t in args.point]
    if args.random:
        centers += list(dom.sample(stream(args.seed, "cli-queries", dom.kind, dom.d), args.random))
    if not centers:
        raise UsageError("give at least one --point or --random N")
    lines = []
    if args.radius is None:
        lines.append("query,index,distance,cost,bins_opened")
        for i, w in enumerate(centers):
            res = nn_search(tree, w)
            lines.append(f"{i},{res.index},{res.distance!r},{res.trace.cost},{res.trace.bins_opened}")
    else:
        if not args.radius > 0 or not math.isfinite(args.radius):
            raise UsageError("--radius must be a positive number")
        lines.append("query,matches,cost,bins_opened,indices")
        for i, w in enumerate(centers):
            idx, tr = range_search(tree, RangeQuery(w, args.radius))
            lines.append(f"{i},{len(idx)},{tr.cost},{tr.bins_opened},{' '.join(map(str, idx))}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run(args) -> int:
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    cfg = experiments.load_config(args.config, args.seed)
    res = experiments.run(cfg, args.out, threads=args.threads)
    for name, path in res.artifacts.items():
        print(f"wrote {path}")
    return EXIT_OK


def _report(args) -> int:
    checks, lines = experiments.summarize(args.dir)
    print("\n".join(lines))
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


_COMMANDS = {"gen-data": _gen_data, "build": _build, "query": _query, "run": _run, "report": _report}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except experiments.InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, experiments.ConfigError, experiments.ArtifactError, datasets.DatasetFormatError,
            treeio.TreeFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
