"""Command-line front end: ``sgx build|verify|imt|synthesize|probe|inspect|export``.

Exit codes: 0 success, 1 checked failure or construction failure,
2 usage or file-format error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import gallery
from .errors import (
    ArityMismatch,
    FormatError,
    MemoryBudgetExceeded,
    SgxError,
    SizeOverflow,
)
from .functions import FiniteFunction, read_sgfn, write_sgfn
from .io import Catalog, dump_semigroup, load_semigroup
from .minors import degree_lower_bound_probe, has_imt, is_term_function
from .semigroup import (
    FiniteSemigroup,
    adjoin_identity,
    adjoin_zero,
    build_free_nilpotent,
    congruence_closure,
    cyclic_group,
    direct_product,
    generating_set,
    nilpotency_profile,
    quotient_by_partition,
    semilattice,
    trivial,
    zero_direct_union,
)
from .synthesis import DEFAULT_SAMPLES, DEFAULT_SEED, synthesize
from .terms import parse_term

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _profile_text(S: FiniteSemigroup) -> str:
    p = nilpotency_profile(S, exclude_identity=S.identity is not None)
    d = "not nilpotent" if p.d is None else str(p.d)
    c = "-" if p.c is None else str(p.c)
    return f"d={d} c={c}"


def _summary(S: FiniteSemigroup) -> str:
    lab = lambda x: "-" if x is None else S.labels[x]
    return f"{S.name}: order {S.order}, identity {lab(S.identity)}, zero {lab(S.zero)}, profile {_profile_text(S)}"


def _merge_pairs(S: FiniteSemigroup, merges):
    pairs = []
    for m in merges or []:
        if "=" not in m:
            raise UsageError(f"--merge expects w1=w2, got {m!r}")
        a, b = (s.strip() for s in m.split("=", 1))
        try:
            pairs.append((S.index(a), S.index(b)))
        except (KeyError, ValueError):
            raise UsageError(f"--merge {m!r}: unknown element") from None
    return pairs


def _apply_merges(S, merges):
    pairs = _merge_pairs(S, merges)
    if not pairs:
        return S
    Q = quotient_by_partition(S, congruence_closure(S, pairs))
    Q.name = f"{S.name}/θ"
    return Q


def _finish_build(S, args):
    if getattr(args, "adjoin_zero", False):
        S = adjoin_zero(S)
    if getattr(args, "adjoin_one", False):
        S = adjoin_identity(S, reuse_identity=args.reuse_identity)
    if args.name:
        S.name = args.name
    if args.output:
        dump_semigroup(S, args.output)
    if args.catalog:
        Catalog(args.catalog).add(S)
    print(_summary(S))
    return EXIT_OK


NAMED = {"semilattice": semilattice, "trivial": trivial, "square": gallery.build_square_monoid}


def cmd_build(args) -> int:
    kind = args.kind
    if kind == "fn":
        if args.alphabet is None or args.d is None:
            raise UsageError("build fn needs --alphabet and --d")
        S = build_free_nilpotent(list(args.alphabet), args.d)
        S.name = f"FN{args.d}{{{','.join(args.alphabet)}}}"
        S = _apply_merges(S, args.merge)
    elif kind == "named":
        if args.which is None:
            raise UsageError("build named needs --which")
        if args.which.startswith("cyclic"):
            _, _, n = args.which.partition(":")
            S = cyclic_group(int(n or 2))
        elif args.which in NAMED:
            S = NAMED[args.which]()
        else:
            raise UsageError(f"unknown named semigroup {args.which!r}")
    elif kind in ("quotient", "adjoin"):
        if args.input is None:
            raise UsageError(f"build {kind} needs --input")
        S = load_semigroup(args.input)
        if kind == "quotient":
            S = _apply_merges(S, args.merge)
    else:
        if args.left is None or args.right is None:
            raise UsageError(f"build {kind} needs --left and --right")
        L, R = load_semigroup(args.left), load_semigroup(args.right)
        S = direct_product(L, R) if kind == "product" else zero_direct_union(L, R)
    return _finish_build(S, args)


def _write_report(report, path):
    text = report.to_json()
    if path == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def cmd_verify(args) -> int:
    if args.check == "square":
        report = gallery.verify_square(args.arity, samples=args.samples, seed=args.seed, rotation=args.pin_rotation)
    else:
        report = gallery.CHECKS[args.check]()
    _write_report(report, args.output)
    print(f"{report.check}: {report.status.upper()} (seed {report.seed})")
    for key, value in report.stats.items():
        print(f"  {key}: {json.dumps(value, default=str)}")
    if report.witness:
        print(f"  witness: {json.dumps(report.witness, default=str)}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _load_function(S: FiniteSemigroup, spec: str | None, path: str | None, arity: int | None) -> FiniteFunction:
    """``term:<word>`` or ``table:<file.sgfn>`` (or --function file)."""
    if path:
        return read_sgfn(path, S)
    if not spec:
        raise UsageError("give --function FILE or --oracle term:\"...\"")
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise UsageError(f"oracle spec must look like term:\"x1 x2\" or table:FILE, got {spec!r}")
    if kind == "table":
        return read_sgfn(rest, S)
    if kind != "term":
        raise UsageError(f"unknown oracle kind {kind!r}")
    try:
        t = parse_term(rest.strip().strip('"'), arity)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return FiniteFunction.from_term(S, t)


def cmd_imt(args) -> int:
    S = load_semigroup(args.semigroup)
    f = _load_function(S, args.oracle, args.function, args.arity)
    imt = has_imt(f, args.strategy)
    print(f"function: {f.name}, arity {f.arity}, on {S.name} (order {S.order})")
    print(f"IMT: {'yes' if imt.holds else 'no'}")
    for (i, j), t in sorted(imt.witnesses.items()):
        print(f"  f{i}{j} = {t}" if f.arity < 10 else f"  f[{i},{j}] = {t}")
    if imt.failing:
        i, j = imt.failing
        print(f"  minor ({i},{j}) is not a term function: {imt.searches[(i, j)].reason or 'no witness'}")
    res = is_term_function(f, args.strategy)
    if res:
        print(f"term function: yes, witness {res.term}")
    else:
        print(f"term function: no ({res.strategy}, {res.candidates} candidates)")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    S = load_semigroup(args.semigroup)
    f = _load_function(S, args.oracle, args.table, args.arity).with_log()
    print(f"seed: {args.seed}")
    try:
        t, trace = synthesize(f, samples=args.samples, seed=args.seed)
    except SgxError as exc:
        print(f"synthesis failed: {type(exc).__name__}: {exc}")
        return EXIT_FAIL
    print(f"term: {t}")
    print(f"exponents: {list(trace.exponents)}")
    for (i, j), w in sorted(trace.pairwise.items()):
        print(f"  pair ({i},{j}): {w}")
    if trace.case is not None:
        print(f"identity case: {trace.case}")
    for m, (a, b) in sorted(trace.cuts.items()):
        print(f"  x{m} cuts: alpha={a} beta={b}")
    if trace.ambiguous:
        print(f"ambiguous pairs: {trace.ambiguous}")
    print(f"verified on {trace.verified_tuples} tuples")
    log = f.log
    for tag in sorted(log.counts):
        print(f"  queries[{tag}]: {log.counts[tag]} (max support {log.max_support.get(tag, 0)})")
    return EXIT_OK


def cmd_probe(args) -> int:
    S = load_semigroup(args.semigroup)
    if args.max_arity <= S.order:
        raise UsageError(f"--max-arity must exceed |S| = {S.order}")
    try:
        report = degree_lower_bound_probe(S, args.max_arity)
    except (SizeOverflow, MemoryBudgetExceeded) as exc:
        print(f"probe stopped: {exc}")
        return EXIT_FAIL
    for n, row in sorted(report.arities.items()):
        print(f"arity {n}: {row['imt_functions']} IMT functions, {row['word_functions']} word functions, {row['bad']} not term functions")
        if row["example"]:
            print(f"  example minors: {row['example']['minors']}")
    bound = report.lower_bound
    if bound is None:
        print(f"no bad function found up to arity {args.max_arity}")
    else:
        print(f"degree ≥ {bound}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    path = Path(args.file)
    if path.is_dir():
        cat = Catalog(path)
        for name, entry in sorted(cat.index().items()):
            print(f"{name}: {entry['path']} order {entry['order']} profile {entry['profile']}")
        stale = cat.stale()
        if stale:
            print(f"stale entries: {', '.join(stale)}")
            return EXIT_FAIL
        return EXIT_OK
    if path.name.endswith(".sgfn"):
        import struct

        data = path.read_bytes()
        if data[:4] != b"SGFN" or len(data) < 12:
            raise FormatError(f"{path}: not an SGFN file")
        version, _, arity, order = struct.unpack("<BBHI", data[4:12])
        print(f"SGFN v{version}: arity {arity}, universe order {order}, {(len(data) - 12) // 2} values")
        return EXIT_OK
    S = load_semigroup(path)
    print(_summary(S))
    print(f"commutative: {'yes' if S.is_commutative() else 'no'}")
    print(f"generators: {' '.join(S.labels[g] for g in generating_set(S))}")
    if args.table:
        width = max(len(x) for x in S.labels)
        for x in range(S.order):
            print(" ".join(S.labels[y].rjust(width) for y in S.rows[x]))
    return EXIT_OK


def cmd_export(args) -> int:
    """Write a gallery function (and its universe) to disk."""
    if args.what == "semilattice-f":
        f = gallery.build_semilattice_counterexample()
    else:
        f = gallery.build_square_f(args.arity)
    write_sgfn(args.output, f)
    if args.universe:
        dump_semigroup(f.universe, args.universe)
    print(f"wrote {f.name}: arity {f.arity} on order {f.universe.order}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgx", description="Finite semigroups, term functions and identification minors.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a semigroup and write it as .sg.json")
    b.add_argument("kind", choices=["fn", "named", "quotient", "adjoin", "product", "zero-union"])
    b.add_argument("--alphabet")
    b.add_argument("--d", type=int)
    b.add_argument("--which", help="semilattice, trivial, square or cyclic:N")
    b.add_argument("--input")
    b.add_argument("--left")
    b.add_argument("--right")
    b.add_argument("--merge", action="append", help="w1=w2; generators are closed to the least congruence")
    b.add_argument("--adjoin-one", action="store_true")
    b.add_argument("--adjoin-zero", action="store_true")
    b.add_argument("--reuse-identity", action="store_true", help="with --adjoin-one, keep an existing identity")
    b.add_argument("--name")
    b.add_argument("-o", "--output")
    b.add_argument("--catalog", help="also add the result to this catalog directory")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run a gallery check and write report.json")
    v.add_argument("check", choices=sorted(gallery.CHECKS))
    v.add_argument("--arity", type=int, default=4)
    v.add_argument("--seed", type=int, default=gallery.DEFAULT_SEED)
    v.add_argument("--samples", type=int, default=10**6)
    v.add_argument("--pin-rotation", action="store_true", help="scan only words starting with x2")
    v.add_argument("-o", "--output", default="report.json", help="'-' prints the report instead")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("imt", help="IMT and term-function membership of a function")
    i.add_argument("semigroup")
    i.add_argument("--function", help=".sgfn table")
    i.add_argument("--oracle", help='term:"x1 x2" or table:FILE')
    i.add_argument("--arity", type=int)
    i.add_argument("--strategy", choices=["auto", "closure", "pruned"], default="auto")
    i.set_defaults(func=cmd_imt)

    s = sub.add_parser("synthesize", help="recover a term from a function promised to have IMT")
    s.add_argument("semigroup")
    s.add_argument("--oracle", help='term:"x2 x1 x3" or table:FILE')
    s.add_argument("--table", help=".sgfn table")
    s.add_argument("--arity", type=int)
    s.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_synthesize)

    pr = sub.add_parser("probe", help="search for IMT functions that are not term functions")
    pr.add_argument("semigroup")
    pr.add_argument("--max-arity", type=int, required=True)
    pr.set_defaults(func=cmd_probe)

    ins = sub.add_parser("inspect", help="describe a .sg.json, .sgfn or catalog directory")
    ins.add_argument("file")
    ins.add_argument("--table", action="store_true", help="print the Cayley table")
    ins.set_defaults(func=cmd_inspect)

    ex = sub.add_parser("export", help="write a gallery function as .sgfn")
    ex.add_argument("what", choices=["semilattice-f", "square-f"])
    ex.add_argument("--arity", type=int, default=4)
    ex.add_argument("-o", "--output", required=True)
    ex.add_argument("--universe", help="also write the universe as .sg.json")
    ex.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FormatError, ArityMismatch) as exc:
        print(f"sgx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SgxError as exc:
        print(f"sgx: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
