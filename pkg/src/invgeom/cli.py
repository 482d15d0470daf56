"""Command line: ``invgeom <group> <command> ...``.

Semi-decision commands exit 0 (confirmed), 1 (refuted) or 2 (unknown).
Errors: 64 usage, 65 unreadable or malformed input, 66 E-unitarity
needed but not asserted, 70 internal.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional

from . import finverse, geometry, presentation as pres, propa, stephen
from .grouporacle import (BSOracle, FreeGroupOracle, FreeProductOracle, GroupOracle, OracleUnknownError,
                          RewritingOracle, SubstitutionOracle, eliminate_generator_oracle, parse_rules)
from .tribool import TriBool
from .words import Alphabet, WordSyntaxError, free_reduce

EX_USAGE, EX_DATAERR, EX_NOEUNITARY, EX_SOFTWARE = 64, 65, 66, 70

log = logging.getLogger("invgeom")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers

def load_presentation(path: str) -> pres.Presentation:
    try:
        return pres.load(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def parse_word(p: pres.Presentation, text: str, what: str):
    try:
        return p.alphabet.parse(text)
    except WordSyntaxError as exc:
        raise DataError(f"{what} {text!r}: {exc}") from None


def _default_names(rank: int) -> list[str]:
    return [chr(ord("a") + i) for i in range(rank)] if rank <= 26 else [f"x{i}" for i in range(rank)]


def _atomic_oracle(spec: str, names: Optional[list[str]]) -> GroupOracle:
    kind, _, arg = spec.partition(":")
    if kind == "fg":
        if "+" in arg or not arg.isdigit():
            gens = arg.split("+")
        else:
            rank = int(arg)
            gens = names if names is not None and len(names) == rank else _default_names(rank)
        return FreeGroupOracle(Alphabet(gens))
    if kind == "bs":
        if not arg.isdigit() or int(arg) < 1:
            raise UsageError(f"bs oracle needs a positive integer, got {arg!r}")
        alpha = Alphabet(names) if names is not None and len(names) == 2 else Alphabet("ab")
        return BSOracle(int(arg), alpha)
    if kind == "rw":
        try:
            with open(arg, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise DataError(f"cannot read rules file {arg}: {exc.strerror or exc}") from None
        try:
            alpha, rules, confluent = parse_rules(text, Alphabet(names) if names is not None else None)
        except ValueError as exc:
            raise DataError(f"{arg}: {exc}") from None
        return RewritingOracle(alpha, rules, confluent_terminating=confluent)
    raise UsageError(f"unknown oracle {spec!r} (expected auto, fg:, bs:, rw: or fp:)")


def _rank_of(spec: str) -> int:
    kind, _, arg = spec.partition(":")
    if kind == "fg":
        return len(arg.split("+")) if not arg.isdigit() else int(arg)
    if kind == "bs":
        return 2
    if kind == "rw":
        return len(_atomic_oracle(spec, None).alphabet)
    raise UsageError(f"unknown oracle {spec!r}")


def auto_oracle(p: pres.Presentation) -> GroupOracle:
    g = pres.group_image(p)
    if pres.freely_trivial(p):
        return FreeGroupOracle(p.alphabet)
    rels = [free_reduce(r) for r in g.relators]
    rels = [r for r in rels if r]
    if p.rank == 2 and len(rels) == 1:
        for n in range(1, 64):
            if rels[0] == pres.fixture_bs(n).relations[0][0]:
                return BSOracle(n, p.alphabet)
    sub = eliminate_generator_oracle(g)
    if sub is not None:
        return sub
    raise UsageError("no built-in oracle for this group; pass --oracle")


def _parse_map(text: str, src: Alphabet, dst: Alphabet, what: str) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, eq, word = item.partition("=")
        name = name.strip()
        if not eq or name not in src.index:
            raise UsageError(f"bad {what} entry {item!r}")
        try:
            out[name] = dst.parse(word)
        except WordSyntaxError as exc:
            raise UsageError(f"bad {what} entry {item!r}: {exc}") from None
    return out


def resolve_oracle(spec: Optional[str], p: pres.Presentation, oracle_map: Optional[str] = None,
                   oracle_inverse: Optional[str] = None) -> GroupOracle:
    names = list(p.generators)
    if spec in (None, "auto"):
        if oracle_map:
            raise UsageError("--oracle-map needs an explicit --oracle")
        return auto_oracle(p)
    if spec.startswith("fp:"):
        parts = spec[3:].split(",")
        if len(parts) != 2:
            raise UsageError("fp oracle takes exactly two factors: fp:<spec>,<spec>")
        r1 = _rank_of(parts[0])
        o1 = _atomic_oracle(parts[0], names[:r1] if not oracle_map else None)
        o2 = _atomic_oracle(parts[1], names[r1:] if not oracle_map else None)
        try:
            base: GroupOracle = FreeProductOracle(o1, o2)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        base = _atomic_oracle(spec, names)
    if oracle_map is None:
        if tuple(base.alphabet.names) != p.generators:
            raise UsageError(f"oracle generators {' '.join(base.alphabet.names)} do not match the presentation; "
                             "give --oracle-map")
        return base
    images = {n: (base.alphabet.gen(n),) for n in names if n in base.alphabet.index}
    images.update(_parse_map(oracle_map, p.alphabet, base.alphabet, "--oracle-map"))
    pre = {n: (p.alphabet.gen(n),) for n in base.alphabet.names if n in p.alphabet.index}
    if oracle_inverse:
        pre.update(_parse_map(oracle_inverse, base.alphabet, p.alphabet, "--oracle-inverse"))
    missing = [n for n in names if n not in images] + [n for n in base.alphabet.names if n not in pre]
    if missing:
        raise UsageError(f"--oracle-map/--oracle-inverse leave {' '.join(missing)} unmapped")
    return SubstitutionOracle(p.alphabet, base, images, pre)


def budget(args) -> stephen.Budget:
    if args.rounds < 1 or args.vertices < 1:
        raise UsageError("--rounds and --vertices must be at least 1")
    return stephen.Budget(args.rounds, args.vertices)


def emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def report(result: TriBool) -> int:
    print(result)
    return result.exit_code


def approximant_json(a: stephen.Approximant, alphabet: Alphabet) -> str:
    g = a.graph
    doc = {"vertices": g.n, "alpha": g.alpha, "beta": g.beta, "rounds": a.rounds_done,
           "saturated": a.saturated, "limit": a.limit_hit, "word": alphabet.format(a.source_word),
           "edges": [[u, alphabet.names[x >> 1], v] for u, x, v in g.edges]}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------- commands

def cmd_stephen(args) -> int:
    p = load_presentation(args.presentation)
    b = budget(args)
    if args.action == "approx":
        w = parse_word(p, args.word, "word")
        a = stephen.approximate(p, w, b)
        if args.dot:
            emit(a.to_dot(p.alphabet), args.dot)
        if args.json:
            emit(approximant_json(a, p.alphabet), args.json)
        if args.format == "dot":
            emit(a.to_dot(p.alphabet), None)
        elif args.format == "json":
            emit(approximant_json(a, p.alphabet), None)
        else:
            print(f"vertices {a.graph.n}  edges {len(a.graph.edges)}  rounds {a.rounds_done}  "
                  f"saturated {str(a.saturated).lower()}  limit {a.limit_hit or '-'}")
        return 0
    oracle = resolve_oracle(args.oracle, p, args.oracle_map, args.oracle_inverse) if args.oracle else None
    refuter = stephen.munn_refuter(p) if not p.relations else None
    if args.action == "test-geq":
        return report(stephen.test_geq(p, parse_word(p, args.u, "-u"), parse_word(p, args.word, "-w"), b))
    if args.action == "test-equal":
        return report(stephen.test_equal(p, parse_word(p, args.u, "-u"), parse_word(p, args.word, "-w"), b,
                                         oracle, refuter))
    if args.action == "right-unit":
        return report(stephen.test_right_unit(p, parse_word(p, args.word, "-w"), b, oracle, refuter))
    raise UsageError(args.action)


def cmd_distortion(args) -> int:
    p = load_presentation(args.presentation)
    geometry.require_e_unitary(p)
    o = resolve_oracle(args.oracle, p, args.oracle_map, args.oracle_inverse)
    table = geometry.distortion_profile(p, parse_word(p, args.word, "word"), o, budget(args), args.radius)
    if args.json:
        emit(table.to_json(p.alphabet), args.json)
    emit(table.to_json(p.alphabet) if args.format == "json" else table.to_text(p.alphabet), None)
    return 0


def _max_fn(p: pres.Presentation, args, b: stephen.Budget):
    z, y = pres.split_generators(p)
    if z and y:
        frag = pres.fragment(p, z)
        o = resolve_oracle(args.oracle, frag, args.oracle_map, args.oracle_inverse)
        return lambda w: finverse.free_product_max(p, w, o, b, args.max_radius)
    if not z:
        return lambda w: finverse.free_product_max(p, w, None, b)
    o = resolve_oracle(args.oracle, p, args.oracle_map, args.oracle_inverse)
    return lambda w: finverse.sprawling_max(p, w, o, b, args.max_radius)


def cmd_finverse(args) -> int:
    p = load_presentation(args.presentation)
    geometry.require_e_unitary(p)
    b = budget(args)
    fmt = p.alphabet.format
    if args.action == "max":
        res = _max_fn(p, args, b)(parse_word(p, args.g, "-g"))
        if res is None:
            print("unknown: no maximum found within budget")
            return 2
        print(fmt(res.representative))
        print(f"sigma: {fmt(res.sigma_class)}")
        print(f"budget: rounds<={b.max_rounds} vertices<={b.max_vertices} radius {res.radius}")
        if res.certificate:
            print("path: " + " -> ".join(f"[{fmt(v)}]" for v in res.certificate))
        return 0
    if args.action == "wedge":
        o = resolve_oracle(args.oracle, p, args.oracle_map, args.oracle_inverse)
        s, t = parse_word(p, args.s, "-s"), parse_word(p, args.t, "-t")
        try:
            w = finverse.wedge_upper_bound(p, s, t, o, b)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        if w is None:
            print("unknown: no common upper bound found within budget")
            return 2
        print(fmt(w))
        return 0
    if args.action == "phi":
        fn = _max_fn(p, args, b)

        def rep(w):
            r = fn(w)
            return None if r is None else r.representative

        print(finverse.phi_from_max(p, rep, args.n))
        return 0
    raise UsageError(args.action)


def _right_unit_tester(p: pres.Presentation, args, b: stephen.Budget) -> stephen.RightUnitTester:
    if args.right_unit_rules:
        try:
            with open(args.right_unit_rules, encoding="utf-8") as fh:
                alpha, rules, confluent = parse_rules(fh.read(), p.alphabet)
        except OSError as exc:
            raise DataError(f"cannot read {args.right_unit_rules}: {exc.strerror or exc}") from None
        except ValueError as exc:
            raise DataError(str(exc)) from None
        system = RewritingOracle(p.alphabet, rules, confluent_terminating=confluent, free_reduction=False)
        return stephen.RewritingRightUnitTester(system)
    if p.rank == 1 and len(p.relations) == 1 and p.relations[0] in (((0, 1), ()), ((), (0, 1))):
        return stephen.bicyclic_right_unit_tester()
    refuter = stephen.munn_refuter(p) if not p.relations else None
    return stephen.StephenRightUnitTester(p, b, refuter=refuter)


def cmd_prefix(args) -> int:
    p = load_presentation(args.presentation)
    o = resolve_oracle(args.oracle, p, args.oracle_map, args.oracle_inverse)
    b = budget(args)
    phi = geometry.PHI_PRESETS[args.phi] if args.phi else None
    tester = _right_unit_tester(p, args, b) if phi else None
    try:
        result = geometry.prefix_membership(p, parse_word(p, args.g, "-g"), o, phi, tester, b, args.radius)
    except ValueError as exc:
        if isinstance(exc, geometry.EUnitaryRequired):
            raise
        raise DataError(str(exc)) from None
    return report(result)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_json(cls, path: str):
    try:
        return cls.from_json(_read(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: {exc}") from None


def cmd_propa(args) -> int:
    if args.action == "check":
        space = _load_json(propa.FinExtMetric, args.X)
        w = _load_json(propa.Witness, args.witness)
        rep = propa.check_witness(space, w, args.tol)
        print(rep.summary())
        return 0 if rep.ok else 1
    X = _load_json(propa.FinExtMetric, args.X)
    Y = _load_json(propa.FinExtMetric, args.Y)
    w = _load_json(propa.Witness, args.witness)
    try:
        doc = json.loads(_read(args.map))
        f = doc["f"] if isinstance(doc, dict) else doc
        cm = propa.analyze_contraction(X, Y, [int(v) for v in f])
        tr = propa.transport(cm, w, exact=args.exact)
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(str(exc)) from None
    # exact sums are only exact when the input weights were rational to begin with
    rational = all(not isinstance(v, float) for vec in w.xi for v in vec.values())
    rep = propa.check_witness(X, tr.witness, 0 if args.exact and rational else args.tol)
    emit(tr.witness.to_json(), args.output)
    print(f"k={cm.k} c={tr.c} S'={propa._num_out(tr.witness.S)}: {rep.summary()}", file=sys.stderr)
    return 0 if rep.ok else 1


def _words(a: Alphabet, text: str) -> list:
    return [a.parse(s) for s in text.split(",") if s.strip()]


def cmd_fixture(args) -> int:
    try:
        if args.name == "scary":
            p = pres.fixture_onerelator_scary()
        elif args.name == "bs":
            p = pres.fixture_bs(args.n)
        elif args.name == "gray":
            xs = args.x.split()
            xa = Alphabet(xs)
            p = pres.fixture_gray(xs, _words(xa, args.relators), _words(xa, args.s), args.t)
        elif args.name == "clifford":
            ga, ha = Alphabet(args.g_gens.split()), Alphabet(args.h_gens.split())
            g = pres.GroupPresentation(ga.names, tuple(_words(ga, args.g_relators)))
            h = pres.GroupPresentation(ha.names, tuple(_words(ha, args.h_relators)))
            emb = dict(item.split("=") for item in args.embed.split(",") if item.strip())
            p = pres.fixture_clifford(g, h, {k.strip(): v.strip() for k, v in emb.items()}, args.e)
        else:
            raise UsageError(args.name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    emit(p.format(), args.output)
    return 0


# ---------------------------------------------------------------- parser

def _common(sp, oracle=True, words=True):
    sp.add_argument("-p", "--presentation", required=True, help=".imp presentation file")
    sp.add_argument("--rounds", type=int, default=10, help="Stephen round budget")
    sp.add_argument("--vertices", type=int, default=200_000, help="Stephen vertex budget")
    if oracle:
        sp.add_argument("--oracle", default=None, help="auto, fg:<rank>, fg:a+b+u, bs:<n>, rw:<path>, fp:<spec>,<spec>")
        sp.add_argument("--oracle-map", default=None, help="generator images in the oracle group, 'c=b^-1 u b, ...'")
        sp.add_argument("--oracle-inverse", default=None, help="oracle generators as presentation words, 'u=b c b^-1'")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="invgeom", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    groups = ap.add_subparsers(dest="group", required=True, parser_class=_Parser)

    st = groups.add_parser("stephen", help="Stephen approximants and order tests")
    sts = st.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("approx", "test-geq", "test-equal", "right-unit"):
        sp = sts.add_parser(name)
        _common(sp)
        sp.add_argument("-w", "--word", required=True)
        if name in ("test-geq", "test-equal"):
            sp.add_argument("-u", required=True)
        if name == "approx":
            sp.add_argument("--dot", help="write DOT here")
            sp.add_argument("--json", help="write JSON here")
            sp.add_argument("--format", choices=("text", "json", "dot"), default="text")
    st.set_defaults(func=cmd_stephen)

    ds = groups.add_parser("distortion", help="group distortion profiles")
    dss = ds.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = dss.add_parser("profile")
    _common(sp)
    sp.add_argument("-w", "--word", default="")
    sp.add_argument("--radius", type=int, default=4)
    sp.add_argument("--json", help="write the JSON table here")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    ds.set_defaults(func=cmd_distortion)

    fi = groups.add_parser("finverse", help="maximum elements of sigma-classes")
    fis = fi.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("max", "wedge", "phi"):
        sp = fis.add_parser(name)
        _common(sp)
        sp.add_argument("--max-radius", type=int, default=None)
        if name == "max":
            sp.add_argument("-g", required=True)
        elif name == "wedge":
            sp.add_argument("-s", required=True)
            sp.add_argument("-t", required=True)
        else:
            sp.add_argument("-n", type=int, required=True)
    fi.set_defaults(func=cmd_finverse)

    pf = groups.add_parser("prefix", help="prefix monoid membership")
    pfs = pf.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = pfs.add_parser("member")
    _common(sp)
    sp.add_argument("-g", required=True)
    sp.add_argument("--phi", choices=sorted(geometry.PHI_PRESETS), default=None)
    sp.add_argument("--radius", type=int, default=None)
    sp.add_argument("--right-unit-rules", default=None, help="monoid rewriting rules deciding right units")
    pf.set_defaults(func=cmd_prefix)

    pa = groups.add_parser("propa", help="Property-A witnesses")
    pas = pa.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = pas.add_parser("check")
    sp.add_argument("-X", required=True)
    sp.add_argument("-w", "--witness", required=True)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp = pas.add_parser("transport")
    sp.add_argument("-X", required=True)
    sp.add_argument("-Y", required=True)
    sp.add_argument("-f", "--map", required=True)
    sp.add_argument("-w", "--witness", required=True)
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--exact", action="store_true", help="rational arithmetic")
    sp.add_argument("--tol", type=float, default=1e-9)
    pa.set_defaults(func=cmd_propa)

    fx = groups.add_parser("fixture", help="print a named presentation")
    fx.add_argument("name", choices=("scary", "bs", "gray", "clifford"))
    fx.add_argument("-n", type=int, default=2, help="bs: the exponent")
    fx.add_argument("--x", default="x", help="gray: generator names")
    fx.add_argument("--relators", default="", help="gray: group relators, comma separated")
    fx.add_argument("--s", default="x", help="gray: s-words, comma separated")
    fx.add_argument("--t", default="t")
    fx.add_argument("--g-gens", default="y")
    fx.add_argument("--g-relators", default="")
    fx.add_argument("--h-gens", default="x")
    fx.add_argument("--h-relators", default="")
    fx.add_argument("--embed", default="x=y")
    fx.add_argument("--e", default="e")
    fx.add_argument("-o", "--output", default=None)
    fx.set_defaults(func=cmd_fixture)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help and on usage errors
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"invgeom: {exc}", file=sys.stderr)
        return EX_USAGE
    except DataError as exc:
        print(f"invgeom: {exc}", file=sys.stderr)
        return EX_DATAERR
    except geometry.EUnitaryRequired as exc:
        print(f"invgeom: {exc}", file=sys.stderr)
        return EX_NOEUNITARY
    except OracleUnknownError as exc:
        print(f"invgeom: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.debug("internal error", exc_info=True)
        print(f"invgeom: internal error: {exc}", file=sys.stderr)
        return EX_SOFTWARE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
