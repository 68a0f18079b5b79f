"""Command-line front end.

Exit codes: 0 pass, 1 verification failure or nothing found, 2 usage or
parse error.  JSON output is deterministic and carries ``"schema": 1``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import bundles as B
from . import catalog as cat
from . import ranks as R
from . import rewriter as RW
from .dsl import DslError, parse_bundle, parse_space, parse_spectrum
from .f2algebra import DEFAULT_TRUNCATION
from .spectra import to_text

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


# -- subcommands ---------------------------------------------------------------

def cmd_classify(args) -> int:
    E = parse_bundle(args.bundle, args.truncation)
    tag = B.classify(E)
    payload = {"schema": 1, "bundle": E.label, "base": str(E.base), "rank": E.rank,
               "w": str(E.total_sw), **tag.to_json()}
    lines = [f"{E.label} over {E.base}, rank {E.rank}",
             f"  w = {E.total_sw}",
             f"  w1 = {tag.w1}, w2 = {tag.w2}, w2 + w1^2 = {tag.w2_plus_w1sq}",
             f"  structures: {', '.join(tag.tags)}"]
    code = EXIT_PASS
    if args.versus is not None:
        F = parse_bundle(args.versus, args.truncation)
        eq = B.twist_equivalent(E, F)
        payload["versus"] = {"bundle": F.label, "equivalent": eq.equivalent,
                             "difference": {"rank": eq.difference.rank, "w": str(eq.difference.total_sw)},
                             "reason": eq.reason}
        lines.append(f"  twist-equivalent to {F.label}: {'yes' if eq else 'no'}"
                     + (f" ({eq.reason})" if eq.reason else f" (F - E has w = {eq.difference.total_sw})"))
        code = EXIT_PASS if eq else EXIT_FAIL
    _emit(args, payload, "\n".join(lines))
    return code


def cmd_verify_lemma(args) -> int:
    if args.lemma not in B.LEMMAS:
        raise UsageError(f"unknown lemma {args.lemma!r}; choose from {', '.join(sorted(B.LEMMAS))}")
    rep = B.verify_lemma(args.lemma, args.truncation)
    _emit(args, rep.to_json(), rep.render())
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _certificate_output(args, cert: RW.Certificate, title: str) -> int:
    rep = cert.replay()
    payload = {"schema": 1, "found": True, "replay": rep.ok, "message": rep.message,
               "certificate": cert.to_json()}
    text = f"{title}\n{cert.render()}\n  replay: {'ok' if rep.ok else 'FAILED'} ({rep.message})"
    _emit(args, payload, text)
    return EXIT_PASS if rep.ok else EXIT_FAIL


def cmd_equiv(args) -> int:
    e1 = parse_spectrum(args.lhs, args.truncation)
    e2 = parse_spectrum(args.rhs, args.truncation)
    res = RW.check_equivalence(e1, e2, args.depth, args.truncation)
    if not res:
        _emit(args, res.to_json(),
              f"no rule chain of at most {res.depth} steps from {to_text(e1)} to {to_text(e2)} "
              f"({res.explored} states explored); this is not a proof of inequivalence")
        return EXIT_FAIL
    return _certificate_output(args, res, f"{to_text(e1)} ~ {to_text(e2)} "
                                          f"({res.rule_count} primary rule applications)")


def cmd_rewrite(args) -> int:
    if args.replay:
        try:
            cert = RW.Certificate.from_json(json.loads(Path(args.expr).read_text()))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read certificate {args.expr}: {exc}") from None
        return _certificate_output(args, cert, f"replaying {to_text(cert.start)} ~ {to_text(cert.end)}")
    e = parse_spectrum(args.expr, args.truncation)
    cert = RW.normalize_certificate(e, args.truncation)
    return _certificate_output(args, cert, f"normal form of {to_text(e)}: {to_text(cert.end)}")


def cmd_fibseq(args) -> int:
    X = parse_space(args.space, args.truncation)
    V = parse_bundle(args.V, args.truncation, context=X)
    W = parse_bundle(args.W, args.truncation, context=X)
    try:
        fs = RW.smith_fiber_sequence(X, V, W)
    except RW.FiberSequenceError as exc:
        _emit(args, {"schema": 1, "found": False, "error": str(exc)}, f"no fiber sequence: {exc}")
        return EXIT_FAIL
    _emit(args, {"schema": 1, "found": True, **fs.to_json()}, f"{fs.render()}\n  {fs.provenance}")
    return EXIT_PASS


def cmd_verify(args) -> int:
    if args.which == "main-thm":
        rep = RW.verify_main_theorem(args.truncation)
    else:
        rep = RW.verify_spinc_spinh_sequence(args.truncation, args.depth)
    _emit(args, rep.to_json(), rep.render())
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_ranks(args) -> int:
    if args.max_degree < 0:
        raise UsageError("--max-degree must be >= 0")
    if args.theory not in R.THEORIES:
        raise UsageError(f"unknown theory {args.theory!r}; choose from {', '.join(R.THEORIES)}")
    s = R.bordism_ranks(args.theory, args.max_degree)
    degrees = list(range(args.max_degree + 1))
    ranks = [s[d] for d in degrees]
    payload = {"schema": 1, "theory": args.theory, "degrees": degrees, "ranks": ranks}
    text = "\n".join([f"rational ranks of {args.theory} through degree {args.max_degree}"]
                     + [f"  {d:4d}: {r}" for d, r in zip(degrees, ranks)])
    _emit(args, payload, text)
    return EXIT_PASS


def cmd_rank_equality(args) -> int:
    if args.kmax < 0:
        raise UsageError("--kmax must be >= 0")
    rep = R.verify_rank_equality(args.kmax, trials=args.trials, seed=args.seed)
    _emit(args, rep.to_json(), rep.render())
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _les_term(value, name: str, cutoff: int):
    if value is None:
        return None
    if isinstance(value, str):
        value = {"theory": value}
    if not isinstance(value, dict) or len(value) != 1:
        raise UsageError(f"LES term {name} must be a theory name, null, or a one-key object")
    (kind, arg), = value.items()
    if kind == "theory":
        if arg not in R.THEORIES:
            raise UsageError(f"LES term {name}: unknown theory {arg!r}")
        return R.bordism_ranks(arg, cutoff)
    if kind == "series":
        return R.series(arg)
    if kind == "zero":
        return R.VanishingPattern.zero()
    if kind == "nonzero_everywhere":
        return R.VanishingPattern.everywhere()
    if kind == "nonzero_congruence":
        return R.VanishingPattern.congruence(int(arg[0]), int(arg[1]))
    if kind == "nonzero_degrees":
        return R.VanishingPattern.degrees(int(d) for d in arg)
    raise UsageError(f"LES term {name}: unknown kind {kind!r}")


def cmd_les_check(args) -> int:
    try:
        raw = json.loads(Path(args.spec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read LES spec {args.spec}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("LES spec must be a JSON object")
    cutoff = int(raw.get("cutoff", R.DEFAULT_CUTOFF))
    terms = {k: _les_term(raw.get(k), k, cutoff) for k in "ABC"}
    spec = R.LESSpec(terms["A"], terms["B"], terms["C"], int(raw.get("shift", 0)), cutoff)
    modulus = int(raw.get("modulus", 4))
    rep = R.les_forced_iso(spec, lambda n: n % modulus == 0)
    payload = rep.to_json()
    lines = [rep.render()]
    ok = True
    if all(isinstance(t, R.PoincareSeries) for t in terms.values()):
        feas = R.exactness_feasible(terms["A"], terms["B"], terms["C"], spec.shift)
        payload["exactness_feasible"] = feas
        lines.append(f"  rank sequence admits an exact complex: {'yes' if feas else 'NO'}")
        ok = ok and feas
    expect = raw.get("expect_forced")
    if expect is not None:
        missing = sorted(set(int(d) for d in expect) - set(rep.forced_degrees))
        payload["expect_forced_missing"] = missing
        lines.append(f"  expected forced degrees present: {'yes' if not missing else 'NO, missing ' + str(missing)}")
        ok = ok and not missing
    payload["pass"] = ok
    _emit(args, payload, "\n".join(lines))
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_catalog(args) -> int:
    try:
        entries = cat.load_catalog(args.catalog)
    except OSError as exc:
        raise UsageError(f"cannot read catalog: {exc}") from None
    verdicts = []
    for fn in (cat.verify_not_an_isom, cat.verify_hp_remark):
        try:
            verdicts.append(fn(entries))
        except KeyError as exc:
            verdicts.append(cat.Verdict(fn.__name__, "?", "?", True, f"catalog entry missing: {exc.args[0]}"))
    payload = {"schema": 1, "entries": [e.to_json() for e in entries],
               "verdicts": [v.to_json() for v in verdicts]}
    lines = [f"{len(entries)} catalog entries"]
    for e in entries:
        lines.append(f"  {e.name} in degree {e.degree}: {e.group}  [{e.citation}]")
    lines.append("")
    lines.extend(v.render() for v in verdicts)
    _emit(args, payload, "\n".join(lines))
    # both verdicts are non-isomorphisms; anything else means the catalog disagrees
    return EXIT_PASS if all(not v.isomorphic for v in verdicts) else EXIT_FAIL


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--catalog", default=None, metavar="PATH", help="override the bundled group catalog")
    common.add_argument("--depth", type=int, default=RW.DEFAULT_DEPTH, help="search depth for equiv")
    common.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION, help=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="smithcheck", description="Verify twisted spin/pin bordism computations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("classify", parents=[common], help="classes and structures of a bundle")
    s.add_argument("bundle")
    s.add_argument("versus", nargs="?", help="second bundle: test twist equivalence")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("verify-lemma", parents=[common], help="run a named characteristic-class check")
    s.add_argument("lemma", help=", ".join(sorted(B.LEMMAS)))
    s.set_defaults(func=cmd_verify_lemma)

    s = sub.add_parser("equiv", parents=[common], help="search for a rewriting certificate")
    s.add_argument("lhs")
    s.add_argument("rhs")
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("rewrite", parents=[common], help="normal form with certificate, or replay one")
    s.add_argument("expr", help="spectrum expression, or a certificate file with --replay")
    s.add_argument("--replay", action="store_true", help="treat EXPR as a certificate JSON file")
    s.set_defaults(func=cmd_rewrite)

    s = sub.add_parser("fibseq", parents=[common], help="Smith fiber sequence S(W)^V -> X^V -> X^(V+W)")
    s.add_argument("space")
    s.add_argument("V")
    s.add_argument("W")
    s.set_defaults(func=cmd_fibseq)

    s = sub.add_parser("verify", parents=[common], help="end-to-end verifications")
    s.add_argument("which", choices=("main-thm", "spinc-spinh"))
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("ranks", parents=[common], help="rational bordism ranks")
    s.add_argument("theory", help=", ".join(R.THEORIES))
    s.add_argument("--max-degree", type=int, default=32)
    s.set_defaults(func=cmd_ranks)

    s = sub.add_parser("rank-equality", parents=[common], help="Spin^c and Spin^h ranks in degrees 4k")
    s.add_argument("--kmax", type=int, default=64)
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_rank_equality)

    s = sub.add_parser("les-check", parents=[common], help="forced isomorphisms in a long exact sequence")
    s.add_argument("--spec", required=True, metavar="FILE")
    s.set_defaults(func=cmd_les_check)

    s = sub.add_parser("catalog", parents=[common], help="list known groups and catalog verdicts")
    s.set_defaults(func=cmd_catalog)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.depth <= 0:
        print(f"smithcheck: error: {RW.SearchDepthError('invalid search depth')}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, DslError, B.BaseMismatchError, B.BundleError, R.UnderdeterminedError,
            cat.CatalogError, ValueError) as exc:
        print(f"smithcheck: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
