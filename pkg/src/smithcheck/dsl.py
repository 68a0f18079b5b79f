"""Text syntax for cohomology classes, bundles and spectra.

Grammar (EBNF)::

    element   = monomial { "+" monomial } ;
    monomial  = mfactor { "*" mfactor } ;
    mfactor   = "0" | "1" | NAME [ "^" INT ] ;

    bundle    = sum { "[+]" sum } ;
    sum       = unary { ( "+" | "-" ) unary } ;
    unary     = "-" unary | INT "*" unary | atom ;
    atom      = "sigma" | "V_O" INT | "V_SO" INT | "V_U1" | "V_SU2"
              | "R" "^" INT | INT
              | MAP "^" "*" "(" bundle ")"
              | "tensor" "(" bundle "," bundle ")"
              | "virt" "(" [ "-" ] INT "," element ")"
              | "(" bundle ")" ;
    MAP       = "phi" | "phi_inv" | "i1" | "i2" | "p" | "basepoint" ;

    spectrum  = satom { "^" satom } ;
    satom     = NAMED | "S" | "Sphere"
              | "Thom" "(" space "," bundle ")"
              | "Plus" "(" space ")" | "Reduced" "(" space ")"
              | "Susp" "(" [ "-" ] INT "," spectrum ")"
              | "Smash" "(" spectrum { "," spectrum } ")"
              | "Wedge" "(" spectrum { "," spectrum } ")"
              | "(" spectrum ")" ;
    space     = SPACE { "x" SPACE } ;
    SPACE     = "BZ2" | "BO" INT | "BSO" INT | "BU1" | "BSU2" | "BHPinf" | "pt" ;
    NAMED     = "MTSpin" | "MTSpinC" | "MTSpinH" | "MTSpinZ4" | "MTPinMinus"
              | "MTPinPlus" | "MTPinC" | "MTPinHplus" | "MTPinHminus" ;

``virt(r, w)`` is an explicit rank and total class; it is only legal inside
``Thom(space, ...)`` and lives over that space.  A bundle's base is
inferred from its atoms; ``+`` and ``-`` need a common
base (trivial bundles adapt), ``[+]`` forms the product base.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import bundles as B
from .f2algebra import DEFAULT_TRUNCATION, F2Element, RingSpec, UnitSeries
from .spectra import (
    NAMED_TAGS,
    Named,
    Plus,
    Reduced,
    Smash,
    SpectrumExpr,
    Sphere,
    Suspend,
    Thom,
    Wedge,
)


class DslError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"parse error at line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # INT, NAME, OP, EOF
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"\s+|(?P<ext>\[\+\])|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*'*)|(?P<op>[-+*^(),])")


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise DslError(f"unexpected character {text[pos]!r}", line, col)
        if m.group("ext"):
            tokens.append(Token("OP", "[+]", line, col))
        elif m.group("int"):
            tokens.append(Token("INT", m.group("int"), line, col))
        elif m.group("name"):
            tokens.append(Token("NAME", m.group("name"), line, col))
        elif m.group("op"):
            tokens.append(Token("OP", m.group("op"), line, col))
        else:
            chunk = m.group(0)
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, context: B.Space | None = None):
        self.tokens = tokenize(text)
        self.i = 0
        # base space that virt(...) atoms refer to
        self.context = context

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise DslError(f"expected {expected}, found {found}", t.line, t.column)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("OP", "NAME") and self.tok.text == text

    def eat(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def int_(self) -> int:
        if self.tok.kind != "INT":
            self.fail("an integer")
        v = int(self.tok.text)
        self.i += 1
        return v

    def name(self) -> str:
        if self.tok.kind != "NAME":
            self.fail("a name")
        v = self.tok.text
        self.i += 1
        return v

    def end(self):
        if self.tok.kind != "EOF":
            self.fail("end of input")


# -- elements -----------------------------------------------------------------

def _element(p: _Parser, ring: RingSpec) -> F2Element:
    total = ring.zero()
    while True:
        mono = ring.one()
        while True:
            t = p.tok
            if t.kind == "INT":
                v = p.int_()
                if v not in (0, 1):
                    raise DslError("coefficients live in F2; only 0 and 1 are allowed", t.line, t.column)
                factor = ring.one() if v == 1 else ring.zero()
            else:
                name = p.name()
                if name not in ring.names:
                    raise DslError(f"unknown generator {name!r} for {ring}", t.line, t.column)
                exp = 1
                if p.at("^"):
                    p.eat("^")
                    exp = p.int_()
                factor = ring.gen(name) ** exp
            mono = mono * factor
            if not p.at("*"):
                break
            p.eat("*")
        total = total + mono
        if not p.at("+"):
            break
        p.eat("+")
    return total


def parse_element(ring: RingSpec, text: str) -> F2Element:
    p = _Parser(text)
    x = _element(p, ring)
    p.end()
    return x


# -- bundle syntax trees ----------------------------------------------------------

class BundleAst:
    pass


@dataclass(frozen=True)
class BAtom(BundleAst):
    name: str


@dataclass(frozen=True)
class BTrivial(BundleAst):
    k: int


@dataclass(frozen=True)
class BNeg(BundleAst):
    arg: BundleAst


@dataclass(frozen=True)
class BAdd(BundleAst):
    left: BundleAst
    right: BundleAst


@dataclass(frozen=True)
class BSub(BundleAst):
    left: BundleAst
    right: BundleAst


@dataclass(frozen=True)
class BScale(BundleAst):
    k: int
    arg: BundleAst


@dataclass(frozen=True)
class BExt(BundleAst):
    left: BundleAst
    right: BundleAst


@dataclass(frozen=True)
class BPull(BundleAst):
    map: str
    arg: BundleAst


@dataclass(frozen=True)
class BTensor(BundleAst):
    arg: BundleAst
    line: BundleAst


@dataclass(frozen=True)
class BVirt(BundleAst):
    """Explicit (rank, total class) over the surrounding Thom base."""

    rank: int
    w: str


_ATOM_RE = re.compile(r"^(sigma|V_U1|V_SU2|V_O\d+|V_SO\d+)$")
MAP_NAMES = ("phi", "phi_inv", "i1", "i2", "p", "basepoint")


def _bundle(p: _Parser) -> BundleAst:
    left = _sum(p)
    while p.at("[+]"):
        p.eat("[+]")
        left = BExt(left, _sum(p))
    return left


def _sum(p: _Parser) -> BundleAst:
    left = _unary(p)
    while p.at("+") or p.at("-"):
        op = p.eat(p.tok.text).text
        right = _unary(p)
        left = BAdd(left, right) if op == "+" else BSub(left, right)
    return left


def _unary(p: _Parser) -> BundleAst:
    if p.at("-"):
        p.eat("-")
        return BNeg(_unary(p))
    if p.tok.kind == "INT" and p.peek().text == "*" and p.peek().kind == "OP":
        k = p.int_()
        p.eat("*")
        return BScale(k, _unary(p))
    return _batom(p)


def _batom(p: _Parser) -> BundleAst:
    t = p.tok
    if t.kind == "INT":
        return BTrivial(p.int_())
    if p.at("("):
        p.eat("(")
        inner = _bundle(p)
        p.eat(")")
        return inner
    if t.kind != "NAME":
        p.fail("a bundle")
    name = t.text
    if name == "R":
        p.eat("R")
        p.eat("^")
        return BTrivial(p.int_())
    if name == "virt":
        p.name()
        if p.context is None:
            raise DslError("virt(...) needs a base; use it inside Thom(space, ...)", t.line, t.column)
        p.eat("(")
        sign = 1
        if p.at("-"):
            p.eat("-")
            sign = -1
        rank = sign * p.int_()
        p.eat(",")
        w = _element(p, p.context.cohomology)
        p.eat(")")
        if w.constant_term() != 1:
            raise DslError("total class must have constant term 1", t.line, t.column)
        return BVirt(rank, str(w))
    if name == "tensor":
        p.eat("tensor")
        p.eat("(")
        arg = _bundle(p)
        p.eat(",")
        line = _bundle(p)
        p.eat(")")
        return BTensor(arg, line)
    if name in MAP_NAMES and p.peek().text == "^":
        p.name()
        p.eat("^")
        p.eat("*")
        p.eat("(")
        arg = _bundle(p)
        p.eat(")")
        return BPull(name, arg)
    if _ATOM_RE.match(name):
        p.name()
        return BAtom(name)
    p.fail("a bundle atom (sigma, V_O<n>, V_SO<n>, V_U1, V_SU2, R^<k>, ...)")


def parse_bundle_ast(text: str, context: B.Space | None = None) -> BundleAst:
    p = _Parser(text, context)
    ast = _bundle(p)
    p.end()
    return ast


def _level(ast: BundleAst) -> int:
    # binding strength: [+] < +/- < unary < atom
    if isinstance(ast, BExt):
        return 0
    if isinstance(ast, (BAdd, BSub)):
        return 1
    if isinstance(ast, (BNeg, BScale)):
        return 2
    return 3


def print_bundle(ast: BundleAst) -> str:
    def at_least(a, level):
        s = print_bundle(a)
        return s if _level(a) >= level else f"({s})"

    if isinstance(ast, BAtom):
        return ast.name
    if isinstance(ast, BTrivial):
        return f"R^{ast.k}"
    if isinstance(ast, BNeg):
        return f"-{at_least(ast.arg, 2)}"
    if isinstance(ast, BScale):
        return f"{ast.k}*{at_least(ast.arg, 2)}"
    if isinstance(ast, (BAdd, BSub)):
        op = "+" if isinstance(ast, BAdd) else "-"
        return f"{at_least(ast.left, 1)} {op} {at_least(ast.right, 2)}"
    if isinstance(ast, BExt):
        return f"{at_least(ast.left, 0)} [+] {at_least(ast.right, 1)}"
    if isinstance(ast, BPull):
        return f"{ast.map}^*({print_bundle(ast.arg)})"
    if isinstance(ast, BTensor):
        return f"tensor({print_bundle(ast.arg)}, {print_bundle(ast.line)})"
    if isinstance(ast, BVirt):
        return f"virt({ast.rank}, {ast.w})"
    raise TypeError(ast)


def _same_base(E: B.VirtualBundle, F: B.VirtualBundle, op: str):
    if E.base != F.base and not E.base.is_point() and not F.base.is_point():
        raise B.BaseMismatchError(
            f"base mismatch under '{op}': {E.base} vs {F.base} (use [+] for an external sum)")


def eval_bundle(ast: BundleAst, truncation: int = DEFAULT_TRUNCATION,
                context: B.Space | None = None) -> B.VirtualBundle:
    ev = lambda a: eval_bundle(a, truncation, context)  # noqa: E731
    if isinstance(ast, BVirt):
        if context is None:
            raise B.BundleError("virt(...) needs a base space")
        w = parse_element(context.cohomology, ast.w)
        return B.VirtualBundle(context, ast.rank, UnitSeries(w), print_bundle(ast))
    if isinstance(ast, BAtom):
        n = ast.name
        if n == "sigma":
            return B.sigma(truncation)
        if n == "V_U1":
            return B.tautological_U1(truncation)
        if n == "V_SU2":
            return B.tautological_SU2(truncation)
        if n.startswith("V_SO"):
            return B.tautological_SO(int(n[4:]), truncation)
        return B.tautological_O(int(n[3:]), truncation)
    if isinstance(ast, BTrivial):
        return B.trivial(ast.k, B.Space((), truncation))
    if isinstance(ast, BNeg):
        out = B.negate(ev(ast.arg))
    elif isinstance(ast, BScale):
        out = B.scale(ast.k, ev(ast.arg))
    elif isinstance(ast, (BAdd, BSub)):
        E, F = ev(ast.left), ev(ast.right)
        op = "+" if isinstance(ast, BAdd) else "-"
        _same_base(E, F, op)
        out = B.whitney_sum(E, F if op == "+" else B.negate(F))
    elif isinstance(ast, BExt):
        out = B.external_sum(ev(ast.left), ev(ast.right))
    elif isinstance(ast, BPull):
        out = B.pullback(B.catalog_maps(truncation)[ast.map], ev(ast.arg))
    elif isinstance(ast, BTensor):
        out = B.tensor_line(ev(ast.arg), ev(ast.line))
    else:
        raise TypeError(ast)
    return out.relabel(print_bundle(ast))


def parse_bundle(text: str, truncation: int = DEFAULT_TRUNCATION,
                 context: B.Space | None = None) -> B.VirtualBundle:
    """Parse and evaluate; ``context`` is the base that virt(...) refers to."""
    if context is not None:
        truncation = context.truncation
    return eval_bundle(parse_bundle_ast(text, context), truncation, context)


# -- spectra ---------------------------------------------------------------------

def _space(p: _Parser, truncation: int) -> B.Space:
    factors = []
    while True:
        t = p.tok
        name = p.name()
        try:
            B.canonical_factor(name)
        except ValueError:
            raise DslError(f"unknown classifying space {name!r}", t.line, t.column) from None
        factors.append(name)
        if not p.at("x"):
            break
        p.eat("x")
    return B.Space(tuple(factors), truncation)


def _spectrum(p: _Parser, truncation: int) -> SpectrumExpr:
    factors = [_satom(p, truncation)]
    while p.at("^"):
        p.eat("^")
        factors.append(_satom(p, truncation))
    return factors[0] if len(factors) == 1 else Smash(tuple(factors))


def _spectrum_list(p: _Parser, truncation: int) -> tuple:
    items = [_spectrum(p, truncation)]
    while p.at(","):
        p.eat(",")
        items.append(_spectrum(p, truncation))
    return tuple(items)


def _satom(p: _Parser, truncation: int) -> SpectrumExpr:
    t = p.tok
    if p.at("("):
        p.eat("(")
        inner = _spectrum(p, truncation)
        p.eat(")")
        return inner
    if t.kind != "NAME":
        p.fail("a spectrum")
    name = t.text
    if name in NAMED_TAGS:
        p.name()
        return Named(name)
    if name in ("S", "Sphere"):
        p.name()
        return Sphere()
    if name == "Thom":
        p.name()
        p.eat("(")
        X = _space(p, truncation)
        p.eat(",")
        bt = p.tok
        p.context = X
        V = eval_bundle(_bundle(p), truncation, X)
        p.context = None
        p.eat(")")
        try:
            return Thom(X, V)
        except B.BaseMismatchError as exc:
            raise DslError(str(exc), bt.line, bt.column) from None
    if name in ("Plus", "Reduced"):
        p.name()
        p.eat("(")
        X = _space(p, truncation)
        p.eat(")")
        return Plus(X) if name == "Plus" else Reduced(X)
    if name == "Susp":
        p.name()
        p.eat("(")
        sign = 1
        if p.at("-"):
            p.eat("-")
            sign = -1
        k = sign * p.int_()
        p.eat(",")
        inner = _spectrum(p, truncation)
        p.eat(")")
        return Suspend(k, inner)
    if name in ("Smash", "Wedge"):
        p.name()
        p.eat("(")
        items = _spectrum_list(p, truncation)
        p.eat(")")
        return Smash(items) if name == "Smash" else Wedge(items)
    p.fail("a spectrum (MTSpin..., S, Thom(...), Plus(...), Reduced(...), Susp(...), Smash(...), Wedge(...))")


def parse_spectrum(text: str, truncation: int = DEFAULT_TRUNCATION) -> SpectrumExpr:
    p = _Parser(text)
    try:
        e = _spectrum(p, truncation)
    except B.BaseMismatchError as exc:
        t = p.tok
        raise DslError(str(exc), t.line, t.column) from None
    p.end()
    return e


def parse_space(text: str, truncation: int = DEFAULT_TRUNCATION) -> B.Space:
    p = _Parser(text)
    X = _space(p, truncation)
    p.end()
    return X
