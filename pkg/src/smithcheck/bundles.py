"""Virtual vector bundles over catalog classifying spaces.

A bundle is tracked by its base, integer virtual rank and total
Stiefel-Whitney class.  Sums multiply total classes, negatives invert them,
pullbacks push them through the cohomology substitution of a catalog map.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

from .f2algebra import (
    DEFAULT_TRUNCATION,
    F2Element,
    RingHom,
    RingSpec,
    UnitSeries,
    invert_unit,
    kunneth_with_maps,
)


class BaseMismatchError(ValueError):
    pass


class BundleError(ValueError):
    pass


_FACTOR_RE = re.compile(r"^(BZ2|BU1|BSU2|BHPinf|pt|BO(\d+)|BSO(\d+))$")


def canonical_factor(name: str) -> str:
    m = _FACTOR_RE.match(name)
    if not m:
        raise ValueError(f"unknown classifying space {name!r}")
    if name == "BHPinf":
        # HP^infinity is BSU_2
        return "BSU2"
    if m.group(2) is not None and int(m.group(2)) < 1:
        raise ValueError("BO_n needs n >= 1")
    if m.group(3) is not None and int(m.group(3)) < 1:
        raise ValueError("BSO_n needs n >= 1")
    return name


def factor_ring(name: str, truncation: int = DEFAULT_TRUNCATION) -> RingSpec:
    name = canonical_factor(name)
    if name == "BZ2":
        gens = [("a", 1)]
    elif name == "BU1":
        gens = [("c", 2)]
    elif name == "BSU2":
        gens = [("e", 4)]
    elif name == "pt":
        gens = []
    elif name.startswith("BSO"):
        n = int(name[3:])
        gens = [(f"w{i}bar", i) for i in range(2, n + 1)]
    else:
        n = int(name[2:])
        gens = [(f"w{i}", i) for i in range(1, n + 1)]
    return RingSpec(tuple(gens), truncation)


@lru_cache(maxsize=None)
def _space_cohomology(factors: tuple[str, ...], truncation: int):
    ring = RingSpec((), truncation)
    incs = []
    for f in factors:
        prod, inc_left, inc_right = kunneth_with_maps(ring, factor_ring(f, truncation))
        incs = [inc_left.compose(i) for i in incs] + [inc_right]
        ring = prod
    return ring, tuple(incs)


@dataclass(frozen=True)
class Space:
    factors: tuple[str, ...] = ()
    truncation: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        if isinstance(self.factors, str):
            raise TypeError("Space factors must be a sequence of names")
        fs = tuple(canonical_factor(f) for f in self.factors)
        object.__setattr__(self, "factors", tuple(f for f in fs if f != "pt"))

    @classmethod
    def parse(cls, text: str, truncation: int = DEFAULT_TRUNCATION) -> Space:
        parts = [p.strip() for p in re.split(r"\s+x\s+|\s*\*\s*", text.strip()) if p.strip()]
        return cls(tuple(parts), truncation)

    @property
    def cohomology(self) -> RingSpec:
        return _space_cohomology(self.factors, self.truncation)[0]

    def factor_inclusion(self, i: int) -> RingHom:
        """Cohomology map induced by the projection onto factor ``i``."""
        return _space_cohomology(self.factors, self.truncation)[1][i]

    def is_point(self) -> bool:
        return not self.factors

    def __mul__(self, other: Space) -> Space:
        return Space(self.factors + other.factors, min(self.truncation, other.truncation))

    def sub(self, start: int, stop: int) -> Space:
        return Space(self.factors[start:stop], self.truncation)

    def projection(self, start: int, stop: int) -> RingHom:
        """Cohomology map of the projection onto factors ``start:stop``."""
        target = self.sub(start, stop)
        images = {}
        for j, i in enumerate(range(start, stop)):
            own = target.factor_inclusion(j)
            mine = self.factor_inclusion(i)
            for name, img in zip(own.source.names, own.images):
                (gen_name,) = _single_generator(img)
                images[gen_name] = mine(mine.source.gen(name))
        return RingHom(target.cohomology, self.cohomology, images)

    def restriction(self, start: int, stop: int) -> RingHom:
        """Cohomology map of the inclusion sub(start, stop) -> self at the basepoint."""
        target = self.sub(start, stop)
        proj = self.projection(start, stop)
        images = {}
        hit = {}
        for name, img in zip(proj.source.names, proj.images):
            (gen_name,) = _single_generator(img)
            hit[gen_name] = target.cohomology.gen(name)
        for name in self.cohomology.names:
            images[name] = hit.get(name, target.cohomology.zero())
        return RingHom(self.cohomology, target.cohomology, images)

    def __str__(self):
        return " x ".join(self.factors) if self.factors else "pt"


def _single_generator(img: F2Element) -> tuple[str]:
    (m,) = img.monomials
    (i,) = [k for k, e in enumerate(m) if e]
    return (img.ring.names[i],)


POINT = Space(())


@dataclass(frozen=True)
class VirtualBundle:
    """Virtual bundle up to its rank and total Stiefel-Whitney class.

    ``label`` is a display name in bundle-DSL syntax; it does not take part
    in equality.
    """

    base: Space
    rank: int
    total_sw: UnitSeries
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.total_sw.ring != self.base.cohomology:
            raise BaseMismatchError("total class lives in the wrong ring")
        if not self.label:
            object.__setattr__(self, "label", f"virt({self.rank}, {self.total_sw})")

    def w(self, k: int) -> F2Element:
        return self.total_sw[k]

    @property
    def w1(self) -> F2Element:
        return self.w(1)

    @property
    def w2(self) -> F2Element:
        return self.w(2)

    def relabel(self, label: str) -> VirtualBundle:
        return VirtualBundle(self.base, self.rank, self.total_sw, label)

    def is_trivial(self) -> bool:
        """Rank 0 with total class 1 (through the truncation degree)."""
        return self.rank == 0 and self.total_sw.total == self.base.cohomology.one()

    def __add__(self, other: VirtualBundle | int) -> VirtualBundle:
        if isinstance(other, int):
            other = trivial(other, self.base)
        return whitney_sum(self, other)

    def __radd__(self, other: int) -> VirtualBundle:
        return trivial(other, self.base) + self

    def __neg__(self) -> VirtualBundle:
        return negate(self)

    def __sub__(self, other: VirtualBundle | int) -> VirtualBundle:
        if isinstance(other, int):
            other = trivial(other, self.base)
        out = whitney_sum(self, negate(other))
        return out.relabel(f"{_paren_left(self.label)} - {_paren(other.label)}")

    def __rmul__(self, k: int) -> VirtualBundle:
        return scale(k, self)

    def __str__(self):
        return self.label

    def describe(self) -> str:
        return f"{self.label} over {self.base}: rank {self.rank}, w = {self.total_sw}"


def _paren(label: str) -> str:
    """Parenthesize a label unless it is a single atom at the top level."""
    if _is_simple(label):
        return label
    return f"({label})"


def _paren_left(label: str) -> str:
    """Left operand of + or -: sums and negations bind tightly enough there."""
    depth = 0
    for i, ch in enumerate(label):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and label.startswith("[+]", i):
            return f"({label})"
    return label


def _is_simple(label: str) -> bool:
    if label.startswith("-"):
        return False
    depth = 0
    for ch in label:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == " " and depth == 0:
            return False
    return True


# -- catalog bundles ---------------------------------------------------------

def trivial(k: int, base: Space = POINT) -> VirtualBundle:
    return VirtualBundle(base, k, UnitSeries.one(base.cohomology), f"R^{k}" if k >= 0 else f"-R^{-k}")


def zero_bundle(base: Space = POINT) -> VirtualBundle:
    return VirtualBundle(base, 0, UnitSeries.one(base.cohomology), "0")


def sigma(truncation: int = DEFAULT_TRUNCATION) -> VirtualBundle:
    X = Space(("BZ2",), truncation)
    R = X.cohomology
    return VirtualBundle(X, 1, UnitSeries(R.one() + R.gen("a")), "sigma")


def tautological_O(n: int, truncation: int = DEFAULT_TRUNCATION) -> VirtualBundle:
    X = Space((f"BO{n}",), truncation)
    R = X.cohomology
    total = R.one()
    for i in range(1, n + 1):
        total = total + R.gen(f"w{i}")
    return VirtualBundle(X, n, UnitSeries(total), f"V_O{n}")


def tautological_SO(n: int, truncation: int = DEFAULT_TRUNCATION) -> VirtualBundle:
    X = Space((f"BSO{n}",), truncation)
    R = X.cohomology
    total = R.one()
    for i in range(2, n + 1):
        total = total + R.gen(f"w{i}bar")
    return VirtualBundle(X, n, UnitSeries(total), f"V_SO{n}")


def tautological_U1(truncation: int = DEFAULT_TRUNCATION) -> VirtualBundle:
    X = Space(("BU1",), truncation)
    R = X.cohomology
    return VirtualBundle(X, 2, UnitSeries(R.one() + R.gen("c")), "V_U1")


def tautological_SU2(truncation: int = DEFAULT_TRUNCATION) -> VirtualBundle:
    X = Space(("BSU2",), truncation)
    R = X.cohomology
    return VirtualBundle(X, 4, UnitSeries(R.one() + R.gen("e")), "V_SU2")


# -- operations --------------------------------------------------------------

def lift(E: VirtualBundle, hom: RingHom, base: Space) -> VirtualBundle:
    return VirtualBundle(base, E.rank, UnitSeries(hom(E.total_sw.total)), E.label)


def to_base(E: VirtualBundle, base: Space) -> VirtualBundle:
    """Pull a bundle over the point back to ``base``; identity if already there."""
    if E.base == base:
        return E
    if E.base.is_point():
        return VirtualBundle(base, E.rank, UnitSeries.one(base.cohomology), E.label)
    raise BaseMismatchError(f"bundle over {E.base} cannot be moved to {base}")


def external_pair(E: VirtualBundle, F: VirtualBundle) -> tuple[VirtualBundle, VirtualBundle]:
    """Both bundles pulled back to E.base x F.base along the projections."""
    base = E.base * F.base
    n = len(E.base.factors)
    E2 = lift(E, base.projection(0, n), base)
    F2 = lift(F, base.projection(n, len(base.factors)), base)
    return E2, F2


def common_base(E: VirtualBundle, F: VirtualBundle) -> tuple[VirtualBundle, VirtualBundle]:
    if E.base == F.base:
        return E, F
    if E.base.is_point():
        return to_base(E, F.base), F
    if F.base.is_point():
        return E, to_base(F, E.base)
    return external_pair(E, F)


def whitney_sum(E: VirtualBundle, F: VirtualBundle) -> VirtualBundle:
    """Direct sum; bundles over different bases are summed externally."""
    op = "[+]" if E.base != F.base and not E.base.is_point() and not F.base.is_point() else "+"
    E, F = common_base(E, F)
    left = _paren_left(E.label) if op == "+" else _paren(E.label)
    return VirtualBundle(E.base, E.rank + F.rank, E.total_sw * F.total_sw, f"{left} {op} {_paren(F.label)}")


sum_bundles = whitney_sum


def external_sum(E: VirtualBundle, F: VirtualBundle) -> VirtualBundle:
    E2, F2 = external_pair(E, F)
    return VirtualBundle(E2.base, E.rank + F.rank, E2.total_sw * F2.total_sw,
                         f"{_paren(E.label)} [+] {_paren(F.label)}")


def negate(E: VirtualBundle) -> VirtualBundle:
    inv = invert_unit(E.total_sw)
    w1, w2 = E.w1, E.w2
    # closed forms w1(-E) = w1(E), w2(-E) = w2(E) + w1(E)^2
    assert inv[1] == w1 and inv[2] == w2 + w1 * w1
    label = E.label[1:] if E.label.startswith("-") and _is_simple(E.label[1:]) else f"-{_paren(E.label)}"
    return VirtualBundle(E.base, -E.rank, inv, label)


def scale(k: int, E: VirtualBundle) -> VirtualBundle:
    if k < 0:
        return negate(scale(-k, E)).relabel(f"{k}*{_paren(E.label)}")
    total = E.total_sw.total ** k
    return VirtualBundle(E.base, k * E.rank, UnitSeries(total), f"{k}*{_paren(E.label)}")


# -- named maps --------------------------------------------------------------

@dataclass(frozen=True)
class NamedMap:
    name: str
    source: Space
    target: Space
    images: tuple[tuple[str, str], ...]
    is_iso: bool = False
    inverse: str | None = None

    @property
    def hom(self) -> RingHom:
        return _build_hom(self)

    def __str__(self):
        return f"{self.name}: {self.source} -> {self.target}"


@lru_cache(maxsize=None)
def _build_hom(f: NamedMap) -> RingHom:
    from .dsl import parse_element

    R = f.source.cohomology
    images = {g: parse_element(R, text) for g, text in f.images}
    return RingHom(f.target.cohomology, R, images)


def catalog_maps(truncation: int = DEFAULT_TRUNCATION) -> dict[str, NamedMap]:
    S = lambda *fs: Space(fs, truncation)  # noqa: E731
    return {
        "phi": NamedMap("phi", S("BZ2", "BSO3"), S("BO3"), (
            ("w1", "a"),
            ("w2", "a^2 + w2bar"),
            ("w3", "w3bar + a*w2bar + a^3"),
        ), is_iso=True, inverse="phi_inv"),
        "phi_inv": NamedMap("phi_inv", S("BO3"), S("BZ2", "BSO3"), (
            ("a", "w1"),
            ("w2bar", "w2 + w1^2"),
            ("w3bar", "w3 + w1*w2"),
        ), is_iso=True, inverse="phi"),
        "i1": NamedMap("i1", S("BSO3"), S("BO3"), (
            ("w1", "0"), ("w2", "w2bar"), ("w3", "w3bar"),
        )),
        # w_k -> k-th elementary symmetric polynomial of (a, a, a)
        "i2": NamedMap("i2", S("BZ2"), S("BO3"), (
            ("w1", "a"), ("w2", "a^2"), ("w3", "a^3"),
        )),
        "p": NamedMap("p", S("BU1"), S("BSO3"), (
            ("w2bar", "c"), ("w3bar", "0"),
        )),
        "basepoint": NamedMap("basepoint", S(), S("BZ2"), (("a", "0"),)),
    }


def identity_map(X: Space) -> NamedMap:
    return NamedMap("id", X, X, tuple((n, n) for n in X.cohomology.names), is_iso=True, inverse="id")


def inclusion_map(n: int, truncation: int = DEFAULT_TRUNCATION) -> NamedMap:
    """BSO_{n-1} -> BSO_n (BU_1 for n = 3)."""
    target = Space((f"BSO{n}",), truncation)
    if n == 3:
        return catalog_maps(truncation)["p"]
    source = Space((f"BSO{n-1}",), truncation)
    images = tuple((f"w{i}bar", f"w{i}bar" if i <= n - 1 else "0") for i in range(2, n + 1))
    return NamedMap(f"incl_{n-1}_{n}", source, target, images)


def pullback(f: NamedMap, E: VirtualBundle) -> VirtualBundle:
    if E.base.is_point() and not f.target.is_point():
        E = to_base(E, f.target)
    if E.base != f.target:
        raise BaseMismatchError(f"bundle over {E.base} cannot be pulled back along {f}")
    label = E.label if f.name == "id" else f"{f.name}^*({E.label})"
    return VirtualBundle(f.source, E.rank, UnitSeries(f.hom(E.total_sw.total)), label)


def tensor_line(E: VirtualBundle, L: VirtualBundle) -> VirtualBundle:
    """E tensor L for a line bundle L, via w_k = sum_i C(n-i, k-i) l^(k-i) w_i(E).

    Bundles over different bases are moved to L.base x E.base.
    """
    if E.rank < 0:
        raise BundleError("tensor_line requires a genuine bundle")
    if L.rank != 1:
        raise BundleError("tensor_line requires a line bundle")
    if E.base != L.base and not E.base.is_point() and not L.base.is_point():
        L, E = external_pair(L, E)
    else:
        E, L = common_base(E, L)
    R = E.base.cohomology
    n = E.rank
    ell = L.w1
    total = R.zero()
    for k in range(0, n + 1):
        wk = R.zero()
        for i in range(0, k + 1):
            if comb(n - i, k - i) % 2:
                wk = wk + ell ** (k - i) * E.w(i)
        total = total + wk
    return VirtualBundle(E.base, n, UnitSeries(total), f"tensor({E.label}, {L.label})")


# -- classification ----------------------------------------------------------

@dataclass(frozen=True)
class StructureTag:
    orientable: bool
    spin: bool
    pin_plus: bool
    pin_minus: bool
    spin_z4: bool
    w1: F2Element
    w2: F2Element
    w2_plus_w1sq: F2Element

    @property
    def tags(self) -> list[str]:
        names = [
            ("ORIENTABLE", self.orientable),
            ("SPIN", self.spin),
            ("PIN_PLUS", self.pin_plus),
            ("PIN_MINUS", self.pin_minus),
            ("SPIN_Z4", self.spin_z4),
        ]
        held = [n for n, ok in names if ok]
        return held or ["NONE_OF_CATALOG"]

    def to_json(self) -> dict:
        return {
            "tags": self.tags,
            "w1": str(self.w1),
            "w2": str(self.w2),
            "w2+w1^2": str(self.w2_plus_w1sq),
        }


def classify(E: VirtualBundle) -> StructureTag:
    w1, w2 = E.w1, E.w2
    w2p = w2 + w1 * w1
    spin_z4 = False
    if E.base.factors == ("BZ2",):
        # rank-normalised E - 2sigma spin  <=>  w1(E) = 0 and w2(E) = a^2
        a = E.base.cohomology.gen("a")
        spin_z4 = w1.is_zero() and w2 == a * a
    return StructureTag(
        orientable=w1.is_zero(),
        spin=w1.is_zero() and w2.is_zero(),
        pin_plus=w2.is_zero(),
        pin_minus=w2p.is_zero(),
        spin_z4=spin_z4,
        w1=w1,
        w2=w2,
        w2_plus_w1sq=w2p,
    )


def is_spin(E: VirtualBundle) -> bool:
    return classify(E).spin


@dataclass(frozen=True)
class Equivalence:
    equivalent: bool
    difference: VirtualBundle
    reason: str = ""

    def __bool__(self):
        return self.equivalent


def twist_equivalent(E: VirtualBundle, F: VirtualBundle) -> Equivalence:
    """Twists E, F are equivalent when F - E is rank 0 and spin.

    The witness ``difference`` is F - E, the bundle added to E to reach F.
    """
    E, F = common_base(E, F)
    D = F - E
    if D.rank != 0:
        return Equivalence(False, D, f"rank of difference is {D.rank}")
    tag = classify(D)
    if not tag.spin:
        return Equivalence(False, D, f"difference not spin: w1 = {tag.w1}, w2 = {tag.w2}")
    return Equivalence(True, D)


@dataclass(frozen=True)
class TwistEntry:
    structure: str
    spectrum: str
    twist: VirtualBundle


@lru_cache(maxsize=None)
def twist_catalog(truncation: int = DEFAULT_TRUNCATION) -> tuple[TwistEntry, ...]:
    s = sigma(truncation)
    vu1 = tautological_U1(truncation)
    return (
        TwistEntry("Pin^-", "MTPinMinus", s),
        TwistEntry("Pin^+", "MTPinPlus", negate(s)),
        TwistEntry("Spin x_{+-1} Z/4", "MTSpinZ4", scale(2, s)),
        TwistEntry("Spin^c", "MTSpinC", vu1),
        TwistEntry("Pin^c", "MTPinC", external_sum(s, vu1)),
        TwistEntry("Spin^h", "MTSpinH", tautological_SO(3, truncation)),
        TwistEntry("Pin^{h+}", "MTPinHplus", tautological_O(3, truncation)),
        TwistEntry("Pin^{h-}", "MTPinHminus", negate(tautological_O(3, truncation))),
    )


def rank_normalized(E: VirtualBundle) -> VirtualBundle:
    """E - rank(E), the rank-0 part of a twist."""
    if E.rank == 0:
        return E
    if E.rank > 0:
        return E - E.rank
    return E + trivial(-E.rank)


def twist_dictionary(E: VirtualBundle) -> str | None:
    """Tangential structure named by the twist (E.base, E), if catalogued."""
    En = rank_normalized(E)
    for entry in twist_catalog(E.base.truncation):
        if entry.twist.base != E.base:
            continue
        if twist_equivalent(En, rank_normalized(entry.twist)):
            return entry.structure
    return None


# -- named verifications -----------------------------------------------------

@dataclass
class LemmaStep:
    label: str
    cls: str
    value: str
    expected: str | None = None

    @property
    def ok(self) -> bool:
        return self.expected is None or self.expected == self.value

    def to_json(self) -> dict:
        out = {"label": self.label, "class": self.cls, "value": self.value}
        if self.expected is not None:
            out["expected"] = self.expected
        return out


@dataclass
class LemmaReport:
    lemma: str
    steps: list[LemmaStep]

    @property
    def passed(self) -> bool:
        return all(s.ok for s in self.steps)

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "lemma": self.lemma,
            "pass": self.passed,
            "steps": [s.to_json() for s in self.steps],
        }

    def render(self) -> str:
        lines = [f"lemma {self.lemma}: {'PASS' if self.passed else 'FAIL'}"]
        for i, s in enumerate(self.steps, 1):
            mark = "" if s.expected is None else ("  ok" if s.ok else f"  expected {s.expected}")
            lines.append(f"  {i:2d}. {s.label}: {s.cls} = {s.value}{mark}")
        return "\n".join(lines)


def _pullchar(trunc: int) -> LemmaReport:
    maps = catalog_maps(trunc)
    phi = maps["phi"]
    V = tautological_O(3, trunc)
    pulled = pullback(phi, V)
    s, vso3 = external_pair(sigma(trunc), tautological_SO(3, trunc))
    oracle = tensor_line(vso3, s)
    steps = []
    for k, expected in ((1, "a"), (2, "a^2 + w2bar"), (3, None)):
        cat, orc = str(pulled.w(k)), str(oracle.w(k))
        steps.append(LemmaStep(f"phi^*(w{k}) via catalog substitution", f"phi^*(w{k})", cat, expected))
        steps.append(LemmaStep(f"phi^*(w{k}) via V_SO3 (x) sigma splitting formula", f"w{k}(V_SO3 (x) sigma)", orc, cat))
    i1 = pullback(maps["i1"], V)
    i2 = pullback(maps["i2"], V)
    steps.append(LemmaStep("i1^*(w2) picks out the SO3 part", "i1^*(w2)", str(i1.w2), "w2bar"))
    steps.append(LemmaStep("i2^*(w2) = w2(3 sigma)", "i2^*(w2)", str(i2.w2), str(scale(3, sigma(trunc)).w2)))
    return LemmaReport("pullchar", steps)


def _difference_spin(trunc: int, sign: int) -> LemmaReport:
    phi = catalog_maps(trunc)["phi"]
    s = sigma(trunc)
    VO3 = tautological_O(3, trunc)
    VSO3 = tautological_SO(3, trunc)
    three_s = scale(3, s)
    split = external_sum(three_s - 3, VSO3 - 3)
    lhs = pullback(phi, VO3 - 3)
    if sign < 0:
        lhs, split = negate(lhs), negate(split)
    E = lhs - split
    name = "E_+" if sign > 0 else "E_-"
    neg3s = negate(three_s)
    negV = negate(VSO3)
    steps = [
        LemmaStep("w1(phi^*(V_O3 - 3)) = phi^*(w1)", "w1", str(pullback(phi, VO3).w1), "a"),
        LemmaStep("w2(phi^*(V_O3 - 3)) = phi^*(w2)", "w2", str(pullback(phi, VO3).w2), "a^2 + w2bar"),
        LemmaStep("w1(3 sigma)", "w1", str(three_s.w1), "a"),
        LemmaStep("w2(3 sigma)", "w2", str(three_s.w2), "a^2"),
        LemmaStep("w1(-3 sigma)", "w1", str(neg3s.w1), "a"),
        LemmaStep("w2(-3 sigma) = w2(3 sigma) + w1(3 sigma)^2", "w2", str(neg3s.w2), "0"),
        LemmaStep("w1(-V_SO3)", "w1", str(negV.w1), "0"),
        LemmaStep("w2(-V_SO3) = w2(V_SO3) + w1(V_SO3)^2", "w2", str(negV.w2), "w2bar"),
        LemmaStep(f"rank({name})", "rank", str(E.rank), "0"),
        LemmaStep(f"w1({name})", "w1", str(E.w1), "0"),
        LemmaStep(f"w2({name})", "w2", str(E.w2), "0"),
        LemmaStep(f"w1(-{name})", "w1", str(negate(E).w1), "0"),
        LemmaStep(f"w2(-{name})", "w2", str(negate(E).w2), "0"),
    ]
    return LemmaReport("difference_spin_plus" if sign > 0 else "difference_spin_minus", steps)


def _four_sigma(trunc: int) -> LemmaReport:
    four = scale(4, sigma(trunc))
    E = four - 4
    return LemmaReport("four_sigma_spin", [
        LemmaStep("w(4 sigma) = (1 + a)^4", "w", str(four.total_sw), "1 + a^4"),
        LemmaStep("rank(4 sigma - 4)", "rank", str(E.rank), "0"),
        LemmaStep("w1(4 sigma - 4)", "w1", str(E.w1), "0"),
        LemmaStep("w2(4 sigma - 4)", "w2", str(E.w2), "0"),
        LemmaStep("classify(4 sigma - 4) includes SPIN", "spin", str(classify(E).spin), "True"),
    ])


def _two_vso3(trunc: int) -> LemmaReport:
    two = scale(2, tautological_SO(3, trunc))
    E = two - 6
    return LemmaReport("two_vso3_spin", [
        LemmaStep("w(2 V_SO3) = (1 + w2bar + w3bar)^2", "w", str(two.total_sw), "1 + w2bar^2 + w3bar^2"),
        LemmaStep("w1(2 V_SO3 - 6)", "w1", str(E.w1), "0"),
        LemmaStep("w2(2 V_SO3 - 6)", "w2", str(E.w2), "0"),
        LemmaStep("classify(2 V_SO3 - 6) includes SPIN", "spin", str(classify(E).spin), "True"),
    ])


LEMMAS = {
    "pullchar": _pullchar,
    "difference_spin_plus": lambda t: _difference_spin(t, +1),
    "difference_spin_minus": lambda t: _difference_spin(t, -1),
    "four_sigma_spin": _four_sigma,
    "two_vso3_spin": _two_vso3,
}


def verify_lemma(name: str, truncation: int = DEFAULT_TRUNCATION) -> LemmaReport:
    try:
        fn = LEMMAS[name]
    except KeyError:
        raise KeyError(f"unknown lemma {name!r}; choose from {sorted(LEMMAS)}") from None
    return fn(truncation)
