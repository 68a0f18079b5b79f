"""Syntax trees for Thom-spectrum expressions and their flat smash form."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .bundles import BaseMismatchError, Space, VirtualBundle, to_base, zero_bundle

NAMED_TAGS = (
    "MTSpin",
    "MTSpinC",
    "MTSpinH",
    "MTSpinZ4",
    "MTPinMinus",
    "MTPinPlus",
    "MTPinC",
    "MTPinHplus",
    "MTPinHminus",
)


class SpectrumExpr:
    def key(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Sphere(SpectrumExpr):
    def key(self):
        return "S"


@dataclass(frozen=True, eq=True)
class Named(SpectrumExpr):
    tag: str

    def __post_init__(self):
        if self.tag not in NAMED_TAGS:
            raise ValueError(f"unknown named spectrum {self.tag!r}")

    def key(self):
        return f"N:{self.tag}"


@dataclass(frozen=True, eq=True)
class Thom(SpectrumExpr):
    """X^V.  A trivial twist gives X_+."""

    base: Space
    twist: VirtualBundle
    _key: str = field(default="", init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.twist.base != self.base:
            try:
                object.__setattr__(self, "twist", to_base(self.twist, self.base))
            except BaseMismatchError:
                raise BaseMismatchError(
                    f"twist {self.twist.label} lives over {self.twist.base}, not {self.base}") from None
        object.__setattr__(self, "_key", f"T:{self.base}|{self.twist.rank}|{self.twist.total_sw}")

    def key(self):
        return self._key


def Plus(base: Space) -> Thom:
    return Thom(base, zero_bundle(base))


@dataclass(frozen=True, eq=True)
class Reduced(SpectrumExpr):
    """Reduced suspension spectrum of a based space."""

    base: Space

    def key(self):
        return f"R:{self.base}"


@dataclass(frozen=True, eq=True)
class Wedge(SpectrumExpr):
    summands: tuple

    def key(self):
        return "W:[" + ";".join(s.key() for s in self.summands) + "]"


@dataclass(frozen=True, eq=True)
class Smash(SpectrumExpr):
    factors: tuple

    def key(self):
        return "M:[" + ";".join(f.key() for f in self.factors) + "]"


@dataclass(frozen=True, eq=True)
class Suspend(SpectrumExpr):
    k: int
    expr: SpectrumExpr

    def key(self):
        return f"Z:{self.k}:{self.expr.key()}"


@dataclass(frozen=True, eq=True)
class SmashMTSpin(SpectrumExpr):
    expr: SpectrumExpr

    def key(self):
        return f"MTSpin^{self.expr.key()}"


MTSPIN = Named("MTSpin")


@dataclass(frozen=True)
class Flat:
    """Sigma^shift of a smash of atomic factors in canonical order."""

    shift: int
    factors: tuple

    @classmethod
    def make(cls, shift: int, factors) -> Flat:
        return cls(shift, tuple(sorted(factors, key=lambda f: f.key())))

    def key(self) -> str:
        return f"{self.shift}|" + ";".join(f.key() for f in self.factors)

    def index_of(self, factor: SpectrumExpr) -> int:
        k = factor.key()
        for i, f in enumerate(self.factors):
            if f.key() == k:
                return i
        raise ValueError("factor not present")

    def replace(self, positions, new_factors, dshift: int = 0) -> Flat:
        drop = set(positions)
        kept = [f for i, f in enumerate(self.factors) if i not in drop]
        return Flat.make(self.shift + dshift, kept + list(new_factors))

    def has_mtspin(self) -> bool:
        return any(f == MTSPIN for f in self.factors)

    def to_expr(self) -> SpectrumExpr:
        if not self.factors:
            body = Sphere()
        elif len(self.factors) == 1:
            body = self.factors[0]
        else:
            body = Smash(self.factors)
        return Suspend(self.shift, body) if self.shift else body

    def __str__(self):
        return to_text(self.to_expr())


def flatten(e: SpectrumExpr) -> Flat:
    """Structural flattening: smash/suspension nesting and the sphere unit."""
    shift, factors = _flat(e)
    return Flat.make(shift, factors)


def _flat(e: SpectrumExpr):
    if isinstance(e, Sphere):
        return 0, []
    if isinstance(e, (Named, Thom, Reduced)):
        return 0, [e]
    if isinstance(e, Wedge):
        return 0, [Wedge(tuple(sorted((flatten(s).to_expr() for s in e.summands), key=lambda x: x.key())))]
    if isinstance(e, Smash):
        shift, out = 0, []
        for f in e.factors:
            k, fs = _flat(f)
            shift += k
            out.extend(fs)
        return shift, out
    if isinstance(e, Suspend):
        k, fs = _flat(e.expr)
        return k + e.k, fs
    if isinstance(e, SmashMTSpin):
        k, fs = _flat(e.expr)
        return k, [MTSPIN] + fs
    raise TypeError(f"not a spectrum expression: {e!r}")


# -- text form (spectrum DSL) ---------------------------------------------------

def twist_text(V: VirtualBundle) -> str:
    """The label if it re-parses to V over V.base, else an explicit virt(...)."""
    return _twist_text(V.label, V.base, V.rank, str(V.total_sw))


@lru_cache(maxsize=4096)
def _twist_text(label: str, base: Space, rank: int, w: str) -> str:
    from .dsl import parse_bundle

    try:
        W = parse_bundle(label, context=base)
        W = to_base(W, base)
    except ValueError:
        W = None
    if W is not None and W.rank == rank and str(W.total_sw) == w:
        return label
    return f"virt({rank}, {w})"


def to_text(e: SpectrumExpr) -> str:
    if isinstance(e, Sphere):
        return "S"
    if isinstance(e, Named):
        return e.tag
    if isinstance(e, Thom):
        if e.twist.is_trivial():
            return f"Plus({e.base})"
        return f"Thom({e.base}, {twist_text(e.twist)})"
    if isinstance(e, Reduced):
        return f"Reduced({e.base})"
    if isinstance(e, Wedge):
        return "Wedge(" + ", ".join(to_text(s) for s in e.summands) + ")"
    if isinstance(e, Smash):
        if len(e.factors) < 2:
            return "Smash(" + ", ".join(to_text(f) for f in e.factors) + ")"
        return " ^ ".join(f"({to_text(f)})" if isinstance(f, Smash) and len(f.factors) >= 2 else to_text(f)
                          for f in e.factors)
    if isinstance(e, Suspend):
        return f"Susp({e.k}, {to_text(e.expr)})"
    if isinstance(e, SmashMTSpin):
        inner = to_text(e.expr)
        if isinstance(e.expr, Smash) and len(e.expr.factors) >= 2:
            inner = f"({inner})"
        return f"MTSpin ^ {inner}"
    raise TypeError(f"not a spectrum expression: {e!r}")


# -- JSON form -------------------------------------------------------------------

def bundle_to_json(V: VirtualBundle) -> dict:
    return {
        "base": list(V.base.factors),
        "rank": V.rank,
        "w": str(V.total_sw),
        "label": V.label,
    }


def bundle_from_json(d: dict, truncation: int) -> VirtualBundle:
    from .dsl import parse_element
    from .f2algebra import UnitSeries

    base = Space(tuple(d["base"]), truncation)
    w = parse_element(base.cohomology, d["w"])
    return VirtualBundle(base, int(d["rank"]), UnitSeries(w), d.get("label", ""))


def to_json(e: SpectrumExpr) -> dict:
    if isinstance(e, Sphere):
        return {"sphere": True}
    if isinstance(e, Named):
        return {"named": e.tag}
    if isinstance(e, Thom):
        return {"thom": {"base": list(e.base.factors), "twist": bundle_to_json(e.twist)}}
    if isinstance(e, Reduced):
        return {"reduced": list(e.base.factors)}
    if isinstance(e, Wedge):
        return {"wedge": [to_json(s) for s in e.summands]}
    if isinstance(e, Smash):
        return {"smash": [to_json(f) for f in e.factors]}
    if isinstance(e, Suspend):
        return {"susp": e.k, "expr": to_json(e.expr)}
    if isinstance(e, SmashMTSpin):
        return {"mtspin_smash": to_json(e.expr)}
    raise TypeError(f"not a spectrum expression: {e!r}")


def from_json(d: dict, truncation: int) -> SpectrumExpr:
    if "sphere" in d:
        return Sphere()
    if "named" in d:
        return Named(d["named"])
    if "thom" in d:
        t = d["thom"]
        return Thom(Space(tuple(t["base"]), truncation), bundle_from_json(t["twist"], truncation))
    if "reduced" in d:
        return Reduced(Space(tuple(d["reduced"]), truncation))
    if "wedge" in d:
        return Wedge(tuple(from_json(s, truncation) for s in d["wedge"]))
    if "smash" in d:
        return Smash(tuple(from_json(f, truncation) for f in d["smash"]))
    if "susp" in d:
        return Suspend(int(d["susp"]), from_json(d["expr"], truncation))
    if "mtspin_smash" in d:
        return SmashMTSpin(from_json(d["mtspin_smash"], truncation))
    raise ValueError(f"unrecognised spectrum JSON: {d!r}")


def is_point_thom(f: SpectrumExpr) -> bool:
    return isinstance(f, Thom) and f.base.is_point()
