"""Degree-truncated graded polynomial rings over F2.

Elements are sets of exponent vectors: a monomial is present iff its
coefficient is 1, so addition is symmetric difference and characteristic 2
costs nothing.  Everything here is immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

DEFAULT_TRUNCATION = 16


class IncompatibleRingsError(ValueError):
    pass


class NotAUnitError(ValueError):
    pass


class DegreeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class RingSpec:
    """F2[x_1, ..., x_k] with |x_i| = degree, truncated above ``truncation``."""

    generators: tuple[tuple[str, int], ...] = ()
    truncation: int = DEFAULT_TRUNCATION
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        gens = tuple((str(n), int(d)) for n, d in self.generators)
        object.__setattr__(self, "generators", gens)
        names = [n for n, _ in gens]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        if any(d < 1 for _, d in gens):
            raise ValueError("generator degrees must be >= 1")
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.generators)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.generators)

    @property
    def ngens(self) -> int:
        return len(self.generators)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"no generator {name!r} in ring {self}") from None

    def monomial_degree(self, exps: tuple[int, ...]) -> int:
        return sum(e * d for e, d in zip(exps, self.degrees))

    def zero(self) -> F2Element:
        return F2Element(self, frozenset())

    def one(self) -> F2Element:
        return F2Element(self, frozenset([(0,) * self.ngens]))

    def gen(self, name: str) -> F2Element:
        exps = [0] * self.ngens
        exps[self.index(name)] = 1
        return self.monomial(exps)

    def monomial(self, exps: Iterable[int]) -> F2Element:
        exps = tuple(exps)
        if len(exps) != self.ngens:
            raise ValueError("exponent vector has wrong length")
        if self.monomial_degree(exps) > self.truncation:
            return self.zero()
        return F2Element(self, frozenset([exps]))

    def monomials_of_degree(self, d: int) -> list[tuple[int, ...]]:
        """All exponent vectors of total degree exactly ``d``."""
        out: list[tuple[int, ...]] = []

        def rec(i: int, remaining: int, acc: list[int]):
            if i == self.ngens:
                if remaining == 0:
                    out.append(tuple(acc))
                return
            deg = self.degrees[i]
            for e in range(remaining // deg + 1):
                acc.append(e)
                rec(i + 1, remaining - e * deg, acc)
                acc.pop()

        rec(0, d, [])
        return out

    def __str__(self):
        gens = ", ".join(self.names)
        return f"F2[{gens}]/(deg>{self.truncation})"


def _glex_key(ring: RingSpec, m: tuple[int, ...]):
    # ascending total degree, then lexicographically larger exponent first
    return (ring.monomial_degree(m), tuple(-e for e in m))


@dataclass(frozen=True)
class F2Element:
    ring: RingSpec
    monomials: frozenset

    def _check(self, other: F2Element):
        if not isinstance(other, F2Element):
            raise TypeError(f"cannot combine F2Element with {type(other).__name__}")
        if other.ring != self.ring:
            raise IncompatibleRingsError("incompatible rings")

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.one() if other % 2 else self.ring.zero()
        self._check(other)
        return F2Element(self.ring, self.monomials ^ other.monomials)

    __radd__ = __add__
    __sub__ = __add__

    def __mul__(self, other):
        if isinstance(other, int):
            return self if other % 2 else self.ring.zero()
        self._check(other)
        ring = self.ring
        weights = ring.degrees
        trunc = ring.truncation
        acc: set = set()
        for m1 in self.monomials:
            for m2 in other.monomials:
                m = tuple(x + y for x, y in zip(m1, m2))
                if sum(e * w for e, w in zip(m, weights)) <= trunc:
                    if m in acc:
                        acc.remove(m)
                    else:
                        acc.add(m)
        return F2Element(ring, frozenset(acc))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> F2Element:
        if n < 0:
            raise ValueError("negative powers are not defined; use invert_unit")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self):
        return bool(self.monomials)

    def is_zero(self) -> bool:
        return not self.monomials

    def degrees(self) -> set[int]:
        return {self.ring.monomial_degree(m) for m in self.monomials}

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = self.degrees()
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return d is None or degs == {d}

    def component(self, d: int) -> F2Element:
        deg = self.ring.monomial_degree
        return F2Element(self.ring, frozenset(m for m in self.monomials if deg(m) == d))

    def constant_term(self) -> int:
        return int((0,) * self.ring.ngens in self.monomials)

    def sorted_monomials(self) -> list[tuple[int, ...]]:
        return sorted(self.monomials, key=lambda m: _glex_key(self.ring, m))

    def __str__(self):
        if not self.monomials:
            return "0"
        return " + ".join(format_monomial(self.ring, m) for m in self.sorted_monomials())

    def __repr__(self):
        return f"F2Element({self})"


def format_monomial(ring: RingSpec, m: tuple[int, ...]) -> str:
    parts = []
    for name, e in zip(ring.names, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def add(x: F2Element, y: F2Element) -> F2Element:
    return x + y


def mul(x: F2Element, y: F2Element) -> F2Element:
    return x * y


class UnitSeries:
    """A total class 1 + x_1 + x_2 + ... with x_d homogeneous of degree d."""

    __slots__ = ("total",)

    def __init__(self, total: F2Element):
        if total.constant_term() != 1:
            raise NotAUnitError("not a unit")
        self.total = total

    @classmethod
    def from_components(cls, ring: RingSpec, components: Mapping[int, F2Element]) -> UnitSeries:
        total = ring.zero()
        for d, x in components.items():
            if x.ring != ring:
                raise IncompatibleRingsError("incompatible rings")
            if not x.is_homogeneous(d):
                raise DegreeMismatchError(f"component in degree {d} is not homogeneous of degree {d}")
            total = total + x
        if total.component(0) != ring.one():
            raise NotAUnitError("not a unit")
        return cls(total)

    @classmethod
    def one(cls, ring: RingSpec) -> UnitSeries:
        return cls(ring.one())

    @property
    def ring(self) -> RingSpec:
        return self.total.ring

    def __getitem__(self, d: int) -> F2Element:
        return self.total.component(d)

    @property
    def components(self) -> dict[int, F2Element]:
        return {d: self.total.component(d) for d in sorted(self.total.degrees())}

    def __mul__(self, other: UnitSeries) -> UnitSeries:
        return UnitSeries(self.total * other.total)

    def __eq__(self, other):
        return isinstance(other, UnitSeries) and self.total == other.total

    def __hash__(self):
        return hash(self.total)

    def __str__(self):
        return str(self.total)

    def __repr__(self):
        return f"UnitSeries({self.total})"


def invert_unit(u: UnitSeries | F2Element) -> UnitSeries:
    """Formal inverse, built degree by degree: v_d = sum_{i>=1} u_i v_{d-i}."""
    total = u.total if isinstance(u, UnitSeries) else u
    ring = total.ring
    if total.component(0) != ring.one():
        raise NotAUnitError("not a unit")
    uc = [total.component(d) for d in range(ring.truncation + 1)]
    vc = [ring.one()]
    for d in range(1, ring.truncation + 1):
        v = ring.zero()
        for i in range(1, d + 1):
            if uc[i]:
                v = v + uc[i] * vc[d - i]
        vc.append(v)
    inv = ring.zero()
    for v in vc:
        inv = inv + v
    return UnitSeries(inv)


class RingHom:
    """Substitution homomorphism source -> target given by generator images."""

    def __init__(self, source: RingSpec, target: RingSpec, images: Mapping[str, F2Element]):
        if target.truncation < source.truncation:
            raise DegreeMismatchError("degree mismatch in homomorphism: target truncation too small")
        for name, deg in source.generators:
            if name not in images:
                raise KeyError(f"no image given for generator {name!r}")
            img = images[name]
            if img.ring != target:
                raise IncompatibleRingsError("incompatible rings")
            if not img.is_homogeneous(deg):
                raise DegreeMismatchError("degree mismatch in homomorphism")
        extra = set(images) - set(source.names)
        if extra:
            raise KeyError(f"images given for unknown generators {sorted(extra)}")
        self.source = source
        self.target = target
        self.images = tuple(images[n] for n in source.names)

    def __call__(self, x: F2Element) -> F2Element:
        if x.ring != self.source:
            raise IncompatibleRingsError("incompatible rings")
        out = self.target.zero()
        powers: dict = {}
        for m in x.monomials:
            term = self.target.one()
            for i, e in enumerate(m):
                if e:
                    key = (i, e)
                    if key not in powers:
                        powers[key] = self.images[i] ** e
                    term = term * powers[key]
            out = out + term
        return out

    def compose(self, first: RingHom) -> RingHom:
        """self after first: apply ``first`` then ``self``."""
        if first.target != self.source:
            raise IncompatibleRingsError("incompatible rings")
        return RingHom(first.source, self.target,
                       {n: self(img) for n, img in zip(first.source.names, first.images)})


def ring_hom(spec: Mapping[str, F2Element], x: F2Element, target: RingSpec | None = None) -> F2Element:
    if target is None:
        rings = {img.ring for img in spec.values()}
        if len(rings) != 1:
            raise IncompatibleRingsError("incompatible rings")
        target = rings.pop()
    return RingHom(x.ring, target, spec)(x)


def _fresh_name(name: str, taken: set[str]) -> str:
    candidate = name
    while candidate in taken:
        candidate += "'"
    return candidate


def kunneth_with_maps(r1: RingSpec, r2: RingSpec) -> tuple[RingSpec, RingHom, RingHom]:
    """Tensor product ring plus the inclusions of both factors.

    Colliding names from ``r2`` get primes appended until unique.
    """
    taken = set(r1.names)
    gens = list(r1.generators)
    renamed = []
    for name, deg in r2.generators:
        new = _fresh_name(name, taken)
        taken.add(new)
        gens.append((new, deg))
        renamed.append(new)
    trunc = min(r1.truncation, r2.truncation)
    prod = RingSpec(tuple(gens), trunc)
    # inclusions go up in degree only, so truncations are compatible via restriction
    r1t = RingSpec(r1.generators, trunc)
    r2t = RingSpec(r2.generators, trunc)
    inc1 = RingHom(r1t, prod, {n: prod.gen(n) for n in r1.names})
    inc2 = RingHom(r2t, prod, {n: prod.gen(new) for n, new in zip(r2.names, renamed)})
    return prod, inc1, inc2


def kunneth(r1: RingSpec, r2: RingSpec) -> RingSpec:
    return kunneth_with_maps(r1, r2)[0]


def retruncate(x: F2Element, ring: RingSpec) -> F2Element:
    """Move ``x`` into a ring that differs only in truncation."""
    if ring.generators != x.ring.generators:
        raise IncompatibleRingsError("incompatible rings")
    deg = ring.monomial_degree
    return F2Element(ring, frozenset(m for m in x.monomials if deg(m) <= ring.truncation))
