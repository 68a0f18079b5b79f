"""Graded ranks after inverting 2, as exact integer Poincare series.

Rational Atiyah-Hirzebruch spectral sequences for the theories here are
concentrated in even total degree and collapse, so the rank of E_n(X) is the
convolution of the coefficient series with the homology series of X.  All
arithmetic is on Python ints.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable

DEFAULT_CUTOFF = 260
THEORIES = ("SpinC", "SpinH", "Spin_of_BSO3", "SpinH_of_HPinf_reduced")


class UnknownTheoryError(ValueError):
    pass


class UnderdeterminedError(ValueError):
    pass


@dataclass(frozen=True)
class PoincareSeries:
    coefficients: tuple[int, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        if not coeffs:
            raise ValueError("a series needs at least the degree-0 coefficient")
        for c in coeffs:
            if isinstance(c, bool) or not isinstance(c, int):
                raise TypeError(f"coefficients must be integers, got {c!r}")
            if c < 0:
                raise ValueError("ranks are non-negative")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def cutoff(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, d: int) -> int:
        if d < 0:
            return 0
        if d > self.cutoff:
            raise IndexError(f"degree {d} beyond cutoff {self.cutoff}")
        return self.coefficients[d]

    def __len__(self):
        return len(self.coefficients)

    def truncate(self, cutoff: int) -> PoincareSeries:
        return PoincareSeries(self.coefficients[:cutoff + 1], self.label)

    def support(self) -> list[int]:
        return [d for d, c in enumerate(self.coefficients) if c]

    def __mul__(self, other: PoincareSeries) -> PoincareSeries:
        return series_mul(self, other)

    def __add__(self, other: PoincareSeries) -> PoincareSeries:
        n = min(self.cutoff, other.cutoff)
        return PoincareSeries(tuple(self[d] + other[d] for d in range(n + 1)))

    def __sub__(self, other: PoincareSeries) -> PoincareSeries:
        n = min(self.cutoff, other.cutoff)
        return PoincareSeries(tuple(self[d] - other[d] for d in range(n + 1)))

    def to_json(self) -> dict:
        return {"label": self.label, "cutoff": self.cutoff, "coefficients": list(self.coefficients)}


def series(coeffs: Iterable[int], label: str = "") -> PoincareSeries:
    return PoincareSeries(tuple(coeffs), label)


def one(cutoff: int) -> PoincareSeries:
    return PoincareSeries((1,) + (0,) * cutoff, "1")


def series_mul(f: PoincareSeries, g: PoincareSeries) -> PoincareSeries:
    """Cauchy product, cut off at the smaller cutoff."""
    n = min(f.cutoff, g.cutoff)
    out = [0] * (n + 1)
    gs = [(j, c) for j, c in enumerate(g.coefficients[:n + 1]) if c]
    for i, a in enumerate(f.coefficients[:n + 1]):
        if not a:
            continue
        for j, b in gs:
            if i + j > n:
                break
            out[i + j] += a * b
    label = f"({f.label})*({g.label})" if f.label and g.label else ""
    return PoincareSeries(tuple(out), label)


def geometric_series(period: int, cutoff: int = DEFAULT_CUTOFF) -> PoincareSeries:
    """1/(1 - t^period): a polynomial ring on one generator of degree ``period``."""
    if period < 1:
        raise ValueError("period must be >= 1")
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    return PoincareSeries(tuple(1 if d % period == 0 else 0 for d in range(cutoff + 1)), f"1/(1-t^{period})")


def spin_series(cutoff: int = DEFAULT_CUTOFF) -> PoincareSeries:
    """Ranks of spin bordism with 2 inverted: prod_{i>=1} 1/(1 - t^(4i)).

    External input: by Anderson-Brown-Peterson (1967) the rationalised spin
    bordism ring is polynomial on one generator in each degree 4i, so the
    degree-4k rank is the partition number p(k).  Only its concentration in
    degrees 0 mod 4 is used by the rank arguments.
    """
    c = [0] * (cutoff + 1)
    c[0] = 1
    for part in range(4, cutoff + 1, 4):
        for d in range(part, cutoff + 1):
            c[d] += c[d - part]
    return PoincareSeries(tuple(c), "Spin")


def bordism_ranks(theory: str, cutoff: int = DEFAULT_CUTOFF) -> PoincareSeries:
    """Rank series of the named theory (with 2 inverted) up to ``cutoff``."""
    spin = spin_series(cutoff)
    if theory == "SpinC":
        # MTSpinC = MTSpin ^ (BU1)^(V - 2), and H_*(BU1; Q) has one class per even degree
        return PoincareSeries((spin * geometric_series(2, cutoff)).coefficients, "SpinC")
    if theory == "SpinH":
        return PoincareSeries((spin * geometric_series(4, cutoff)).coefficients, "SpinH")
    if theory == "Spin_of_BSO3":
        return PoincareSeries((spin * geometric_series(4, cutoff)).coefficients, "Spin_of_BSO3")
    if theory == "SpinH_of_HPinf_reduced":
        reduced = geometric_series(4, cutoff) - one(cutoff)
        return PoincareSeries((bordism_ranks("SpinH", cutoff) * reduced).coefficients, "SpinH_of_HPinf_reduced")
    raise UnknownTheoryError(f"unknown theory {theory!r}; choose from {', '.join(THEORIES)}")


# -- rank equality -------------------------------------------------------------

@dataclass
class RankEqualityReport:
    k_max: int
    degrees: list[int]
    spinc: list[int]
    spinh: list[int]
    mismatches: list[int]
    trials: int
    trial_failures: int
    counterexample_detected: bool
    seed: int

    @property
    def passed(self) -> bool:
        return not self.mismatches and self.trial_failures == 0 and self.counterexample_detected

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "k_max": self.k_max,
            "pass": self.passed,
            "degrees": self.degrees,
            "spinc": self.spinc,
            "spinh": self.spinh,
            "mismatches": self.mismatches,
            "random_trials": self.trials,
            "random_failures": self.trial_failures,
            "counterexample_2Z_detected": self.counterexample_detected,
            "seed": self.seed,
        }

    def render(self) -> str:
        lines = [
            f"rank equality in degrees 4k, k <= {self.k_max}: {'PASS' if self.passed else 'FAIL'}",
            f"  Spin^c and Spin^h ranks agree in {len(self.degrees) - len(self.mismatches)}/{len(self.degrees)} degrees",
        ]
        for d, a, b in list(zip(self.degrees, self.spinc, self.spinh))[:6]:
            lines.append(f"    degree {d:3d}: {a} = {b}")
        if len(self.degrees) > 6:
            d, a, b = self.degrees[-1], self.spinc[-1], self.spinh[-1]
            lines.append(f"    ...\n    degree {d:3d}: {a} = {b}")
        lines.append(f"  identity f/(1-t^2) = f/(1-t^4) in degrees 0 mod 4 for f supported in 4Z: "
                     f"{self.trials - self.trial_failures}/{self.trials} random series (seed {self.seed})")
        lines.append(f"  fails for f = t^2 (supported in 2Z outside 4Z): "
                     f"{'yes' if self.counterexample_detected else 'NO'}")
        return "\n".join(lines)


def identity_holds(f: PoincareSeries) -> bool:
    """f*geometric(2) and f*geometric(4) agree in every degree 0 mod 4."""
    a = f * geometric_series(2, f.cutoff)
    b = f * geometric_series(4, f.cutoff)
    return all(a[d] == b[d] for d in range(0, f.cutoff + 1, 4))


def random_4z_series(rng: random.Random, cutoff: int, max_coeff: int = 9) -> PoincareSeries:
    return PoincareSeries(tuple(rng.randint(0, max_coeff) if d % 4 == 0 else 0 for d in range(cutoff + 1)))


def verify_rank_equality(k_max: int = 64, cutoff: int | None = None, trials: int = 200,
                         seed: int = 0) -> RankEqualityReport:
    if cutoff is None:
        cutoff = 4 * k_max
    if 4 * k_max > cutoff:
        raise ValueError("need 4 * k_max <= cutoff")
    sc = bordism_ranks("SpinC", cutoff)
    sh = bordism_ranks("SpinH", cutoff)
    degrees = [4 * k for k in range(k_max + 1)]
    mismatches = [d for d in degrees if sc[d] != sh[d]]
    rng = random.Random(seed)
    failures = sum(1 for _ in range(trials) if not identity_holds(random_4z_series(rng, cutoff)))
    t2 = PoincareSeries(tuple(1 if d == 2 else 0 for d in range(max(cutoff, 4) + 1)))
    return RankEqualityReport(k_max, degrees, [sc[d] for d in degrees], [sh[d] for d in degrees],
                              mismatches, trials, failures, not identity_holds(t2), seed)


# -- long exact sequences --------------------------------------------------------

@dataclass(frozen=True)
class VanishingPattern:
    """Which degrees may be nonzero."""

    possibly_nonzero: Callable[[int], bool]
    label: str = ""

    def __call__(self, d: int) -> bool:
        return d >= 0 and bool(self.possibly_nonzero(d))

    @classmethod
    def of(cls, s: PoincareSeries) -> VanishingPattern:
        return cls(lambda d: d <= s.cutoff and s[d] != 0, s.label or "series")

    @classmethod
    def zero(cls) -> VanishingPattern:
        return cls(lambda d: False, "0")

    @classmethod
    def everywhere(cls) -> VanishingPattern:
        return cls(lambda d: True, "everywhere")

    @classmethod
    def congruence(cls, modulus: int, residue: int = 0) -> VanishingPattern:
        return cls(lambda d: d % modulus == residue % modulus, f"{residue} mod {modulus}")

    @classmethod
    def degrees(cls, ds: Iterable[int]) -> VanishingPattern:
        ds = frozenset(ds)
        return cls(lambda d: d in ds, f"degrees {sorted(ds)}")


Term = PoincareSeries | VanishingPattern | None


@dataclass
class LESSpec:
    """... -> A_n -> B_n -> C_{n-s} -> A_{n-1} -> ..."""

    A: Term
    B: Term
    C: Term
    shift: int
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.shift < 0:
            raise ValueError("shift must be >= 0")


def _pattern(t: Term, name: str) -> VanishingPattern:
    if t is None:
        raise UnderdeterminedError(f"underdetermined LES: no vanishing pattern for {name}")
    return t if isinstance(t, VanishingPattern) else VanishingPattern.of(t)


@dataclass
class ForcedIso:
    degree: int
    forced: bool
    flank_before: int
    flank_after: int
    reason: str


@dataclass
class ForcedIsoReport:
    spec: LESSpec
    results: list

    @property
    def forced_degrees(self) -> list[int]:
        return [r.degree for r in self.results if r.forced]

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "shift": self.spec.shift,
            "checked": [r.degree for r in self.results],
            "forced_iso_degrees": self.forced_degrees,
            "withheld": [{"degree": r.degree, "reason": r.reason} for r in self.results if not r.forced],
        }

    def render(self) -> str:
        forced = self.forced_degrees
        lines = [f"LES with shift {self.spec.shift}: A_n -> B_n forced isomorphism in {len(forced)} "
                 f"of {len(self.results)} checked degrees"]
        if forced:
            lines.append(f"  forced: {_ranges(forced)}")
        for r in self.results:
            if not r.forced:
                lines.append(f"  degree {r.degree}: no claim ({r.reason})")
        return "\n".join(lines)


def _ranges(ds: list[int]) -> str:
    if len(ds) <= 8:
        return ", ".join(map(str, ds))
    return f"{', '.join(map(str, ds[:4]))}, ..., {', '.join(map(str, ds[-2:]))}"


def les_forced_iso(spec: LESSpec, predicate: Callable[[int], bool] = lambda n: n % 4 == 0) -> ForcedIsoReport:
    """Degrees n where both C-terms flanking A_n -> B_n vanish.

    Those are C_{n+1-s} (mapping into A_n) and C_{n-s} (receiving B_n);
    negative degrees vanish.  Only rational isomorphisms are claimed.
    """
    _pattern(spec.A, "A")
    _pattern(spec.B, "B")
    C = _pattern(spec.C, "C")
    s = spec.shift
    out = []
    for n in range(spec.cutoff + 1):
        if not predicate(n):
            continue
        before, after = n + 1 - s, n - s
        bad = [d for d in (before, after) if C(d)]
        if bad:
            out.append(ForcedIso(n, False, before, after, f"C may be nonzero in degree {', '.join(map(str, bad))}"))
        else:
            out.append(ForcedIso(n, True, before, after, f"C_{before} = C_{after} = 0"))
    return ForcedIsoReport(spec, out)


def les_chain(A: PoincareSeries, B: PoincareSeries, C: PoincareSeries, shift: int,
              top: int | None = None) -> list[tuple[str, int]]:
    """Slots of the sequence from A_top down to degree 0, as (name, dim)."""
    if top is None:
        top = min(A.cutoff, B.cutoff, C.cutoff + shift)
    chain = []
    for n in range(top, -1, -1):
        chain.append((f"A_{n}", A[n]))
        chain.append((f"B_{n}", B[n]))
        chain.append((f"C_{n - shift}", C[n - shift] if n - shift <= C.cutoff else 0))
    return chain


def exactness_feasible(A: PoincareSeries, B: PoincareSeries, C: PoincareSeries, shift: int,
                       top: int | None = None) -> bool:
    """Do map ranks r_i >= 0 exist with dim_i = r_{i-1} + r_i along the chain?

    The rank entering the top slot is free (the sequence continues above the
    cutoff); the rank leaving the bottom slot is 0.  Each rank is forced by
    the previous one, so r_i = a_i + e_i * r_in with e_i = +-1 and the
    question is an interval problem in r_in.
    """
    dims = [d for _, d in les_chain(A, B, C, shift, top)]
    lo, hi = 0, dims[0] if dims else 0
    a, e = 0, 1  # r_{-1}(r_in) = 0 + 1 * r_in
    for d in dims:
        a, e = d - a, -e  # r_i = d_i - r_{i-1}
        # need a + e * r_in >= 0
        if e > 0:
            lo = max(lo, -a)
        else:
            hi = min(hi, a)
    # the last rank maps into zero: a + e * r_in = 0
    r_in = -a * e
    return lo <= r_in <= hi


# -- finitely generated abelian groups -------------------------------------------

def _prime_power_parts(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            q = 1
            while n % p == 0:
                n //= p
                q *= p
            out.append(q)
        p += 1
    if n > 1:
        out.append(n)
    return out


def _base_prime(q: int) -> int:
    return next(p for p in range(2, q + 1) if q % p == 0)


@dataclass(frozen=True)
class FgAbelianGroup:
    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("free rank must be >= 0")
        parts = []
        for t in self.torsion:
            if int(t) <= 1:
                raise ValueError("torsion orders must be > 1")
            parts.extend(_prime_power_parts(int(t)))
        object.__setattr__(self, "torsion", tuple(sorted(parts, key=lambda q: (_base_prime(q), q))))

    @classmethod
    def parse(cls, text: str) -> FgAbelianGroup:
        """'0', 'Z', 'Z^2', 'Z/8', 'Z + Z/2 + Z/2' and similar."""
        text = text.replace(" ", "").replace("⊕", "+")
        if text in ("0", ""):
            return cls()
        free, tors = 0, []
        for part in text.split("+"):
            if part.startswith("Z/"):
                tors.append(int(part[2:]))
            elif part == "Z":
                free += 1
            elif part.startswith("Z^"):
                free += int(part[2:])
            else:
                raise ValueError(f"cannot read group {text!r}")
        return cls(free, tuple(tors))

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{q}" for q in self.torsion)
        return " + ".join(parts) if parts else "0"


def not_isomorphic(g1: FgAbelianGroup, g2: FgAbelianGroup) -> bool:
    return g1 != g2
