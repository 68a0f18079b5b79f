import itertools

import pytest
from hypothesis import given, settings, strategies as st

from smithcheck import bundles as B
from smithcheck.dsl import parse_bundle, parse_element
from smithcheck.f2algebra import UnitSeries

T = 16
S = B.sigma(T)
VSO3 = B.tautological_SO(3, T)
VO3 = B.tautological_O(3, T)
MAPS = B.catalog_maps(T)
X = B.Space(("BZ2", "BSO3"), T)


def cls(space, text):
    return parse_element(space.cohomology, text)


def virt(space, draw_monos):
    R = space.cohomology
    x = R.one()
    for m in draw_monos:
        x = x + R.monomial(m)
    return x


def bundles_over(space, rank=st.integers(-4, 4)):
    R = space.cohomology
    mons = [m for d in range(1, 7) for m in R.monomials_of_degree(d)]
    return st.builds(lambda r, ms: B.VirtualBundle(space, r, UnitSeries(virt(space, ms))),
                     rank, st.sets(st.sampled_from(mons), max_size=4))


# -- Whitney sums and negation ----------------------------------------------------

def test_three_sigma():
    E = S + S + S
    assert E.rank == 3
    assert E.total_sw.total == cls(S.base, "1 + a + a^2 + a^3")


def test_external_sum_factor_spectra_twist():
    E = B.external_sum(3 * S - 3, VSO3 - 3)
    assert E.rank == 0
    assert E.base.factors == ("BZ2", "BSO3")


def test_zero_summand():
    assert S + B.trivial(0) == S


def test_negate_examples():
    n = B.negate(3 * S)
    assert str(n.w1) == "a" and n.w2.is_zero()
    t = B.negate(B.trivial(5))
    assert t.rank == -5 and t.is_trivial() is False and t.total_sw.total == t.base.cohomology.one()
    assert str(B.negate(VSO3).w2) == "w2bar"


def test_labels_do_not_affect_equality():
    assert S.relabel("x") == S
    assert parse_bundle("4*sigma - R^4") == (4 * S - 4).relabel("anything")


def test_dsl_examples():
    E = parse_bundle("4*sigma - R^4")
    assert E.rank == 0 and str(E.total_sw) == "1 + a^4"
    F = parse_bundle("(3*sigma - R^3) [+] (V_SO3 - R^3)")
    assert F.rank == 0 and F.base == X
    Z = parse_bundle("R^0")
    assert Z.is_trivial()


def test_base_mismatch():
    with pytest.raises(B.BaseMismatchError):
        parse_bundle("sigma + V_SO3")


# -- pullbacks ------------------------------------------------------------------

def test_pullback_phi():
    E = B.pullback(MAPS["phi"], VO3)
    assert str(E.w1) == "a"
    assert str(E.w2) == "a^2 + w2bar"


def test_pullback_i2():
    assert str(B.pullback(MAPS["i2"], VO3).w2) == "a^2"


def test_pullback_identity():
    assert B.pullback(B.identity_map(VSO3.base), VSO3) == VSO3


def test_phi_inverse_roundtrip():
    E = 2 * VO3 - 1
    back = B.pullback(MAPS["phi_inv"], B.pullback(MAPS["phi"], E))
    assert back == E


@settings(max_examples=60, deadline=None)
@given(bundles_over(B.Space(("BO3",), T)), bundles_over(B.Space(("BO3",), T)))
def test_pullback_additive(E, F):
    f = MAPS["phi"]
    assert B.pullback(f, E + F) == B.pullback(f, E) + B.pullback(f, F)
    assert B.pullback(f, -E) == -B.pullback(f, E)


@settings(max_examples=60, deadline=None)
@given(bundles_over(B.Space(("BO3",), T)))
def test_pullback_multiplicative_on_classes(E):
    f = MAPS["phi"]
    hom = B._build_hom(f)
    P = B.pullback(f, E)
    for i in range(1, 5):
        for j in range(1, 5):
            assert hom(E.w(i) * E.w(j)) == P.w(i) * P.w(j)


# -- tensoring with a line ------------------------------------------------------

def _symmetric_oracle(a_power_degree: int):
    """Class of w_k(V (x) L) for an oriented 3-plane V and line L, by brute force.

    Expand prod (1 + x_i + a) over three formal roots with e1 = 0, and find the
    unique F2 combination of monomials in a, e2, e3 that matches in the roots.
    """
    k = a_power_degree

    def poly_mul(p, q):
        out = {}
        for m1 in p:
            for m2 in q:
                m = tuple(x + y for x, y in zip(m1, m2))
                out[m] = out.get(m, 0) ^ 1
        return {m for m, c in out.items() if c}

    x1, x2, x3, a = ((1, 0, 0, 0),), ((0, 1, 0, 0),), ((0, 0, 1, 0),), ((0, 0, 0, 1),)
    one = {(0, 0, 0, 0)}
    total = one
    for xi in (x1, x2, x3):
        total = poly_mul(total, one | set(xi) | set(a))
    target = {m for m in total if sum(m) == k}
    e = {
        "e1": set(x1) | set(x2) | set(x3),
        "e2": {(1, 1, 0, 0), (1, 0, 1, 0), (0, 1, 1, 0)},
        "e3": {(1, 1, 1, 0)},
        "a": set(a),
    }
    # monomials in (a, e1, e2, e3) of degree k
    basis = [m for m in itertools.product(range(k + 1), repeat=4)
             if m[0] * 1 + m[1] * 1 + m[2] * 2 + m[3] * 3 == k]

    def expand(m):
        p = one
        for name, power in zip(("a", "e1", "e2", "e3"), m):
            for _ in range(power):
                p = poly_mul(p, e[name])
        return p

    expansions = [expand(m) for m in basis]
    for r in range(len(basis) + 1):
        for combo in itertools.combinations(range(len(basis)), r):
            acc = set()
            for i in combo:
                acc ^= expansions[i]
            if acc == target:
                # the answer may use e1; with e1 = 0 drop those terms
                return sorted(basis[i] for i in combo if basis[i][1] == 0)
    raise AssertionError("no symmetric expression")


def _render(terms):
    R = X.cohomology
    out = R.zero()
    for a, _, e2, e3 in terms:
        out = out + R.monomial((a, e2, e3))
    return out


@pytest.mark.parametrize("k", [1, 2, 3])
def test_tensor_line_against_symmetric_functions(k):
    s, v = B.external_pair(S, VSO3)
    assert B.tensor_line(v, s).w(k) == _render(_symmetric_oracle(k))


def test_tensor_line_examples():
    s, v = B.external_pair(S, VSO3)
    E = B.tensor_line(v, s)
    assert str(E.w1) == "a"
    assert str(E.w2) == "a^2 + w2bar"
    assert E.w(3) == cls(X, "w3bar + a*w2bar + a^3")
    triv = B.trivial(1, VSO3.base)
    assert B.tensor_line(VSO3, triv) == VSO3


def test_tensor_with_trivial_line_on_o3():
    assert B.tensor_line(VO3, B.trivial(1, VO3.base)) == VO3


# -- classification -------------------------------------------------------------

def test_classify_examples():
    assert B.classify(4 * S - 4).spin
    assert B.classify(2 * VSO3).spin
    tag = B.classify(S)
    assert not tag.orientable and not tag.spin and not tag.pin_minus
    # w2(sigma) = 0, so the Pin^+ rule holds for sigma itself
    assert tag.pin_plus


def test_spin_z4_rule():
    assert B.classify(2 * S).spin_z4
    assert not B.classify(4 * S).spin_z4


def test_twist_dictionary():
    assert B.twist_dictionary(VSO3 - 3) == "Spin^h"
    assert B.twist_dictionary(S - 1) == "Pin^-"
    assert B.twist_dictionary(-(3 * S - 3)) == "Pin^-"
    assert B.twist_dictionary(S) == "Pin^-"
    assert B.twist_dictionary(-S) == "Pin^+"
    assert B.twist_dictionary(B.tautological_U1(T)) == "Spin^c"


def test_twist_equivalent():
    E = -(3 * S - 3)
    assert B.twist_equivalent(E, E)
    eq = B.twist_equivalent(E, S - 1)
    assert eq and eq.difference == 4 * S - 4
    plus = B.twist_equivalent(B.pullback(MAPS["phi"], VO3 - 3), B.external_sum(3 * S - 3, VSO3 - 3))
    assert plus and plus.difference.w1.is_zero() and plus.difference.w2.is_zero()
    assert not B.twist_equivalent(S - 1, B.trivial(0, S.base))


def test_perturbed_difference_is_not_spin():
    # 4 sigma - 4 times (1 + a): no longer spin
    D = 4 * S - 4
    bad = B.VirtualBundle(D.base, 0, D.total_sw * UnitSeries(cls(D.base, "1 + a")))
    assert not B.is_spin(bad)


# -- lemmas ---------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(B.LEMMAS))
def test_lemmas_pass(name):
    rep = B.verify_lemma(name)
    assert rep.passed, rep.render()
    d = rep.to_json()
    assert d["schema"] == 1 and d["lemma"] == name and d["pass"] is True
    assert all({"label", "class", "value"} <= set(s) for s in d["steps"])


def test_difference_spin_step_values():
    rep = B.verify_lemma("difference_spin_plus")
    values = {s.label: s.value for s in rep.steps}
    assert values["w2(3 sigma)"] == "a^2"
    assert values["w2(-3 sigma) = w2(3 sigma) + w1(3 sigma)^2"] == "0"


def test_unknown_lemma():
    with pytest.raises(KeyError):
        B.verify_lemma("nope")


# -- properties -----------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(bundles_over(X))
def test_negate_involution(E):
    assert B.negate(B.negate(E)) == E
    assert (E + B.negate(E)).is_trivial()


@settings(max_examples=60, deadline=None)
@given(bundles_over(X), bundles_over(X))
def test_whitney_commutes(E, F):
    assert E + F == F + E
    assert E - F == -(F - E)
