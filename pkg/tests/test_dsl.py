import random

import pytest

from smithcheck import bundles as B
from smithcheck.dsl import (
    BAdd,
    BAtom,
    BExt,
    BNeg,
    BPull,
    BScale,
    BSub,
    BTensor,
    BTrivial,
    BVirt,
    DslError,
    parse_bundle,
    parse_bundle_ast,
    parse_element,
    parse_space,
    parse_spectrum,
    print_bundle,
    tokenize,
)
from smithcheck.spectra import Named, Plus, Reduced, Smash, Sphere, Suspend, Thom, Wedge, flatten, to_text

ATOMS = ["sigma", "V_SO3", "V_O3", "V_U1", "V_SU2", "V_O2"]


def random_ast(rng: random.Random, depth: int):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.2:
            return BTrivial(rng.randint(0, 9))
        return BAtom(rng.choice(ATOMS))
    kind = rng.choice(["neg", "add", "sub", "scale", "ext", "pull", "tensor"])
    sub = lambda: random_ast(rng, depth - 1)  # noqa: E731
    if kind == "neg":
        return BNeg(sub())
    if kind == "add":
        return BAdd(sub(), sub())
    if kind == "sub":
        return BSub(sub(), sub())
    if kind == "scale":
        return BScale(rng.randint(0, 12), sub())
    if kind == "ext":
        return BExt(sub(), sub())
    if kind == "pull":
        return BPull(rng.choice(["phi", "phi_inv", "i1", "i2", "p", "basepoint"]), sub())
    return BTensor(sub(), sub())


def test_random_ast_roundtrip():
    rng = random.Random(1234)
    for _ in range(500):
        ast = random_ast(rng, rng.randint(1, 5))
        text = print_bundle(ast)
        assert parse_bundle_ast(text) == ast, text


def test_printer_is_minimal_on_examples():
    assert print_bundle(parse_bundle_ast("(3*sigma - R^3) [+] (V_SO3 - R^3)")) == "3*sigma - R^3 [+] V_SO3 - R^3"
    assert print_bundle(parse_bundle_ast("-(sigma - R^1)")) == "-(sigma - R^1)"
    assert print_bundle(parse_bundle_ast("sigma - (V_SO3 - R^1)")) == "sigma - (V_SO3 - R^1)"
    assert print_bundle(parse_bundle_ast("(sigma - R^1) - R^2")) == "sigma - R^1 - R^2"


def test_precedence():
    ast = parse_bundle_ast("sigma + sigma [+] V_SO3")
    assert isinstance(ast, BExt) and isinstance(ast.left, BAdd)
    ast = parse_bundle_ast("-sigma + R^1")
    assert isinstance(ast, BAdd) and isinstance(ast.left, BNeg)
    ast = parse_bundle_ast("2*sigma - R^2")
    assert isinstance(ast, BSub) and isinstance(ast.left, BScale)


def test_call_forms():
    assert parse_bundle_ast("phi^*(V_O3)") == BPull("phi", BAtom("V_O3"))
    assert parse_bundle_ast("tensor(V_SO3, sigma)") == BTensor(BAtom("V_SO3"), BAtom("sigma"))
    assert parse_bundle_ast("virt(0, 1 + a^4)", B.Space(("BZ2",))) == BVirt(0, "1 + a^4")


def test_evaluated_labels_reparse():
    for text in ["4*sigma - R^4", "(3*sigma - R^3) [+] (V_SO3 - R^3)", "phi^*(V_O3 - R^3)", "-V_O3 + R^3"]:
        E = parse_bundle(text)
        assert parse_bundle(E.label) == E


def test_virt_needs_context():
    with pytest.raises(ValueError):
        parse_bundle("virt(0, 1)")
    X = B.Space(("BZ2",))
    E = parse_bundle("virt(0, 1 + a^4)", context=X)
    assert E == 4 * B.sigma() - 4


def test_parse_error_positions():
    with pytest.raises(DslError) as e:
        parse_bundle("sigma +")
    assert "line 1, column 8" in str(e.value)
    with pytest.raises(DslError) as e:
        parse_spectrum("MTSpin ^\n  garbage(")
    assert "line 2, column 3" in str(e.value)
    with pytest.raises(DslError):
        parse_bundle("sigma $ sigma")
    with pytest.raises(DslError):
        parse_bundle("(sigma")


def test_element_grammar():
    R = B.Space(("BZ2", "BSO3")).cohomology
    x = parse_element(R, "a^2*w2bar + w3bar + 1")
    assert str(x) == "1 + w3bar + a^2*w2bar"
    assert parse_element(R, str(x)) == x
    assert parse_element(R, "0").is_zero()
    with pytest.raises(DslError):
        parse_element(R, "2*a")
    with pytest.raises(DslError):
        parse_element(R, "b")


def test_tokens():
    toks = [(t.kind, t.text) for t in tokenize("a [+] b'")]
    assert toks == [("NAME", "a"), ("OP", "[+]"), ("NAME", "b'"), ("EOF", "")]


# -- spectra -------------------------------------------------------------------

def test_spectrum_examples():
    assert parse_spectrum("MTSpinH") == Named("MTSpinH")
    e = parse_spectrum("MTSpin ^ Thom(BSO3, V_SO3 - R^3)")
    assert isinstance(e, Smash) and e.factors[0] == Named("MTSpin") and isinstance(e.factors[1], Thom)
    assert parse_spectrum("Susp(3, MTSpinC)") == Suspend(3, Named("MTSpinC"))
    assert parse_spectrum("Susp(-1, S)") == Suspend(-1, Sphere())
    assert parse_spectrum("Plus(BZ2)") == Plus(parse_space("BZ2"))
    assert parse_spectrum("Reduced(BZ2)") == Reduced(parse_space("BZ2"))
    assert isinstance(parse_spectrum("Wedge(S, Reduced(BZ2))"), Wedge)
    assert parse_spectrum("Smash(MTSpin, Plus(BZ2))") == Smash((Named("MTSpin"), Plus(parse_space("BZ2"))))


def test_space_syntax():
    X = parse_space("BZ2 x BSO3")
    assert X.factors == ("BZ2", "BSO3")
    assert parse_space("pt").is_point()
    with pytest.raises(DslError):
        parse_space("BQ7")


SPECTRA = [
    "MTPinHminus",
    "MTSpin ^ Thom(BSO3, V_SO3 - R^3)",
    "MTSpinH ^ Thom(BZ2, -(3*sigma - R^3))",
    "Susp(-1, MTSpinH ^ Reduced(BZ2))",
    "Susp(6, MTSpin ^ Plus(BSO3))",
    "Thom(BZ2 x BSO3, phi^*(-V_O3 + R^3))",
    "Thom(BZ2 x BSO3, virt(0, 1 + a^2 + w2bar))",
    "Wedge(S, Reduced(BZ2))",
    "MTSpin ^ (MTSpinC ^ Plus(BU1))",
]


@pytest.mark.parametrize("text", SPECTRA)
def test_spectrum_text_roundtrip(text):
    e = parse_spectrum(text)
    again = parse_spectrum(to_text(e))
    assert flatten(again).key() == flatten(e).key()
    assert to_text(again) == to_text(e)


def test_random_spectrum_roundtrip():
    rng = random.Random(7)
    leaves = ["MTSpin", "MTSpinH", "MTPinMinus", "S", "Plus(BZ2)", "Reduced(BSO3)",
              "Thom(BZ2, sigma - R^1)", "Thom(BSO3, 2*V_SO3)", "Thom(BU1, V_U1)"]

    def gen(d):
        if d == 0 or rng.random() < 0.3:
            return rng.choice(leaves)
        k = rng.choice(["smash", "susp", "call", "wedge"])
        if k == "smash":
            return f"({gen(d - 1)}) ^ ({gen(d - 1)})"
        if k == "susp":
            return f"Susp({rng.randint(-3, 5)}, {gen(d - 1)})"
        if k == "wedge":
            return f"Wedge({gen(d - 1)}, {gen(d - 1)})"
        return f"Smash({gen(d - 1)}, {gen(d - 1)})"

    for _ in range(200):
        text = gen(3)
        e = parse_spectrum(text)
        assert flatten(parse_spectrum(to_text(e))).key() == flatten(e).key(), text


def test_thom_base_mismatch():
    with pytest.raises(DslError) as e:
        parse_spectrum("Thom(BSO3, sigma)")
    assert "column 12" in str(e.value)
    with pytest.raises(B.BaseMismatchError):
        parse_bundle("V_SO3 - sigma")


def test_readme_grammar_matches_module():
    import re
    from pathlib import Path

    import smithcheck.dsl as dsl

    readme = (Path(__file__).resolve().parents[1] / "README.md").read_text()
    block = re.search(r"```ebnf\n(.*?)```", readme, re.S).group(1)
    doc = dsl.__doc__.split("::", 1)[1].split("``virt")[0]
    norm = lambda s: [ln.strip() for ln in s.strip().splitlines() if ln.strip()]  # noqa: E731
    assert norm(block) == norm(doc)
