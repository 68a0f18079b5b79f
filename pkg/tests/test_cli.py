import json
import subprocess
import sys

import pytest

from smithcheck.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


MATRIX = [
    (("classify", "4*sigma - R^4"), 0),
    (("classify", "-(3*sigma - R^3)", "sigma - R^1"), 0),
    (("classify", "sigma", "R^1"), 1),
    (("classify", "sigma +"), 2),
    (("classify", "sigma + V_SO3"), 2),
    (("verify-lemma", "difference_spin_plus"), 0),
    (("verify-lemma", "pullchar"), 0),
    (("verify-lemma", "nope"), 2),
    (("equiv", "MTPinHminus", "MTSpinH ^ Thom(BZ2, -(3*sigma - R^3))"), 0),
    (("equiv", "MTPinMinus", "MTPinPlus", "--depth", "4"), 1),
    (("equiv", "MTPinHminus", "garbage("), 2),
    (("equiv", "MTSpin", "MTSpin", "--depth", "0"), 2),
    (("rewrite", "MTPinHplus"), 0),
    (("fibseq", "BZ2", "R^0", "sigma"), 0),
    (("fibseq", "BSO3", "V_SO3", "V_SO3"), 0),
    (("fibseq", "BZ2", "R^0", "R^1"), 1),
    (("verify", "main-thm"), 0),
    (("verify", "spinc-spinh"), 0),
    (("verify", "other"), 2),
    (("ranks", "SpinC", "--max-degree", "12"), 0),
    (("ranks", "Nope"), 2),
    (("rank-equality", "--kmax", "64"), 0),
    (("catalog",), 0),
    (("frobnicate",), 2),
    ((), 2),
]


@pytest.mark.parametrize("argv,code", MATRIX, ids=[" ".join(a) or "<none>" for a, _ in MATRIX])
def test_exit_codes(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code, out + err


def test_parse_diagnostic(capsys):
    code, _, err = run(capsys, "equiv", "MTPinHminus", "garbage(")
    assert code == 2 and "line 1, column 1" in err


def test_unknown_subcommand_shows_usage(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and "usage:" in err


@pytest.mark.parametrize("argv", [
    ("verify", "main-thm", "--format", "json"),
    ("ranks", "SpinH", "--max-degree", "16", "--format", "json"),
    ("equiv", "MTPinMinus", "MTSpin ^ Thom(BZ2, sigma - R^1)", "--format", "json"),
    ("catalog", "--format", "json"),
    ("rewrite", "MTPinC"),
])
def test_deterministic_output(capsys, argv):
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and a


def test_ranks_json(capsys):
    code, out, _ = run(capsys, "ranks", "SpinC", "--max-degree", "8", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["schema"] == 1
    assert d["theory"] == "SpinC" and d["degrees"] == list(range(9))
    assert d["ranks"] == [1, 0, 1, 0, 2, 0, 2, 0, 4]


def test_main_thm_json_and_replay(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "main-thm", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["pass"] and d["schema"] == 1
    chain = d["certificates"][0]["certificate"]
    p = tmp_path / "cert.json"
    p.write_text(json.dumps(chain))
    assert run(capsys, "rewrite", "--replay", str(p))[0] == 0
    # perturb the 4 sigma - 4 witness by (1 + a)
    for s in chain["steps"]:
        if s["rule"] == "REL_THOM" and s["witness"]["difference"]["w"] == "1 + a^4":
            s["witness"]["difference"]["w"] = "1 + a + a^4 + a^5"
    p.write_text(json.dumps(chain))
    code, out, _ = run(capsys, "rewrite", "--replay", str(p))
    assert code == 1 and "rejected" in out
    p.write_text("{")
    assert run(capsys, "rewrite", "--replay", str(p))[0] == 2


def test_text_certificate_is_numbered(capsys):
    _, out, _ = run(capsys, "verify", "main-thm")
    for n in range(1, 8):
        assert f"  {n:2d}. " in out
    assert "REL_THOM" in out and "4*sigma - R^4" in out


def test_les_check(capsys, tmp_path):
    spec = tmp_path / "les.json"
    spec.write_text(json.dumps({"A": "SpinC", "B": "SpinH", "C": "Spin_of_BSO3", "shift": 3,
                                "expect_forced": list(range(0, 257, 4))}))
    code, out, _ = run(capsys, "les-check", "--spec", str(spec), "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["exactness_feasible"] and d["pass"]

    spec.write_text(json.dumps({"A": "SpinC", "B": "SpinH", "C": {"nonzero_congruence": [4, 1]},
                                "shift": 3, "cutoff": 64, "expect_forced": [4]}))
    code, out, _ = run(capsys, "les-check", "--spec", str(spec))
    assert code == 1 and "no claim" in out

    spec.write_text(json.dumps({"A": None, "B": "SpinH", "C": "SpinC", "shift": 3}))
    assert run(capsys, "les-check", "--spec", str(spec))[0] == 2
    spec.write_text(json.dumps({"A": {"weird": 1}, "B": "SpinH", "C": "SpinC"}))
    assert run(capsys, "les-check", "--spec", str(spec))[0] == 2
    assert run(capsys, "les-check", "--spec", str(tmp_path / "missing.json"))[0] == 2


def test_catalog_override(capsys, tmp_path):
    p = tmp_path / "cat.json"
    p.write_text(json.dumps([
        {"name": "Pin-", "degree": 2, "free_rank": 0, "torsion": [4], "citation": "x"},
        {"name": "Spin x_{+-1} Z/4", "degree": 1, "free_rank": 0, "torsion": [4], "citation": "x"},
        {"name": "Pin^{h-}", "degree": 3, "free_rank": 0, "torsion": [], "citation": "x"},
    ]))
    code, out, _ = run(capsys, "catalog", "--catalog", str(p))
    assert code == 1 and "Z/4 ~= Z/4" in out
    p.write_text("[")
    assert run(capsys, "catalog", "--catalog", str(p))[0] == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "smithcheck", "verify-lemma", "four_sigma_spin"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "PASS" in r.stdout
