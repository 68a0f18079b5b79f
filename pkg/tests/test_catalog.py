import json

import pytest

from smithcheck import catalog as cat
from smithcheck.ranks import FgAbelianGroup, bordism_ranks, spin_series


def test_bundled_entries():
    entries = cat.load_catalog()
    keys = {e.key for e in entries}
    assert {"Pin-_2", "Spin x_{+-1} Z/4_1", "Pin^{h-}_3"} <= keys
    assert all(e.citation for e in entries)


def test_lookup():
    assert str(cat.group_catalog_lookup("Pin-", 2).group) == "Z/8"
    assert str(cat.group_catalog_lookup("Pin-_2").group) == "Z/8"
    assert cat.group_catalog_lookup("Pin^{h-}", 3).group.is_trivial()
    with pytest.raises(KeyError):
        cat.group_catalog_lookup("Pin-", 7)


def test_free_ranks_match_series():
    # where the catalog lists a free rank, it agrees with the rational computation
    for e in cat.load_catalog():
        if e.name == "Spin":
            assert spin_series(8)[e.degree] == e.group.free_rank
        elif e.name == "Spin^c":
            assert bordism_ranks("SpinC", 8)[e.degree] == e.group.free_rank


def test_verdicts():
    v = cat.verify_not_an_isom()
    assert not v.isomorphic and (v.left, v.right) == ("Z/8", "Z/4")
    h = cat.verify_hp_remark()
    assert not h.isomorphic and h.left == "rank 1" and h.right == "0"


def test_override(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps([
        {"name": "Pin-", "degree": 2, "free_rank": 0, "torsion": [4], "citation": "test"},
        {"name": "Spin x_{+-1} Z/4", "degree": 1, "free_rank": 0, "torsion": [4], "citation": "test"},
    ]))
    entries = cat.load_catalog(p)
    assert cat.verify_not_an_isom(entries).isomorphic
    assert entries[0].group == FgAbelianGroup(0, (4,))


def test_bad_catalog(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(cat.CatalogError):
        cat.load_catalog(p)
    p.write_text(json.dumps([{"name": "x"}]))
    with pytest.raises(cat.CatalogError):
        cat.load_catalog(p)
