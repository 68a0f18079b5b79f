"""Bundled table of known bordism groups, with literature citations.

These are inputs, not computations: 2-primary torsion is out of reach of
the rank machinery and is taken from the cited sources.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .ranks import FgAbelianGroup, bordism_ranks, not_isomorphic


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    degree: int
    group: FgAbelianGroup
    citation: str

    @property
    def key(self) -> str:
        return f"{self.name}_{self.degree}"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "degree": self.degree,
            "free_rank": self.group.free_rank,
            "torsion": list(self.group.torsion),
            "group": str(self.group),
            "citation": self.citation,
        }


def load_catalog(path: str | Path | None = None) -> list[CatalogEntry]:
    if path is None:
        text = resources.files("smithcheck").joinpath("data/catalog.json").read_text()
    else:
        text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise CatalogError("catalog must be a JSON list")
    out = []
    for i, d in enumerate(raw):
        try:
            g = FgAbelianGroup(int(d["free_rank"]), tuple(int(t) for t in d["torsion"]))
            out.append(CatalogEntry(str(d["name"]), int(d["degree"]), g, str(d["citation"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise CatalogError(f"catalog entry {i}: {exc}") from None
    return out


def group_catalog_lookup(name: str, degree: int | None = None,
                         catalog: list[CatalogEntry] | None = None) -> CatalogEntry:
    """Look up ``name`` in ``degree``; ``name`` may also be 'Pin-_2' style."""
    if catalog is None:
        catalog = load_catalog()
    if degree is None and "_" in name:
        head, _, tail = name.rpartition("_")
        if tail.isdigit():
            name, degree = head, int(tail)
    hits = [e for e in catalog if e.name == name and (degree is None or e.degree == degree)]
    if not hits:
        raise KeyError(f"no catalog entry for {name} in degree {degree}")
    if len(hits) > 1:
        raise KeyError(f"{name} is in the catalog in several degrees; give one")
    return hits[0]


@dataclass
class Verdict:
    label: str
    left: str
    right: str
    isomorphic: bool
    detail: str

    def to_json(self) -> dict:
        return {"label": self.label, "left": self.left, "right": self.right,
                "isomorphic": self.isomorphic, "detail": self.detail}

    def render(self) -> str:
        rel = "~=" if self.isomorphic else "not ~="
        return f"{self.label}: {self.left} {rel} {self.right}\n  {self.detail}"


def verify_not_an_isom(catalog: list[CatalogEntry] | None = None) -> Verdict:
    """The Pin- Smith map in degree 2 lands in a group of a different order."""
    a = group_catalog_lookup("Pin-", 2, catalog)
    b = group_catalog_lookup("Spin x_{+-1} Z/4", 1, catalog)
    iso = not not_isomorphic(a.group, b.group)
    return Verdict("Pin- degree 2 vs Spin x_{+-1} Z/4 degree 1", f"{a.group}", f"{b.group}", iso,
                   f"[{a.citation}] vs [{b.citation}]; so the Smith map between them is not an isomorphism"
                   if not iso else "isomorphic")


def verify_hp_remark(catalog: list[CatalogEntry] | None = None) -> Verdict:
    """Rationally, reduced Spin^h bordism of HP^oo in degree 4 is nonzero, while Pin^{h-}_3 = 0."""
    rank = bordism_ranks("SpinH_of_HPinf_reduced", 8)[4]
    e = group_catalog_lookup("Pin^{h-}", 3, catalog)
    iso = rank == 0 and e.group.is_trivial()
    return Verdict("reduced Spin^h_4(HP^oo) vs Pin^{h-}_3", f"rank {rank}", str(e.group), iso,
                   f"rank computed from the rational AHSS; Pin^{{h-}}_3 from [{e.citation}]; "
                   "so no Smith-type isomorphism between them" if not iso else "isomorphic")
