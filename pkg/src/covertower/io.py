"""Versioned JSON documents, canonical bytes, and the workspace store.

Every persisted object carries a ``schema`` tag (subgroup/1, tower/1,
vaut/1, cycle/1, ledger/1).  Serialization is canonical: sorted keys,
fixed separators, one trailing newline, no timestamps; identical inputs
therefore produce byte-identical files, and the workspace store names
files by content hash.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Optional, Sequence, Union

from .chartower import (
    Automorphism,
    CharCertificate,
    CharSubgroup,
    TowerEdge,
    TowerGraph,
    TowerNode,
)
from .cosets import Subgroup, canonicalize, covering_genus
from .errors import SchemaError
from .vaut import TwoArrowCycle, VirtualAutomorphism
from .words import SurfacePresentation, Word

SCHEMAS = ("subgroup/1", "tower/1", "vaut/1", "cycle/1", "ledger/1")


def canonical_json_bytes(doc: dict) -> bytes:
    return (
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    ).encode("utf-8")


def content_hash(doc: dict) -> str:
    return hashlib.sha256(canonical_json_bytes(doc)).hexdigest()


def _require(doc: dict, key: str, kind: type):
    if key not in doc:
        raise SchemaError(f"missing key {key!r}")
    value = doc[key]
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"key {key!r} must be an integer")
    if not isinstance(value, kind):
        raise SchemaError(f"key {key!r} has the wrong type")
    return value


def _check_schema(doc: dict, expected: str) -> None:
    tag = _require(doc, "schema", str)
    if tag != expected:
        raise SchemaError(f"expected schema {expected!r}, found {tag!r}")


def _word_doc(w: Word) -> list[int]:
    return [int(x) for x in w]


def _word_from(raw) -> Word:
    if not isinstance(raw, list) or not all(
        isinstance(x, int) and not isinstance(x, bool) and x != 0 for x in raw
    ):
        raise SchemaError("words must be lists of nonzero integers")
    return tuple(raw)


def _words_doc(words: Sequence[Word]) -> list[list[int]]:
    return [_word_doc(w) for w in words]


def _words_from(raw) -> tuple[Word, ...]:
    if not isinstance(raw, list):
        raise SchemaError("expected a list of words")
    return tuple(_word_from(w) for w in raw)


# ---------------------------------------------------------------------------
# Subgroups and certificates.


def _automorphism_doc(phi: Automorphism) -> dict:
    doc: dict = {"name": phi.name, "images": _words_doc(phi.images)}
    if phi.inverse_images is not None:
        doc["inverseImages"] = _words_doc(phi.inverse_images)
    return doc


def _automorphism_from(raw, pres: SurfacePresentation) -> Automorphism:
    if not isinstance(raw, dict):
        raise SchemaError("automorphism entries must be objects")
    name = _require(raw, "name", str)
    images = _words_from(_require(raw, "images", list))
    inverse = None
    if "inverseImages" in raw:
        inverse = _words_from(raw["inverseImages"])
    return Automorphism(pres, images, inverse, name)


def _certificate_doc(cert: CharCertificate) -> dict:
    doc: dict = {"kind": cert.kind, "partial": bool(cert.partial)}
    if cert.level is not None:
        doc["level"] = int(cert.level)
    if cert.auts:
        doc["auts"] = [_automorphism_doc(a) for a in cert.auts]
    if cert.parents:
        doc["parents"] = [subgroup_doc(p) for p in cert.parents]
    return doc


def _certificate_from(raw, pres: SurfacePresentation) -> CharCertificate:
    if not isinstance(raw, dict):
        raise SchemaError("certificate must be an object")
    kind = _require(raw, "kind", str)
    level = None
    if "level" in raw:
        level = _require(raw, "level", int)
    auts = tuple(
        _automorphism_from(a, pres) for a in raw.get("auts", [])
    )
    parents = tuple(
        char_subgroup_from_doc(p) for p in raw.get("parents", [])
    )
    partial = bool(raw.get("partial", False))
    return CharCertificate(kind, level, auts, parents, partial)


def subgroup_doc(sub: Union[Subgroup, CharSubgroup]) -> dict:
    certificate = None
    if isinstance(sub, CharSubgroup):
        certificate = sub.certificate
        sub = sub.subgroup
    sub = canonicalize(sub)
    if not isinstance(sub.pres, SurfacePresentation):
        raise SchemaError("only base-surface subgroups are serialized")
    doc: dict = {
        "schema": "subgroup/1",
        "genus": sub.pres.genus,
        "index": sub.index,
        "basepoint": sub.basepoint,
        "table": [list(row) for row in sub.table],
    }
    if certificate is not None:
        doc["certificate"] = _certificate_doc(certificate)
    return doc


def subgroup_from_doc(doc: dict) -> Subgroup:
    _check_schema(doc, "subgroup/1")
    genus = _require(doc, "genus", int)
    if genus < 2:
        raise SchemaError("genus must be at least 2")
    table_raw = _require(doc, "table", list)
    basepoint = _require(doc, "basepoint", int)
    index = _require(doc, "index", int)
    pres = SurfacePresentation(genus)
    rows = []
    for row in table_raw:
        if not isinstance(row, list) or len(row) != 2 * genus or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in row
        ):
            raise SchemaError("table rows must list one target per generator")
        rows.append(tuple(row))
    if len(rows) != index:
        raise SchemaError("declared index does not match the table")
    sub = canonicalize(Subgroup(pres, tuple(rows), basepoint))
    return sub


def char_subgroup_from_doc(doc: dict) -> CharSubgroup:
    sub = subgroup_from_doc(doc)
    if "certificate" not in doc:
        raise SchemaError("certified subgroup document lacks a certificate")
    pres = sub.pres
    assert isinstance(pres, SurfacePresentation)
    return CharSubgroup(sub, _certificate_from(doc["certificate"], pres))


# ---------------------------------------------------------------------------
# Towers.


def tower_doc(tower: TowerGraph) -> dict:
    nodes = []
    for node in tower.nodes:
        nodes.append(
            {
                "name": node.name,
                "degree": node.degree,
                "genus": node.genus,
                "subgroup": subgroup_doc(node.char),
            }
        )
    edges = [
        {
            "sub": e.sub,
            "super": e.super,
            "relativeDegree": e.relative_degree,
            "charTag": e.char_tag,
        }
        for e in tower.edges
    ]
    return {
        "schema": "tower/1",
        "genus": tower.pres.genus,
        "nodes": nodes,
        "edges": edges,
    }


def tower_from_doc(doc: dict) -> TowerGraph:
    _check_schema(doc, "tower/1")
    genus = _require(doc, "genus", int)
    pres = SurfacePresentation(genus)
    nodes = []
    names = set()
    for raw in _require(doc, "nodes", list):
        if not isinstance(raw, dict):
            raise SchemaError("tower nodes must be objects")
        name = _require(raw, "name", str)
        if name in names:
            raise SchemaError(f"duplicate node name {name!r}")
        names.add(name)
        char = char_subgroup_from_doc(_require(raw, "subgroup", dict))
        degree = _require(raw, "degree", int)
        node_genus = _require(raw, "genus", int)
        if degree != char.subgroup.index:
            raise SchemaError(f"node {name!r}: degree does not match the table")
        if node_genus != covering_genus(char.subgroup):
            raise SchemaError(f"node {name!r}: genus does not match the table")
        nodes.append(TowerNode(name, char, node_genus, degree))
    edges = []
    for raw in _require(doc, "edges", list):
        if not isinstance(raw, dict):
            raise SchemaError("tower edges must be objects")
        sub = _require(raw, "sub", str)
        sup = _require(raw, "super", str)
        if sub not in names or sup not in names:
            raise SchemaError("edge references an unknown node")
        tag = _require(raw, "charTag", str)
        if tag not in ("yes", "no", "unknown"):
            raise SchemaError(f"unknown characteristic tag {tag!r}")
        edges.append(TowerEdge(sub, sup, _require(raw, "relativeDegree", int), tag))
    return TowerGraph(pres, tuple(nodes), tuple(edges))


def tower_dot(tower: TowerGraph) -> str:
    """Deterministic DOT rendering: arrows point from finer to coarser."""
    lines = ["digraph tower {"]
    for node in sorted(tower.nodes, key=lambda n: (n.degree, n.name)):
        lines.append(
            f'  "{node.name}" [label="{node.name} deg={node.degree} '
            f'genus={node.genus}"];'
        )
    for edge in sorted(tower.edges, key=lambda e: (e.sub, e.super)):
        lines.append(
            f'  "{edge.sub}" -> "{edge.super}" '
            f'[label="{edge.relative_degree} {edge.char_tag}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Virtual automorphisms and cycles.


def vaut_doc(v: VirtualAutomorphism) -> dict:
    doc = {
        "schema": "vaut/1",
        "domain": subgroup_doc(v.domain),
        "codomain": subgroup_doc(v.codomain),
        "images": _words_doc(v.images),
    }
    if v.inverse_images is not None:
        doc["inverseImages"] = _words_doc(v.inverse_images)
    return doc


def vaut_from_doc(doc: dict) -> VirtualAutomorphism:
    _check_schema(doc, "vaut/1")
    domain = subgroup_from_doc(_require(doc, "domain", dict))
    codomain = subgroup_from_doc(_require(doc, "codomain", dict))
    images = _words_from(_require(doc, "images", list))
    inverse = None
    if "inverseImages" in doc:
        inverse = _words_from(doc["inverseImages"])
    return VirtualAutomorphism(domain, codomain, images, inverse)


def cycle_doc(cycle: TwoArrowCycle) -> dict:
    doc: dict = {
        "schema": "cycle/1",
        "alpha": subgroup_doc(cycle.alpha),
        "beta": subgroup_doc(cycle.beta),
    }
    if cycle.forward is not None:
        doc["forward"] = _words_doc(cycle.forward)
    if cycle.backward is not None:
        doc["backward"] = _words_doc(cycle.backward)
    return doc


def cycle_from_doc(doc: dict) -> TwoArrowCycle:
    _check_schema(doc, "cycle/1")
    alpha = subgroup_from_doc(_require(doc, "alpha", dict))
    beta = subgroup_from_doc(_require(doc, "beta", dict))
    forward = _words_from(doc["forward"]) if "forward" in doc else None
    backward = _words_from(doc["backward"]) if "backward" in doc else None
    return TwoArrowCycle(alpha, beta, forward, backward)


# ---------------------------------------------------------------------------
# Workspace: a content-addressed directory of documents plus an index.

WORKSPACE_ENV = "COVERTOWER_WORKSPACE"
INDEX_NAME = "index.json"


def workspace_dir(explicit: Optional[str] = None) -> Path:
    root = explicit or os.environ.get(WORKSPACE_ENV) or "covertower-workspace"
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def load_doc(path: Union[str, Path]) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {path}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("schema"), str):
        raise SchemaError(f"document lacks a schema tag: {path}")
    return doc


def store_doc(root: Path, doc: dict) -> Path:
    """Write a document under its content hash and update the index."""
    schema = doc.get("schema")
    if schema not in SCHEMAS:
        raise SchemaError(f"refusing to store unknown schema {schema!r}")
    stem = schema.split("/")[0]
    name = f"{stem}-{content_hash(doc)[:16]}.json"
    path = root / name
    path.write_bytes(canonical_json_bytes(doc))
    index_path = root / INDEX_NAME
    entries = {}
    if index_path.exists():
        index = load_doc(index_path)
        for entry in index.get("entries", []):
            entries[entry["file"]] = entry["schema"]
    entries[name] = schema
    index_doc = {
        "schema": "workspace-index/1",
        "entries": [
            {"file": f, "schema": s} for f, s in sorted(entries.items())
        ],
    }
    index_path.write_bytes(canonical_json_bytes(index_doc))
    return path
