"""JSON interchange documents.

Every document is an object with ``"schema"`` and ``"kind"`` fields.  All
values are integers, strings, lists and objects; no floats.  Output is
written with sorted keys so that equal values give byte-identical files.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import GaldeltaError, ParseError
from .fincat import FiniteCategory, Functor, validate_category
from .finset import SetFunctor
from .profin import Tower, validate_tower
from .simplex import FiniteGroup, GSet, SimplicialGaloisDatum, validate_gset, validate_group, validate_simplicial_datum

SCHEMA = "galdelta/1"


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# -----------------------------------------------------------------------------
# encoding
# -----------------------------------------------------------------------------

def _category_body(C: FiniteCategory) -> dict:
    return C.to_raw()


def _functor_body(F: Functor) -> dict:
    return {"object_map": F.object_map.tolist(), "morphism_map": F.morphism_map.tolist()}


def _group_body(G: FiniteGroup) -> dict:
    return {"name": G.name, "elements": G.order, "identity": G.identity, "table": [list(r) for r in G.table]}


def to_document(value: Any) -> dict:
    """Document for a category, functor, set functor, tower, datum, group or
    G-set; objects with their own ``to_document`` are passed through."""
    if isinstance(value, FiniteCategory):
        body = {"kind": "category", **_category_body(value)}
    elif isinstance(value, SetFunctor):
        body = {"kind": "set_functor", "source": _category_body(value.source), "sizes": list(value.sizes),
                "images": [list(i) for i in value.images]}
    elif isinstance(value, Functor):
        body = {"kind": "functor", "source": _category_body(value.source),
                "target": _category_body(value.target), **_functor_body(value)}
    elif isinstance(value, Tower):
        body = {"kind": "tower", "stages": [_category_body(C) for C in value.stages],
                "transitions": [_functor_body(F) for F in value.transitions]}
        if "moduli" in value.meta:
            body["moduli"] = list(value.meta["moduli"])
    elif isinstance(value, SimplicialGaloisDatum):
        body = {
            "kind": "datum",
            "truncation": value.truncation,
            "fibers": [_category_body(C) for C in value.fibers],
            "faces": [{"level": m, "index": i, **_functor_body(F)} for (m, i), F in sorted(value.faces.items())],
            "degeneracies": [{"level": m, "index": i, **_functor_body(F)}
                             for (m, i), F in sorted(value.degeneracies.items())],
        }
        if value.labels is not None:
            body["labels"] = [[list(t) if isinstance(t, tuple) else t for t in level] for level in value.labels]
        if "group" in value.meta:
            body["group"] = _group_body(value.meta["group"])
            body["xset"] = {"name": value.meta["xset"].name, "action": [list(r) for r in value.meta["xset"].action]}
    elif isinstance(value, FiniteGroup):
        body = {"kind": "group", **_group_body(value)}
    elif isinstance(value, GSet):
        body = {"kind": "gset", "name": value.name, "group": _group_body(value.group),
                "action": [list(r) for r in value.action]}
    elif isinstance(value, dict):
        body = dict(value)
        body.setdefault("kind", "report")
    elif hasattr(value, "to_document"):
        body = {"kind": "report", **value.to_document()}
    else:
        raise TypeError(f"no document form for {type(value).__name__}")
    return {"schema": SCHEMA, **body}


def save_document(value: Any, path) -> None:
    Path(path).write_text(dumps(to_document(value)))


# -----------------------------------------------------------------------------
# decoding
# -----------------------------------------------------------------------------

def _get(doc, key: str, where: str, kind=None):
    if not isinstance(doc, dict):
        raise ParseError(f"{where} must be an object", location=where)
    if key not in doc:
        raise ParseError(f"missing field {where}.{key}", location=f"{where}.{key}", field=key)
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"field {where}.{key} has the wrong type", location=f"{where}.{key}", field=key)
    return value


def _int_list(doc, key: str, where: str) -> list:
    value = _get(doc, key, where, list)
    if any(isinstance(v, bool) or not isinstance(v, int) for v in value):
        raise ParseError(f"field {where}.{key} must hold integers", location=f"{where}.{key}", field=key)
    return value


def _located(where: str, fn, *args):
    """Run a validator, adding the document location to its error."""
    try:
        return fn(*args)
    except ParseError:
        raise
    except GaldeltaError as exc:
        exc.details.setdefault("location", where)
        raise


def _category(doc, where: str) -> FiniteCategory:
    _get(doc, "objects", where, int)
    _get(doc, "morphisms", where, list)
    _int_list(doc, "identities", where)
    _get(doc, "composition", where, list)
    return _located(where, validate_category, doc)


def _maps(doc, where: str) -> tuple[list, list]:
    return _int_list(doc, "object_map", where), _int_list(doc, "morphism_map", where)


def _group(doc, where: str) -> FiniteGroup:
    table = _get(doc, "table", where, list)
    identity = _get(doc, "identity", where, int)
    name = doc.get("name", "")
    return _located(where, validate_group, table, identity, name)


def from_document(doc: dict) -> Any:
    """Typed value for a parsed document; raises :class:`ParseError` when a
    field is missing and the module's own error when validation fails."""
    schema = _get(doc, "schema", "$", str)
    if schema != SCHEMA:
        raise ParseError(f"unsupported schema {schema!r}", location="$.schema", field="schema")
    kind = _get(doc, "kind", "$", str)
    if kind == "category":
        return _category(doc, "$")
    if kind == "functor":
        S = _category(_get(doc, "source", "$"), "$.source")
        T = _category(_get(doc, "target", "$"), "$.target")
        om, mm = _maps(doc, "$")
        return _located("$", Functor(S, T, om, mm).validate)
    if kind == "set_functor":
        C = _category(_get(doc, "source", "$"), "$.source")
        sizes = _int_list(doc, "sizes", "$")
        images = [tuple(i) for i in _get(doc, "images", "$", list)]
        return _located("$", SetFunctor(C, tuple(sizes), tuple(images)).validate)
    if kind == "tower":
        stages = [_category(c, f"$.stages[{i}]") for i, c in enumerate(_get(doc, "stages", "$", list))]
        transitions = [_maps(t, f"$.transitions[{i}]") for i, t in enumerate(_get(doc, "transitions", "$", list))]
        meta = {"moduli": tuple(doc["moduli"])} if "moduli" in doc else None
        return _located("$", validate_tower, stages, transitions, meta)
    if kind == "datum":
        n = _get(doc, "truncation", "$", int)
        fibers = [_category(c, f"$.fibers[{i}]") for i, c in enumerate(_get(doc, "fibers", "$", list))]
        gens = {}
        for key in ("faces", "degeneracies"):
            table = {}
            for i, f in enumerate(_get(doc, key, "$", list)):
                where = f"$.{key}[{i}]"
                table[(_get(f, "level", where, int), _get(f, "index", where, int))] = _maps(f, where)
            gens[key] = table
        labels = None
        if "labels" in doc:
            labels = [[tuple(t) if isinstance(t, list) else t for t in level] for level in doc["labels"]]
        meta = None
        if "group" in doc:
            G = _group(doc["group"], "$.group")
            xs = _get(doc, "xset", "$", dict)
            X = _located("$.xset", validate_gset, G, _get(xs, "action", "$.xset", list), xs.get("name", ""))
            meta = {"group": G, "xset": X}
        return _located("$", validate_simplicial_datum, n, fibers, gens["faces"], gens["degeneracies"],
                        labels, meta)
    if kind == "group":
        return _group(doc, "$")
    if kind == "gset":
        G = _group(_get(doc, "group", "$"), "$.group")
        return _located("$", validate_gset, G, _get(doc, "action", "$", list), doc.get("name", ""))
    if kind == "report":
        return doc
    raise ParseError(f"unknown document kind {kind!r}", location="$.kind", field="kind")


def loads(text: str, source: str = "<string>") -> Any:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg}", location=f"{source}:{exc.lineno}:{exc.colno}",
                         line=exc.lineno, column=exc.colno) from exc
    return from_document(doc)


def load_document(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", location=str(path)) from exc
    return loads(text, str(path))
