import json

import pytest
from hypothesis import given

from galdelta.errors import MissingComposite, NotLayered, ParseError
from galdelta.fincat import Functor, cyclic_group_category, poset_category
from galdelta.finset import constant_set_functor
from galdelta.io import SCHEMA, dumps, load_document, loads, save_document, to_document
from galdelta.profin import finite_field_tower
from galdelta.simplex import (
    bar_datum,
    chain_datum,
    cyclic_group,
    defining_gset,
    point_gset,
    symmetric_group,
    trivial_gset,
)
from strategies import posets


def corpus():
    S3 = symmetric_group(3)
    z2 = cyclic_group(2)
    P = poset_category(3, [(0, 1), (1, 2)])
    return {
        "category": P,
        "functor": Functor(P, cyclic_group_category(1), [0, 0, 0], [0] * P.n_morphisms).validate(),
        "set_functor": constant_set_functor(P, 2),
        "tower": finite_field_tower([1, 2, 4]),
        "bar": bar_datum(z2, point_gset(z2), 2),
        "bar-s3": bar_datum(S3, defining_gset(S3, 3), 1),
        "poset-bar": bar_datum(z2, trivial_gset(z2, 2), 1, relations=[(0, 1)]),
        "chain": chain_datum(2, [(0, 1)], 2),
        "group": S3,
        "gset": defining_gset(S3, 3),
    }


def _same(a, b):
    if hasattr(a, "stages"):
        return a.stages == b.stages and all(f == g for f, g in zip(a.transitions, b.transitions))
    return a == b


@pytest.mark.parametrize("name", sorted(corpus()))
def test_round_trip(name, tmp_path):
    value = corpus()[name]
    path = tmp_path / f"{name}.json"
    save_document(value, path)
    back = load_document(path)
    assert _same(value, back)
    # saving again gives the same bytes
    save_document(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


@given(posets())
def test_category_round_trip_property(C):
    assert loads(dumps(to_document(C))) == C


def test_bar_meta_survives():
    G = cyclic_group(3)
    D = loads(dumps(to_document(bar_datum(G, point_gset(G), 1))))
    assert D.meta["group"].table == G.table and D.labels[1][2] == (0, 2)


def test_no_floats():
    text = dumps(to_document(corpus()["bar"]))
    assert "." not in text.replace(SCHEMA, "")


def test_truncated_file(tmp_path):
    path = tmp_path / "cut.json"
    path.write_text(dumps(to_document(corpus()["category"]))[:40])
    with pytest.raises(ParseError) as info:
        load_document(path)
    assert "line" in info.value.details


def test_missing_field_named():
    doc = to_document(corpus()["category"])
    del doc["identities"]
    with pytest.raises(ParseError) as info:
        loads(json.dumps(doc))
    assert info.value.details["field"] == "identities"


def test_nested_location():
    doc = to_document(corpus()["bar"])
    del doc["fibers"][1]["morphisms"]
    with pytest.raises(ParseError) as info:
        loads(json.dumps(doc))
    assert info.value.details["location"] == "$.fibers[1].morphisms"


def test_wrong_schema_and_kind():
    with pytest.raises(ParseError):
        loads(json.dumps({"schema": "other/9", "kind": "category"}))
    with pytest.raises(ParseError):
        loads(json.dumps({"schema": SCHEMA, "kind": "sheaf"}))
    with pytest.raises(ParseError):
        load_document("/nonexistent/file.json")


def test_validation_errors_pass_through():
    doc = to_document(corpus()["category"])
    doc["composition"] = [[3, 3, 3]]     # 0<=1 after itself is not composable
    with pytest.raises(MissingComposite):
        loads(json.dumps(doc))
    doc = to_document(cyclic_group_category(2))
    doc["composition"] = [[1, 1, 1]]     # an idempotent endomorphism
    with pytest.raises(NotLayered):
        loads(json.dumps({"schema": SCHEMA, "kind": "tower", "stages": [doc], "transitions": []}))
