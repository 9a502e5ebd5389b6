import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from galdelta.errors import EquivalenceFailure, NotCartesianInverting
from galdelta.exodromy import (
    EquivariantSheaf,
    action_groupoid,
    assemble,
    check_natural_iso,
    descend,
    enumerate_sheaves,
    natural_iso_maps,
    verify_exodromy,
)
from galdelta.finset import SetFunctor, constant_set_functor
from galdelta.simplex import (
    bar_datum,
    cyclic_group,
    defining_gset,
    free_gset,
    point_gset,
    symmetric_group,
    trivial_gset,
)
from galdelta.total import build_total
from oracles import quotient_sheaf_count


def _xset(G, name):
    return {"pt": point_gset, "free": free_gset, "fixed": lambda G: trivial_gset(G, 2),
            "defining": lambda G: defining_gset(G, 3)}[name](G)


def test_action_groupoid():
    G = symmetric_group(3)
    X = defining_gset(G, 3)
    A = action_groupoid(G, X).validate()
    assert A.n_morphisms == 18
    assert A.iso_mask().all()
    # g : x -> x·g
    assert int(A.tgt[1 * 6 + 3]) == X.action[1][3]


@pytest.mark.parametrize("group,xset,k,expected", [
    ("z2", "pt", 2, 4),
    ("z1", "fixed", 1, 4),
    ("z2", "free", 2, 3),
    ("z3", "pt", 3, 5),
    ("s3", "defining", 3, 6),
])
def test_counts_match_oracle(group, xset, k, expected):
    G = {"z1": cyclic_group(1), "z2": cyclic_group(2), "z3": cyclic_group(3), "s3": symmetric_group(3)}[group]
    X = _xset(G, xset)
    assert quotient_sheaf_count(G.table, G.identity, X.action, k) == expected
    r = verify_exodromy(G, X, k, 2)
    assert r.iso_classes_sheaf_side == r.iso_classes_descent_side == expected
    assert r.is_bijection


def test_routes_give_same_classes():
    G = cyclic_group(2)
    T = build_total(bar_datum(G, trivial_gset(G, 2), 2))
    a = enumerate_sheaves(T.underlying, 2, T.cartesian_flags, route="search")
    b = enumerate_sheaves(T.underlying, 2, T.cartesian_flags, route="groupoid")
    assert len(a) == len(b) == 16
    for F in a:
        assert sum(natural_iso_maps(F, H) is not None for H in b) == 1


def test_groupoid_route_needs_everything_inverted():
    G = cyclic_group(2)
    T = build_total(bar_datum(G, trivial_gset(G, 2), 1, relations=[(0, 1)]))
    with pytest.raises(ValueError):
        enumerate_sheaves(T.underlying, 1, T.cartesian_flags, route="groupoid")


def _swap_sheaf(G, X, s):
    """``X//G`` acting on ``{0..s-1}`` through the sign of a permutation."""
    sign = [0 if sum(p[i] > p[j] for i, j in itertools.combinations(range(3), 2)) % 2 == 0 else 1
            for p in itertools.permutations(range(3))]
    swap = tuple(reversed(range(s)))
    images = tuple(swap if sign[g] else tuple(range(s)) for x in range(X.size) for g in range(G.order))
    return EquivariantSheaf(action_groupoid(G, X), (s,) * X.size, images, G, X).validate()


def test_descend_assemble_round_trip():
    G = symmetric_group(3)
    X = defining_gset(G, 3)
    T = build_total(bar_datum(G, X, 2))
    S = _swap_sheaf(G, X, 2)
    F = assemble(G, X, S, T=T).validate()
    assert F.inverts_cartesian()
    back = descend(T, F)
    assert back.sizes == S.sizes and back.images == S.images
    eta = natural_iso_maps(F, assemble(G, X, back, T=T))
    assert eta is not None and check_natural_iso(F, assemble(G, X, back, T=T), eta)


@given(st.integers(0, 3), st.data())
def test_assembled_sheaves_are_functors(s, data):
    G = cyclic_group(3)
    X = point_gset(G)
    T = build_total(bar_datum(G, X, 2))
    perm = data.draw(st.permutations(range(s)))
    # a 3-cycle-compatible action: powers of perm, as long as perm^3 = id
    p = tuple(perm)
    p2 = tuple(p[p[i]] for i in range(s))
    if tuple(p2[p[i]] for i in range(s)) != tuple(range(s)):
        return
    S = EquivariantSheaf(action_groupoid(G, X), (s,), (tuple(range(s)), p, p2), G, X).validate()
    F = assemble(G, X, S, T=T).validate()
    assert descend(T, F).images == S.images


def test_not_cartesian_inverting():
    G = cyclic_group(2)
    T = build_total(bar_datum(G, point_gset(G), 1))
    F = constant_set_functor(T.underlying, 2)
    # collapse every non-identity edge into a constant map
    is_id = T.underlying.is_identity_mask()
    bad = SetFunctor(T.underlying, F.sizes, tuple(img if is_id[e] else (0, 0) for e, img in enumerate(F.images)))
    with pytest.raises(NotCartesianInverting):
        descend(T, bad)


def test_report_document():
    G = cyclic_group(2)
    r = verify_exodromy(G, point_gset(G), 2, 2)
    doc = r.to_document()
    assert doc["iso_classes_sheaf_side"] == 4 and doc["bijection"] is True
    assert [m[1] for m in doc["matched"]] == r.matched
    assert all(len(w["level0_components"]) == 1 for w in doc["witnesses"])


def test_mismatch_detected(monkeypatch):
    import galdelta.exodromy as ex

    real = ex.enumerate_sheaves

    def drop_last_on_groupoid(C, k, invert=None, budget=ex.DEFAULT_NODE_BUDGET, route="search"):
        out = real(C, k, invert, budget, route)
        return out[:-1] if isinstance(invert, str) else out

    monkeypatch.setattr(ex, "enumerate_sheaves", drop_last_on_groupoid)
    G = cyclic_group(2)
    with pytest.raises(EquivalenceFailure) as info:
        verify_exodromy(G, point_gset(G), 2, 2)
    assert info.value.details == {"sheaf_side": 4, "descent_side": 3}
