import numpy as np
import pytest

from galdelta.errors import LevelOutOfRange, SizeGuardExceeded
from galdelta.simplex import (
    SimplexMap,
    all_maps,
    bar_datum,
    chain_datum,
    cyclic_group,
    defining_gset,
    identity_map,
    point_gset,
    sigma_star,
    symmetric_group,
    trivial_gset,
)
from galdelta.total import build_total, cartesian_lift, factor_through_lift, fiber_of, is_cartesian, to_dot


def _count_by_definition(D):
    """Σ over σ : [m] → [n] and ξ in C_n of the number of morphisms into σ*ξ."""
    total = 0
    for sigma in all_maps(D.truncation):
        C = D.fibers[sigma.source]
        star = sigma_star(D, sigma)
        for xi in range(D.fibers[sigma.target].n_objects):
            total += int((C.tgt == star.object_map[xi]).sum())
    return total


def _data():
    z2, z3 = cyclic_group(2), cyclic_group(3)
    return {
        "z2pt": bar_datum(z2, point_gset(z2), 2),
        "z3pt": bar_datum(z3, point_gset(z3), 2),
        "z2fixed": bar_datum(z2, trivial_gset(z2, 2), 2),
        "chain": chain_datum(3, [(0, 1), (0, 2)], 2),
        "poset-bar": bar_datum(z2, trivial_gset(z2, 2), 2, relations=[(0, 1)]),
    }


DATA = _data()


@pytest.fixture(scope="module", params=sorted(DATA))
def total(request):
    return build_total(DATA[request.param])


def test_validates(total):
    total.underlying.validate()
    total.projection().validate()


def test_morphism_count(total):
    assert total.underlying.n_morphisms == _count_by_definition(total.datum)


def test_known_sizes():
    T = build_total(bar_datum(cyclic_group(2), point_gset(cyclic_group(2)), 1))
    # over [0]->[0]: 1, [0]->[1]: 2 maps x 2 targets, [1]->[0]: 1, [1]->[1]: 3 maps x 2 targets
    assert (T.underlying.n_objects, T.underlying.n_morphisms) == (3, 1 + 4 + 1 + 6)
    S3 = symmetric_group(3)
    T = build_total(bar_datum(S3, defining_gset(S3, 3), 2))
    assert T.underlying.n_objects == 3 + 18 + 108


def test_fibers_are_the_levels(total):
    for m in range(total.truncation + 1):
        V = fiber_of(total, m)
        assert V.category.n_morphisms == total.datum.fibers[m].n_morphisms
        V.to_fiber.validate()
        V.from_fiber.validate()
        assert np.array_equal(V.to_fiber.morphism_map[V.from_fiber.morphism_map],
                              np.arange(total.datum.fibers[m].n_morphisms))


def test_cartesian_factorization(total):
    C = total.underlying
    for e in range(C.n_morphisms):
        fiber_edge, lift = factor_through_lift(total, e)
        assert is_cartesian(total, lift)
        assert C.compose(lift, fiber_edge) == e
        assert total.decomposition(fiber_edge)[0].is_identity


def test_cartesian_composition(total):
    C = total.underlying
    G, F = C.pairs()
    cart = total.cartesian_flags
    both = cart[G] & cart[F]
    assert cart[C.comp[both]].all()


def test_cartesian_means_iso_fiber_part(total):
    # bar data have discrete fibers, so every edge is cartesian
    if total.datum.meta.get("group") and "relations" not in total.datum.meta:
        assert total.cartesian_flags.all()
    else:
        assert not total.cartesian_flags.all()


def test_lift_lies_over_sigma(total):
    n = total.truncation
    for sigma in all_maps(n):
        for xi in range(total.datum.fibers[sigma.target].n_objects):
            e = cartesian_lift(total, sigma, xi)
            s, _ = total.decomposition(e)
            assert s == sigma
            assert total.underlying.tgt[e] == total.object_index(sigma.target, xi)


def test_composition_rule():
    D = DATA["z3pt"]
    T = build_total(D)
    # δ_0 lift into (0; 1, 2) followed by nothing: source is (0·1; 2) = (1; 2)
    e = cartesian_lift(T, SimplexMap(1, 2, (1, 2)), 5)
    assert T.object_label(int(T.underlying.src[e])) == "1:0,2"
    assert T.object_label(int(T.underlying.tgt[e])) == "2:0,1,2"
    # (τ, g)∘(σ, f) lies over τσ
    C = T.underlying
    G, F = C.pairs()
    maps = all_maps(2)
    for g, f, h in list(zip(G, F, C.comp))[::97]:
        assert maps[T.sigma_of[h]] == maps[T.sigma_of[g]].after(maps[T.sigma_of[f]])


def test_guards():
    D = DATA["z2pt"]
    with pytest.raises(SizeGuardExceeded):
        build_total(D, max_morphisms=10)
    T = build_total(D)
    with pytest.raises(LevelOutOfRange):
        fiber_of(T, 5)
    with pytest.raises(LevelOutOfRange):
        cartesian_lift(T, identity_map(3), 0)


def test_dot_styles():
    T = build_total(DATA["poset-bar"])
    text = to_dot(T)
    assert text.startswith("digraph")
    assert 'style="solid,bold"' in text and 'style="dashed"' in text
