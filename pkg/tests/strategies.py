"""Hypothesis strategies for small categories."""
from hypothesis import strategies as st

from galdelta.fincat import monoid_category, poset_category


@st.composite
def posets(draw, max_size=5):
    n = draw(st.integers(1, max_size))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    rel = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    perm = draw(st.permutations(range(n)))
    return poset_category(n, [(perm[a], perm[b]) for a, b in rel])


@st.composite
def cyclic_monoids(draw):
    # x^i with x^(t+p) = x^t: index t, period p
    t = draw(st.integers(0, 3))
    p = draw(st.integers(1, 4))
    size = t + p

    def power(i):
        return i if i < t else t + (i - t) % p

    table = [[power(a + b) for b in range(size)] for a in range(size)]
    return monoid_category(table), t
