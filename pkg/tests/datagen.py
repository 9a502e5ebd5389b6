"""Random simplicial data with poset fibers."""
import random

from galdelta.errors import BadAction, MalformedCategory
from galdelta.simplex import bar_datum, chain_datum, cyclic_group, free_gset, trivial_gset, validate_gset


def _invariant_relations(rng, X, density):
    """Relations closed under the action, retried until acyclic."""
    for _ in range(50):
        pairs = [(a, b) for a in range(X.size) for b in range(X.size) if a != b and rng.random() < density]
        rel = {(X.action[a][g], X.action[b][g]) for a, b in pairs for g in range(X.group.order)}
        try:
            return bar_datum(X.group, X, 2, relations=sorted(rel))
        except (MalformedCategory, BadAction):
            continue
    return bar_datum(X.group, X, 2)


def random_poset_datum(seed: int):
    """Either the chain datum of a random poset or the bar datum of a small
    cyclic group acting on a random invariant poset, truncated at 2."""
    rng = random.Random(seed)
    if rng.random() < 0.3:
        n = rng.randint(2, 3)
        rel = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.5]
        return chain_datum(n, rel, 2)
    G = cyclic_group(rng.choice([1, 2, 2, 3]))
    kind = rng.choice(["free", "trivial", "mixed"])
    if kind == "free":
        X = free_gset(G)
        if G.order > 1 and rng.random() < 0.5:
            # two free orbits
            N = G.order
            X = validate_gset(G, [[(x % N + g) % N + (x // N) * N for g in range(N)] for x in range(2 * N)])
    elif kind == "trivial":
        X = trivial_gset(G, rng.randint(2, 3))
    else:
        N = G.order
        X = validate_gset(G, [[0] * N] + [[1 + (x + g) % N for g in range(N)] for x in range(N)])
    return _invariant_relations(rng, X, 0.4)
