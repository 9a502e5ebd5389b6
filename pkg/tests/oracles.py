"""Independent reference computations used by the tests.

Nothing here imports the package's homology, groupoid or enumeration code.
"""
from __future__ import annotations

import itertools

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors


def snf_invariants(rows: list[list[int]], n_cols: int) -> tuple[int, list[int]]:
    """Rank and nonunit invariant factors through sympy."""
    if not rows or n_cols == 0:
        return 0, []
    factors = [abs(int(f)) for f in invariant_factors(Matrix(rows), domain=ZZ)]
    nonzero = [f for f in factors if f != 0]
    return len(nonzero), sorted(f for f in nonzero if f != 1)


def _homology_from_dense(dims: list[int], boundaries: dict) -> list[tuple[int, list[int]]]:
    """``boundaries[d]`` is the dense matrix of ``C_d → C_{d-1}`` as rows of
    ``C_{d-1}`` coordinates, one row per basis element of ``C_{d-1}``."""
    ranks, torsion = {}, {}
    for d, mat in boundaries.items():
        ranks[d], torsion[d] = snf_invariants(mat, dims[d])
    out = []
    for d in range(len(dims) - 1):
        free = dims[d] - ranks.get(d, 0) - ranks.get(d + 1, 0)
        out.append((free, torsion.get(d + 1, [])))
    return out


def group_homology(table, identity: int, max_degree: int) -> list[tuple[int, list[int]]]:
    """``H_d(G; Z)`` for ``d ≤ max_degree`` from the normalized bar complex."""
    N = len(table)
    nonid = [g for g in range(N) if g != identity]
    basis = [list(itertools.product(nonid, repeat=d)) for d in range(max_degree + 2)]
    index = [{t: i for i, t in enumerate(b)} for b in basis]
    boundaries = {}
    for d in range(1, max_degree + 2):
        mat = [[0] * len(basis[d]) for _ in basis[d - 1]]
        for j, t in enumerate(basis[d]):
            for i in range(d + 1):
                if i == 0:
                    face = t[1:]
                elif i == d:
                    face = t[:-1]
                else:
                    face = t[:i - 1] + (table[t[i - 1]][t[i]],) + t[i + 1:]
                if identity in face:
                    continue
                mat[index[d - 1][face]][j] += (-1) ** i
        boundaries[d] = mat
    dims = [len(b) for b in basis]
    return _homology_from_dense(dims, boundaries)


def _closure(table, identity, gens) -> frozenset:
    sub = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = table[x][g]
                if y not in sub:
                    sub.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(sub)


def stabilizer(table, identity, action, x) -> tuple[list, int]:
    """Stabilizer of ``x`` as a group table on its own elements."""
    elems = sorted(g for g in range(len(table)) if action[x][g] == x)
    pos = {g: i for i, g in enumerate(elems)}
    return [[pos[table[a][b]] for b in elems] for a in elems], pos[identity]


def orbit_representatives(action) -> list[int]:
    seen, reps = set(), []
    for x in range(len(action)):
        if x not in seen:
            reps.append(x)
            seen.update(action[x])
    return reps


def quotient_homology(table, identity, action, max_degree: int) -> list[tuple[int, list[int]]]:
    """Homology of ``X//G``: the sum over orbits of the stabilizer homology."""
    total = [(0, []) for _ in range(max_degree + 1)]
    for x in orbit_representatives(action):
        t, e = stabilizer(table, identity, action, x)
        for d, (r, tor) in enumerate(group_homology(t, e, max_degree)):
            total[d] = (total[d][0] + r, sorted(total[d][1] + tor))
    return total


def subgroups(table, identity) -> list[frozenset]:
    N = len(table)
    found = set()
    for gens in itertools.chain.from_iterable(itertools.combinations(range(N), r) for r in range(3)):
        found.add(_closure(table, identity, gens))
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def count_gsets(table, identity, k: int) -> int:
    """Isomorphism classes of sets of size at most ``k`` with an action:
    multisets of conjugacy classes of subgroups with index sum at most ``k``."""
    N = len(table)
    inv = [next(h for h in range(N) if table[g][h] == identity) for g in range(N)]
    classes = {}
    for H in subgroups(table, identity):
        conj = min(tuple(sorted(table[table[inv[g]][h]][g] for h in H)) for g in range(N))
        classes[conj] = N // len(H)
    sizes = sorted(classes.values())

    def count(total, start):
        if total == 0:
            return 1
        return sum(count(total - sizes[i], i) for i in range(start, len(sizes)) if sizes[i] <= total)

    return sum(count(s, 0) for s in range(k + 1))


def quotient_sheaf_count(table, identity, action, k: int) -> int:
    """Classes of functors ``X//G → FinSet`` with values of size ≤ ``k``."""
    out = 1
    for x in orbit_representatives(action):
        t, e = stabilizer(table, identity, action, x)
        out *= count_gsets(t, e, k)
    return out


def brute_functor_classes(n_objects, src, tgt, identity, comp, k: int, inverted=()) -> int:
    """Functors to sets of size ≤ ``k`` up to isomorphism, by listing every
    assignment.  ``comp`` maps ``(g, f)`` to ``g∘f``; only for tiny inputs."""
    M = len(src)
    found = []
    for sizes in itertools.product(range(k + 1), repeat=n_objects):
        choices = []
        for e in range(M):
            a, b = sizes[src[e]], sizes[tgt[e]]
            maps = list(itertools.product(range(b), repeat=a))
            if e in inverted or e in identity:
                maps = [m for m in maps if a == b and len(set(m)) == a]
            if e in identity:
                maps = [m for m in maps if m == tuple(range(a))]
            choices.append(maps)
        for images in itertools.product(*choices):
            if all(tuple(images[g][images[f][i]] for i in range(sizes[src[f]])) == images[h]
                   for (g, f), h in comp.items()):
                found.append((sizes, images))
    classes = []
    for sizes, images in found:
        if not any(_isomorphic(sizes, images, s2, i2, src, tgt) for s2, i2 in classes):
            classes.append((sizes, images))
    return len(classes)


def _isomorphic(s1, i1, s2, i2, src, tgt) -> bool:
    if s1 != s2:
        return False
    for eta in itertools.product(*(list(itertools.permutations(range(s))) for s in s1)):
        if all(tuple(eta[tgt[e]][v] for v in i1[e]) == tuple(i2[e][eta[src[e]][v]] for v in range(s1[src[e]]))
               for e in range(len(src))):
            return True
    return False


def symmetric_table(k: int) -> list[list[int]]:
    """``S_k`` on lex-ordered permutations, product "first p then q"."""
    perms = list(itertools.permutations(range(k)))
    pos = {p: i for i, p in enumerate(perms)}
    return [[pos[tuple(q[p[x]] for x in range(k))] for q in perms] for p in perms]



def brute_isomorphic(A, B) -> bool:
    """Try every bijection between two group tables."""
    if len(A) != len(B):
        return False
    n = len(A)
    for perm in itertools.permutations(range(n)):
        if all(perm[A[a][b]] == B[perm[a]][perm[b]] for a in range(n) for b in range(n)):
            return True
    return False
