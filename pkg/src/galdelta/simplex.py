"""The truncated simplex category and diagrams of categories over it.

Conventions:

* the coface ``δ_i : [k-1] → [k]`` is the monotone injection omitting ``i``;
  the codegeneracy ``σ_j : [k+1] → [k]`` repeats ``j``;
* a :class:`SimplicialGaloisDatum` is contravariant: ``d_i`` (pullback along
  ``δ_i``) is a functor ``C_k → C_{k-1}`` and ``s_j`` is ``C_k → C_{k+1}``;
* groups act on the right, ``x·(gh) = (x·g)·h``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BadAction, BadGroup, LevelOutOfRange, NotLayered, SimplicialIdentityViolation
from .fincat import (
    INDEX,
    FiniteCategory,
    Functor,
    compose_functors,
    discrete_category,
    identity_functor,
    is_layered,
    poset_category,
)


# -----------------------------------------------------------------------------
# maps of Δ
# -----------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class SimplexMap:
    source: int
    target: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.source + 1:
            raise ValueError(f"a map out of [{self.source}] needs {self.source + 1} values")
        prev = 0
        for v in self.values:
            if v < prev or v > self.target:
                raise ValueError(f"values {self.values} are not a monotone map into [{self.target}]")
            prev = v

    def __call__(self, i: int) -> int:
        return self.values[i]

    def after(self, other: "SimplexMap") -> "SimplexMap":
        """``self∘other``."""
        if other.target != self.source:
            raise ValueError("maps are not composable")
        return SimplexMap(other.source, self.target, tuple(self.values[v] for v in other.values))

    @property
    def is_identity(self) -> bool:
        return self.source == self.target and self.values == tuple(range(self.source + 1))

    def __str__(self):
        return f"[{self.source}]->[{self.target}]{self.values}"


def identity_map(m: int) -> SimplexMap:
    return SimplexMap(m, m, tuple(range(m + 1)))


def coface(k: int, i: int) -> SimplexMap:
    """``δ_i : [k-1] → [k]``."""
    return SimplexMap(k - 1, k, tuple(v if v < i else v + 1 for v in range(k)))


def codegeneracy(k: int, j: int) -> SimplexMap:
    """``σ_j : [k+1] → [k]``."""
    return SimplexMap(k + 1, k, tuple(v if v <= j else v - 1 for v in range(k + 2)))


@lru_cache(maxsize=None)
def hom_delta(m: int, n: int) -> tuple:
    """All monotone maps ``[m] → [n]`` in lexicographic order."""
    return tuple(SimplexMap(m, n, vals)
                 for vals in itertools.combinations_with_replacement(range(n + 1), m + 1))


@lru_cache(maxsize=None)
def all_maps(truncation: int) -> tuple:
    return tuple(s for m in range(truncation + 1) for n in range(truncation + 1) for s in hom_delta(m, n))


class Generator(NamedTuple):
    kind: str    # "d" for a coface, "s" for a codegeneracy
    index: int
    source: int  # level of the domain

    def as_map(self) -> SimplexMap:
        if self.kind == "d":
            return coface(self.source + 1, self.index)
        return codegeneracy(self.source - 1, self.index)

    def __str__(self):
        return ("δ" if self.kind == "d" else "σ") + str(self.index)


def factorize_map(sigma: SimplexMap) -> tuple:
    """Epi-mono normal form ``δ_{i1}…δ_{is} σ_{j1}…σ_{jt}`` with
    ``i1 > … > is`` and ``j1 < … < jt``, as a word in composition order."""
    m, n, vals = sigma.source, sigma.target, sigma.values
    image = set(vals)
    missing = sorted((i for i in range(n + 1) if i not in image), reverse=True)
    repeats = [j for j in range(m) if vals[j] == vals[j + 1]]
    word = []
    level = len(image) - 1
    # cofaces δ_{is} is applied first among the cofaces
    cofaces = []
    for i in reversed(missing):
        cofaces.append(Generator("d", i, level))
        level += 1
    word.extend(reversed(cofaces))
    level = m
    codegs = []
    for j in reversed(repeats):
        codegs.append(Generator("s", j, level))
        level -= 1
    word.extend(reversed(codegs))
    return tuple(word)


def evaluate_word(word: Sequence[Generator], m: int) -> SimplexMap:
    result = identity_map(m)
    for gen in reversed(word):
        result = gen.as_map().after(result)
    return result


def simplex_category(truncation: int) -> FiniteCategory:
    """``Δ_{≤n}`` as a finite category; morphisms in :func:`all_maps` order."""
    maps = all_maps(truncation)
    index = {s: i for i, s in enumerate(maps)}
    return FiniteCategory.from_function(
        truncation + 1, [s.source for s in maps], [s.target for s in maps],
        [index[identity_map(m)] for m in range(truncation + 1)],
        lambda g, f: index[maps[g].after(maps[f])])


# -----------------------------------------------------------------------------
# simplicial data
# -----------------------------------------------------------------------------

@dataclass(eq=False)
class SimplicialGaloisDatum:
    """Truncated contravariant diagram ``m ↦ C_m`` of layered categories."""

    truncation: int
    fibers: list
    faces: dict          # (m, i) -> Functor C_m -> C_{m-1}
    degeneracies: dict   # (m, i) -> Functor C_m -> C_{m+1}
    labels: list | None = None
    meta: dict = field(default_factory=dict)
    _star: dict = field(default_factory=dict, repr=False)

    def __eq__(self, other):
        if not isinstance(other, SimplicialGaloisDatum):
            return NotImplemented
        return (self.truncation == other.truncation and self.fibers == other.fibers
                and self.faces == other.faces and self.degeneracies == other.degeneracies)

    __hash__ = None

    def generator_functor(self, gen: Generator) -> Functor:
        if gen.kind == "d":
            return self.faces[(gen.source + 1, gen.index)]
        return self.degeneracies[(gen.source - 1, gen.index)]

    def check_level(self, m: int) -> None:
        if not 0 <= m <= self.truncation:
            raise LevelOutOfRange(f"level {m} outside truncation {self.truncation}",
                                  level=m, truncation=self.truncation)


def sigma_star(D: SimplicialGaloisDatum, sigma: SimplexMap) -> Functor:
    """Pullback functor ``σ* : C_n → C_m`` for ``σ : [m] → [n]``."""
    D.check_level(sigma.source)
    D.check_level(sigma.target)
    cached = D._star.get(sigma)
    if cached is not None:
        return cached
    F = identity_functor(D.fibers[sigma.target])
    for gen in factorize_map(sigma):
        F = compose_functors(F, D.generator_functor(gen))
    D._star[sigma] = F
    return F


def _same(F: Functor, G: Functor) -> bool:
    return np.array_equal(F.object_map, G.object_map) and np.array_equal(F.morphism_map, G.morphism_map)


def _then(*functors: Functor) -> Functor:
    out = functors[0]
    for F in functors[1:]:
        out = compose_functors(out, F)
    return out


def check_simplicial_identities(D: SimplicialGaloisDatum) -> None:
    n = D.truncation
    d, s = D.faces, D.degeneracies

    def fail(name, level, i, j):
        raise SimplicialIdentityViolation(f"simplicial identity {name} fails at level {level} for i={i}, j={j}",
                                          identity=name, level=level, i=i, j=j)

    for m in range(2, n + 1):
        for j in range(m + 1):
            for i in range(j):
                if not _same(_then(d[(m, j)], d[(m - 1, i)]), _then(d[(m, i)], d[(m - 1, j - 1)])):
                    fail("d_i d_j = d_{j-1} d_i", m, i, j)
    for m in range(n):
        for j in range(m + 1):
            ident = identity_functor(D.fibers[m])
            if not _same(_then(s[(m, j)], d[(m + 1, j)]), ident):
                fail("d_j s_j = id", m, j, j)
            if not _same(_then(s[(m, j)], d[(m + 1, j + 1)]), ident):
                fail("d_{j+1} s_j = id", m, j + 1, j)
            for i in range(j):
                if not _same(_then(s[(m, j)], d[(m + 1, i)]), _then(d[(m, i)], s[(m - 1, j - 1)])):
                    fail("d_i s_j = s_{j-1} d_i", m, i, j)
            for i in range(j + 2, m + 2):
                if not _same(_then(s[(m, j)], d[(m + 1, i)]), _then(d[(m, i - 1)], s[(m - 1, j)])):
                    fail("d_i s_j = s_j d_{i-1}", m, i, j)
    for m in range(n - 1):
        for j in range(m + 1):
            for i in range(j + 1):
                if not _same(_then(s[(m, j)], s[(m + 1, i)]), _then(s[(m, i)], s[(m + 1, j + 1)])):
                    fail("s_i s_j = s_{j+1} s_i", m, i, j)


def check_pullback_functoriality(D: SimplicialGaloisDatum) -> None:
    """``(τ∘σ)* = σ*∘τ*`` for every composable pair within the truncation."""
    n = D.truncation
    for sigma in all_maps(n):
        for q in range(n + 1):
            for tau in hom_delta(sigma.target, q):
                lhs = sigma_star(D, tau.after(sigma))
                rhs = _then(sigma_star(D, tau), sigma_star(D, sigma))
                if not _same(lhs, rhs):
                    raise SimplicialIdentityViolation(
                        f"pullback along {tau}∘{sigma} differs from the composite of pullbacks",
                        identity="functoriality", sigma=list(sigma.values), tau=list(tau.values))


def validate_simplicial_datum(truncation: int, fibers: Sequence[FiniteCategory], faces, degeneracies,
                              labels=None, meta=None, check_fibers: bool = True) -> SimplicialGaloisDatum:
    """Check fibers, generating functors, simplicial identities and the
    functoriality of pullbacks, exhaustively.

    ``faces`` maps ``(m, i)`` (``1 <= m <= n``, ``0 <= i <= m``) to a functor
    ``C_m → C_{m-1}``; ``degeneracies`` maps ``(m, i)`` (``m < n``) to
    ``C_m → C_{m+1}``.  Plain ``(object_map, morphism_map)`` pairs are accepted
    in place of functors.
    """
    n = int(truncation)
    if n < 0:
        raise LevelOutOfRange("truncation must be nonnegative", truncation=n)
    fibers = list(fibers)
    if len(fibers) != n + 1:
        raise LevelOutOfRange(f"expected {n + 1} fibers, got {len(fibers)}", truncation=n)
    for m, C in enumerate(fibers):
        if check_fibers:
            C.validate()
        lay = is_layered(C)
        if not lay:
            raise NotLayered(f"fiber at level {m} has a non-invertible endomorphism",
                             level=m, endomorphism=lay.endomorphism)

    def functor(value, src, tgt, key):
        if isinstance(value, Functor):
            F = value
        else:
            F = Functor(fibers[src], fibers[tgt], value[0], value[1])
        if not (F.source == fibers[src] and F.target == fibers[tgt]):
            raise SimplicialIdentityViolation(f"generating functor {key} has the wrong endpoints",
                                              identity="endpoints", functor=key)
        return F.validate()

    d = {}
    for m in range(1, n + 1):
        for i in range(m + 1):
            if (m, i) not in faces:
                raise SimplicialIdentityViolation(f"missing face functor d_{i} at level {m}",
                                                  identity="missing", level=m, i=i)
            d[(m, i)] = functor(faces[(m, i)], m, m - 1, ["d", m, i])
    s = {}
    for m in range(n):
        for i in range(m + 1):
            if (m, i) not in degeneracies:
                raise SimplicialIdentityViolation(f"missing degeneracy functor s_{i} at level {m}",
                                                  identity="missing", level=m, i=i)
            s[(m, i)] = functor(degeneracies[(m, i)], m, m + 1, ["s", m, i])
    D = SimplicialGaloisDatum(n, fibers, d, s, labels, dict(meta or {}))
    check_simplicial_identities(D)
    check_pullback_functoriality(D)
    return D


def constant_datum(C: FiniteCategory, truncation: int) -> SimplicialGaloisDatum:
    ident = identity_functor(C)
    faces = {(m, i): ident for m in range(1, truncation + 1) for i in range(m + 1)}
    degs = {(m, i): ident for m in range(truncation) for i in range(m + 1)}
    return validate_simplicial_datum(truncation, [C] * (truncation + 1), faces, degs)



def chain_datum(n_points: int, relations, truncation: int) -> SimplicialGaloisDatum:
    """Level ``m`` is the poset of monotone maps ``[m] → P`` ordered
    pointwise; faces delete an entry and degeneracies repeat one."""
    P = poset_category(n_points, relations)
    le = {(int(a), int(b)) for a, b in zip(P.src, P.tgt)}
    levels, fibers = [], []
    for m in range(truncation + 1):
        chains = [c for c in itertools.product(range(n_points), repeat=m + 1)
                  if all((c[i], c[i + 1]) in le for i in range(m))]
        index = {c: i for i, c in enumerate(chains)}
        rel = [(index[a], index[b]) for a in chains for b in chains
               if a != b and all((x, y) in le for x, y in zip(a, b))]
        levels.append(chains)
        fibers.append(poset_category(len(chains), rel))

    def induced(src_level, tgt_level, op):
        C, D = fibers[src_level], fibers[tgt_level]
        index = {c: i for i, c in enumerate(levels[tgt_level])}
        om = [index[op(c)] for c in levels[src_level]]
        mm = [int(D.hom(om[int(a)], om[int(b)])[0]) for a, b in zip(C.src, C.tgt)]
        return om, mm

    faces = {(m, i): induced(m, m - 1, lambda c, i=i: c[:i] + c[i + 1:])
             for m in range(1, truncation + 1) for i in range(m + 1)}
    degs = {(m, i): induced(m, m + 1, lambda c, i=i: c[:i + 1] + c[i:])
            for m in range(truncation) for i in range(m + 1)}
    return validate_simplicial_datum(truncation, fibers, faces, degs, labels=levels)

# -----------------------------------------------------------------------------
# groups and G-sets
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteGroup:
    table: tuple      # table[g][h] = g·h
    identity: int = 0
    name: str = ""

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    @property
    def inverses(self) -> tuple:
        e = self.identity
        return tuple(next(h for h in range(self.order) if self.table[g][h] == e) for g in range(self.order))


def validate_group(table: Sequence[Sequence[int]], identity: int = 0, name: str = "") -> FiniteGroup:
    N = len(table)
    rows = tuple(tuple(int(v) for v in row) for row in table)
    if N == 0 or any(len(r) != N for r in rows):
        raise BadGroup("multiplication table must be square and nonempty")
    if any(not 0 <= v < N for r in rows for v in r):
        raise BadGroup("product out of range")
    e = int(identity)
    for g in range(N):
        if rows[e][g] != g or rows[g][e] != g:
            raise BadGroup(f"{e} is not a two-sided identity", element=g)
        if e not in rows[g]:
            raise BadGroup(f"element {g} has no inverse", element=g)
    for a, b, c in itertools.product(range(N), repeat=3):
        if rows[rows[a][b]][c] != rows[a][rows[b][c]]:
            raise BadGroup("multiplication is not associative", elements=[a, b, c])
    return FiniteGroup(rows, e, name)


def cyclic_group(n: int) -> FiniteGroup:
    return validate_group([[(a + b) % n for b in range(n)] for a in range(n)], 0, f"z{n}")


def symmetric_group(k: int) -> FiniteGroup:
    """Permutations of ``range(k)`` in lexicographic order; ``g·h`` applies
    ``g`` first, so that ``x·g = g(x)`` is a right action."""
    perms = list(itertools.permutations(range(k)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(h[g[x]] for x in range(k))] for h in perms] for g in perms]
    return validate_group(table, 0, f"s{k}")


def group_category(G: FiniteGroup) -> FiniteCategory:
    """``BG``; ``g∘f`` is the product ``f·g`` so the right-action convention
    matches composition of arrows ``f`` then ``g``."""
    N = G.order
    return FiniteCategory.from_function(1, [0] * N, [0] * N, [G.identity], lambda g, f: G.table[f][g])


@dataclass(frozen=True)
class GSet:
    group: FiniteGroup
    action: tuple     # action[x][g] = x·g
    name: str = ""

    @property
    def size(self) -> int:
        return len(self.action)

    def act(self, x: int, g: int) -> int:
        return self.action[x][g]

    def orbits(self) -> list[list[int]]:
        seen, out = set(), []
        for x in range(self.size):
            if x in seen:
                continue
            orb = sorted(set(self.action[x]))
            seen.update(orb)
            out.append(orb)
        return out

    def stabilizer(self, x: int) -> list[int]:
        return [g for g in range(self.group.order) if self.action[x][g] == x]


def validate_gset(G: FiniteGroup, action: Sequence[Sequence[int]], name: str = "") -> GSet:
    rows = tuple(tuple(int(v) for v in row) for row in action)
    X = len(rows)
    for x, row in enumerate(rows):
        if len(row) != G.order or any(not 0 <= v < X for v in row):
            raise BadAction(f"action row of {x} is malformed", point=x)
        if row[G.identity] != x:
            raise BadAction(f"identity does not fix {x}", point=x)
        for g in range(G.order):
            for h in range(G.order):
                if rows[row[g]][h] != row[G.table[g][h]]:
                    raise BadAction("action is not a right action", point=x, g=g, h=h)
    return GSet(G, rows, name)


def point_gset(G: FiniteGroup) -> GSet:
    return validate_gset(G, [[0] * G.order], "pt")


def trivial_gset(G: FiniteGroup, size: int) -> GSet:
    return validate_gset(G, [[x] * G.order for x in range(size)], f"triv{size}")


def free_gset(G: FiniteGroup) -> GSet:
    """``G`` acting on itself by right multiplication."""
    return validate_gset(G, [list(G.table[x]) for x in range(G.order)], "free")


def defining_gset(G: FiniteGroup, k: int) -> GSet:
    """``S_k`` acting on ``range(k)`` (``G`` must come from :func:`symmetric_group`)."""
    perms = list(itertools.permutations(range(k)))
    if len(perms) != G.order:
        raise BadAction("group is not a symmetric group of the right degree")
    return validate_gset(G, [[p[x] for p in perms] for x in range(k)], "defining")


# -----------------------------------------------------------------------------
# bar construction
# -----------------------------------------------------------------------------

def bar_tuples(G: FiniteGroup, X: GSet, m: int) -> list[tuple]:
    """Objects of level ``m``: tuples ``(x, g_1, .., g_m)`` in lexicographic
    order, which is also their index order."""
    return list(itertools.product(range(X.size), *([range(G.order)] * m)))


def bar_datum(G: FiniteGroup, X: GSet, truncation: int, validate: bool = True,
              relations=()) -> SimplicialGaloisDatum:
    """Simplicial datum with ``C_m = X × G^m``, discrete unless ``relations``
    order the points of ``X`` (the action must then be monotone).

    ``d_0`` acts with ``g_1``, inner faces multiply neighbours, the top face
    drops ``g_m``; ``s_i`` inserts the identity after position ``i``.
    """
    n = truncation
    levels = [bar_tuples(G, X, m) for m in range(n + 1)]
    index = [{t: i for i, t in enumerate(lv)} for lv in levels]
    mul, e = G.table, G.identity
    relations = [(int(a), int(b)) for a, b in relations]
    if relations:
        P = poset_category(X.size, relations)
        le = {(int(a), int(b)) for a, b in zip(P.src, P.tgt)}
        for a, b in le:
            for g in range(G.order):
                if (X.action[a][g], X.action[b][g]) not in le:
                    raise BadAction(f"acting by {g} does not preserve {a} <= {b}", element=g, pair=[a, b])
        fibers = [poset_category(len(lv), [(index[m][(a,) + t[1:]], index[m][(b,) + t[1:]])
                                           for t in lv if t[0] == 0 for a, b in le if a != b])
                  for m, lv in enumerate(levels)]
    else:
        fibers = [discrete_category(len(lv)) for lv in levels]

    def face(t, i):
        m = len(t) - 1
        if i == 0:
            return (X.action[t[0]][t[1]],) + t[2:]
        if i == m:
            return t[:-1]
        return t[:i] + (mul[t[i]][t[i + 1]],) + t[i + 2:]

    def degeneracy(t, i):
        return t[:i + 1] + (e,) + t[i + 1:]

    def discrete_functor(m_src, m_tgt, fn):
        om = np.array([index[m_tgt][fn(t)] for t in levels[m_src]], dtype=INDEX)
        if not relations:
            return Functor(fibers[m_src], fibers[m_tgt], om, om)
        C, D = fibers[m_src], fibers[m_tgt]
        mm = [int(D.hom(om[a], om[b])[0]) for a, b in zip(C.src, C.tgt)]
        return Functor(C, D, om, mm)

    faces = {(m, i): discrete_functor(m, m - 1, lambda t, i=i: face(t, i))
             for m in range(1, n + 1) for i in range(m + 1)}
    degs = {(m, i): discrete_functor(m, m + 1, lambda t, i=i: degeneracy(t, i))
            for m in range(n) for i in range(m + 1)}
    meta = {"group": G, "xset": X}
    if relations:
        meta["relations"] = tuple(sorted(relations))
    if validate:
        return validate_simplicial_datum(n, fibers, faces, degs, labels=levels, meta=meta)
    return SimplicialGaloisDatum(n, fibers, faces, degs, levels, meta)
