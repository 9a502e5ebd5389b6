"""Finite categories with explicit composition tables.

Objects and morphisms are dense integer indices.  The composition table is
stored sparsely: only composable pairs ``(g, f)`` with ``tgt(f) == src(g)``
have an entry, laid out so that ``g∘f`` lives at
``comp[comp_ptr[f] + out_rank[g]]``.  This is still the *full* table (every
composable pair is materialised), but memory scales with the number of
composable pairs instead of the square of the morphism count.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    BadIdentity,
    MalformedCategory,
    MissingComposite,
    NonAssociative,
    NotFunctorial,
    SizeGuardExceeded,
    SourceTargetMismatch,
)

INDEX = np.int64

# Bound on the number of triples materialised at once by the associativity check.
_TRIPLE_CHUNK = 4_000_000


def _as_index_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=INDEX)
    if arr.ndim != 1:
        raise MalformedCategory(f"{name} must be a flat list of indices", field=name)
    return arr


class FiniteCategory:
    """An explicit finite category.

    Construct through :func:`validate_category` (checked) or the builder
    classmethods (which trust the caller and are checked in the tests).
    """

    def __init__(self, n_objects: int, src, tgt, identity, comp):
        self.n_objects = int(n_objects)
        self.src = _as_index_array(src, "src")
        self.tgt = _as_index_array(tgt, "tgt")
        self.identity = _as_index_array(identity, "identity")
        self._layout()
        self.comp = _as_index_array(comp, "comp")
        if len(self.comp) != self.n_pairs:
            raise MalformedCategory(
                "composition table has the wrong number of entries",
                expected=self.n_pairs, got=len(self.comp),
            )
        self._cache: dict = {}

    # -- layout ---------------------------------------------------------------

    def _layout(self) -> None:
        M = len(self.src)
        if len(self.tgt) != M:
            raise MalformedCategory("src and tgt differ in length")
        if len(self.identity) != self.n_objects:
            raise MalformedCategory("one identity per object is required")
        if M and (self.src.min() < 0 or self.src.max() >= self.n_objects
                  or self.tgt.min() < 0 or self.tgt.max() >= self.n_objects):
            raise MalformedCategory("morphism endpoint out of range")
        self.out_list = np.argsort(self.src, kind="stable").astype(INDEX)
        counts = np.bincount(self.src, minlength=self.n_objects).astype(INDEX)
        self.out_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(INDEX)
        self.out_rank = np.empty(M, dtype=INDEX)
        self.out_rank[self.out_list] = np.arange(M, dtype=INDEX) - self.out_ptr[self.src[self.out_list]]
        self.comp_len = counts[self.tgt] if M else np.zeros(0, dtype=INDEX)
        self.comp_ptr = np.concatenate([[0], np.cumsum(self.comp_len)]).astype(INDEX)
        self.n_pairs = int(self.comp_ptr[-1])

    @property
    def n_morphisms(self) -> int:
        return len(self.src)

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """All composable pairs ``(G, F)`` in table order."""
        F = np.repeat(np.arange(self.n_morphisms, dtype=INDEX), self.comp_len)
        offs = np.arange(self.n_pairs, dtype=INDEX) - self.comp_ptr[F]
        G = self.out_list[self.out_ptr[self.tgt[F]] + offs]
        return G, F

    def compose_many(self, G, F) -> np.ndarray:
        G = np.asarray(G, dtype=INDEX)
        F = np.asarray(F, dtype=INDEX)
        if np.any(self.src[G] != self.tgt[F]):
            bad = int(np.flatnonzero(self.src[G] != self.tgt[F])[0])
            raise MissingComposite("pair is not composable", g=int(G[bad]), f=int(F[bad]))
        return self.comp[self.comp_ptr[F] + self.out_rank[G]]

    def _lists(self):
        if "lists" not in self._cache:
            self._cache["lists"] = (
                self.src.tolist(), self.tgt.tolist(), self.comp.tolist(),
                self.comp_ptr.tolist(), self.out_rank.tolist(),
            )
        return self._cache["lists"]

    def compose(self, g: int, f: int) -> int:
        src, tgt, comp, cptr, rank = self._lists()
        if src[g] != tgt[f]:
            raise MissingComposite(f"cannot compose {g} after {f}", g=g, f=f)
        return comp[cptr[f] + rank[g]]

    # -- derived structure ----------------------------------------------------

    def is_identity_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_morphisms, dtype=bool)
        mask[self.identity] = True
        return mask

    def hom(self, a: int, b: int) -> np.ndarray:
        out = self.out_list[self.out_ptr[a]:self.out_ptr[a + 1]]
        return out[self.tgt[out] == b]

    def out_morphisms(self, a: int) -> np.ndarray:
        return self.out_list[self.out_ptr[a]:self.out_ptr[a + 1]]

    def inverses(self) -> np.ndarray:
        """``inv[f]`` is the two-sided inverse of ``f`` or ``-1``."""
        if "inverses" not in self._cache:
            G, F = self.pairs()
            H = self.comp
            left = (self.src[G] == self.tgt[F]) & (self.tgt[G] == self.src[F]) & (H == self.identity[self.src[F]])
            Gl, Fl = G[left], F[left]
            M = max(self.n_morphisms, 1)
            keys = set((Gl * M + Fl).tolist())
            inv = np.full(self.n_morphisms, -1, dtype=INDEX)
            for g, f in zip(Gl.tolist(), Fl.tolist()):
                if f * M + g in keys:
                    inv[f] = g
            self._cache["inverses"] = inv
        return self._cache["inverses"]

    def iso_mask(self) -> np.ndarray:
        return self.inverses() >= 0

    def components(self) -> np.ndarray:
        """Connected component label per object (labels ordered by least object)."""
        if "components" not in self._cache:
            parent = list(range(self.n_objects))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for s, t in zip(self.src.tolist(), self.tgt.tolist()):
                rs, rt = find(s), find(t)
                if rs != rt:
                    parent[max(rs, rt)] = min(rs, rt)
            roots = [find(x) for x in range(self.n_objects)]
            relabel = {r: i for i, r in enumerate(sorted(set(roots)))}
            self._cache["components"] = np.array([relabel[r] for r in roots], dtype=INDEX)
        return self._cache["components"]

    # -- builders -------------------------------------------------------------

    @classmethod
    def from_function(cls, n_objects: int, src, tgt, identity,
                      compose: Callable[[int, int], int]) -> "FiniteCategory":
        shell = _Shell(n_objects, src, tgt, identity)
        G, F = shell.pairs()
        comp = [compose(g, f) for g, f in zip(G.tolist(), F.tolist())]
        return cls(n_objects, src, tgt, identity, comp)

    @classmethod
    def from_vectorized(cls, n_objects: int, src, tgt, identity,
                        compose_many: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "FiniteCategory":
        shell = _Shell(n_objects, src, tgt, identity)
        G, F = shell.pairs()
        return cls(n_objects, src, tgt, identity, compose_many(G, F))

    def full_subcategory(self, objects: Sequence[int]) -> tuple["FiniteCategory", np.ndarray, np.ndarray]:
        """Full subcategory on ``objects``; also returns the old indices of
        its objects and morphisms."""
        objects = np.asarray(sorted(set(int(x) for x in objects)), dtype=INDEX)
        keep = np.zeros(self.n_objects, dtype=bool)
        keep[objects] = True
        mors = np.flatnonzero(keep[self.src] & keep[self.tgt]).astype(INDEX)
        return self._restrict(objects, mors)

    def subcategory(self, morphisms: Sequence[int]) -> tuple["FiniteCategory", np.ndarray, np.ndarray]:
        """Subcategory spanned by ``morphisms`` (assumed closed under
        composition) and the identities of their endpoints."""
        mors = np.asarray(sorted(set(int(m) for m in morphisms)), dtype=INDEX)
        objects = np.unique(np.concatenate([self.src[mors], self.tgt[mors]])) if len(mors) else np.zeros(0, INDEX)
        mors = np.unique(np.concatenate([mors, self.identity[objects]])).astype(INDEX)
        return self._restrict(objects.astype(INDEX), mors)

    def _restrict(self, objects: np.ndarray, mors: np.ndarray):
        new_obj = np.full(self.n_objects, -1, dtype=INDEX)
        new_obj[objects] = np.arange(len(objects), dtype=INDEX)
        new_mor = np.full(self.n_morphisms, -1, dtype=INDEX)
        new_mor[mors] = np.arange(len(mors), dtype=INDEX)
        src = new_obj[self.src[mors]]
        tgt = new_obj[self.tgt[mors]]
        ident = new_mor[self.identity[objects]]

        def compose_many(G, F):
            H = new_mor[self.compose_many(mors[G], mors[F])]
            if np.any(H < 0):
                bad = int(np.flatnonzero(H < 0)[0])
                raise MissingComposite("morphism set is not closed under composition",
                                       g=int(mors[G[bad]]), f=int(mors[F[bad]]))
            return H

        sub = FiniteCategory.from_vectorized(len(objects), src, tgt, ident, compose_many)
        return sub, objects, mors

    def opposite(self) -> "FiniteCategory":
        return FiniteCategory.from_vectorized(
            self.n_objects, self.tgt, self.src, self.identity,
            lambda G, F: self.compose_many(F, G))

    # -- checks ---------------------------------------------------------------

    def validate(self) -> "FiniteCategory":
        """Check identity laws and associativity exhaustively."""
        M = self.n_morphisms
        ident = self.identity
        if len(ident) and (ident.min() < 0 or ident.max() >= M):
            raise BadIdentity("identity index out of range")
        for x in range(self.n_objects):
            i = int(ident[x])
            if self.src[i] != x or self.tgt[i] != x:
                raise BadIdentity(f"identity of object {x} is not an endomorphism of {x}",
                                  object=x, morphism=i)
        if len(self.comp) and (self.comp.min() < 0 or self.comp.max() >= M):
            raise MalformedCategory("composite index out of range")
        G, F = self.pairs()
        H = self.comp
        bad = (self.src[H] != self.src[F]) | (self.tgt[H] != self.tgt[G])
        if bad.any():
            p = int(np.flatnonzero(bad)[0])
            raise MissingComposite(
                f"composite of {int(G[p])} after {int(F[p])} has wrong endpoints",
                g=int(G[p]), f=int(F[p]), composite=int(H[p]))
        is_id = self.is_identity_mask()
        # g∘id = g and id∘f = f
        bad = (is_id[F] & (H != G)) | (is_id[G] & (H != F))
        if bad.any():
            p = int(np.flatnonzero(bad)[0])
            raise BadIdentity("identity law fails", g=int(G[p]), f=int(F[p]), composite=int(H[p]))
        self.check_associativity()
        return self

    def check_associativity(self) -> None:
        G, F = self.pairs()
        H = self.comp
        outdeg = np.diff(self.out_ptr)
        counts = outdeg[self.tgt[G]]
        start = 0
        P = len(G)
        while start < P:
            # grow the chunk until it holds enough triples
            cum = np.cumsum(counts[start:])
            stop = start + int(np.searchsorted(cum, _TRIPLE_CHUNK, side="right"))
            stop = max(stop, start + 1)
            stop = min(stop, P)
            idx = np.repeat(np.arange(start, stop, dtype=INDEX), counts[start:stop])
            total = len(idx)
            if total:
                local_start = np.concatenate([[0], np.cumsum(counts[start:stop])[:-1]])
                offs = np.arange(total, dtype=INDEX) - np.repeat(local_start, counts[start:stop])
                g, f, h = G[idx], F[idx], H[idx]
                k = self.out_list[self.out_ptr[self.tgt[g]] + offs]
                left = self.compose_many(k, h)                   # k∘(g∘f)
                right = self.compose_many(self.compose_many(k, g), f)  # (k∘g)∘f
                bad = left != right
                if bad.any():
                    q = int(np.flatnonzero(bad)[0])
                    raise NonAssociative("composition is not associative",
                                         h=int(k[q]), g=int(g[q]), f=int(f[q]))
            start = stop

    # -- equality -------------------------------------------------------------

    def _key(self):
        return (self.n_objects, self.src.tobytes(), self.tgt.tobytes(),
                self.identity.tobytes(), self.comp.tobytes())

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FiniteCategory):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FiniteCategory(objects={self.n_objects}, morphisms={self.n_morphisms})"

    # -- interchange ----------------------------------------------------------

    def to_raw(self) -> dict:
        G, F = self.pairs()
        is_id = self.is_identity_mask()
        keep = ~(is_id[G] | is_id[F])
        return {
            "objects": self.n_objects,
            "morphisms": [[int(s), int(t)] for s, t in zip(self.src, self.tgt)],
            "identities": self.identity.tolist(),
            "composition": np.stack([G[keep], F[keep], self.comp[keep]], axis=1).tolist(),
        }


class _Shell(FiniteCategory):
    """Layout without a composition table, used to enumerate pairs."""

    def __init__(self, n_objects, src, tgt, identity):
        self.n_objects = int(n_objects)
        self.src = _as_index_array(src, "src")
        self.tgt = _as_index_array(tgt, "tgt")
        self.identity = _as_index_array(identity, "identity")
        self._layout()


# -----------------------------------------------------------------------------
# validation from raw descriptions
# -----------------------------------------------------------------------------

def validate_category(raw: dict) -> FiniteCategory:
    """Build and check a category from ``{objects, morphisms, identities,
    composition}``.

    ``composition`` lists triples ``[g, f, g∘f]``.  Pairs involving an
    identity may be omitted; they are forced by the identity laws.
    """
    try:
        n = int(raw["objects"])
        arrows = raw["morphisms"]
        identities = raw["identities"]
        triples = raw.get("composition", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedCategory(f"category description lacks a field: {exc}") from exc
    if n < 0:
        raise MalformedCategory("object count must be nonnegative", field="objects")
    src = [int(a[0]) for a in arrows]
    tgt = [int(a[1]) for a in arrows]
    M = len(src)
    for i, (s, t) in enumerate(zip(src, tgt)):
        if not (0 <= s < n and 0 <= t < n):
            raise MalformedCategory(f"morphism {i} has an endpoint out of range", morphism=i)
    identities = [int(i) for i in identities]
    if len(identities) != n:
        raise BadIdentity("one identity per object is required", expected=n, got=len(identities))
    for x, i in enumerate(identities):
        if not 0 <= i < M or src[i] != x or tgt[i] != x:
            raise BadIdentity(f"identity of object {x} is not an endomorphism of {x}", object=x, morphism=i)
    table: dict[tuple[int, int], int] = {}
    for row in triples:
        g, f, h = (int(v) for v in row)
        for v in (g, f, h):
            if not 0 <= v < M:
                raise MalformedCategory(f"morphism index {v} out of range", triple=[g, f, h])
        if tgt[f] != src[g]:
            raise MissingComposite(f"composite declared for non-composable pair ({g}, {f})", g=g, f=f)
        if table.get((g, f), h) != h:
            raise MalformedCategory(f"pair ({g}, {f}) declared twice", g=g, f=f)
        table[(g, f)] = h
    ident_set = set(identities)
    shell = _Shell(n, src, tgt, identities)
    G, F = shell.pairs()
    comp = []
    for g, f in zip(G.tolist(), F.tolist()):
        h = table.get((g, f))
        if h is None:
            if f in ident_set:
                h = g
            elif g in ident_set:
                h = f
            else:
                raise MissingComposite(f"no composite declared for ({g}, {f})", g=g, f=f)
        comp.append(h)
    return FiniteCategory(n, src, tgt, identities, comp).validate()


# -----------------------------------------------------------------------------
# standard categories
# -----------------------------------------------------------------------------

def terminal_category() -> FiniteCategory:
    return FiniteCategory(1, [0], [0], [0], [0])


def empty_category() -> FiniteCategory:
    return FiniteCategory(0, [], [], [], [])


def discrete_category(n: int) -> FiniteCategory:
    idx = np.arange(n, dtype=INDEX)
    return FiniteCategory(n, idx, idx, idx, idx)


def poset_category(n: int, relations: Iterable[tuple[int, int]]) -> FiniteCategory:
    """Poset on ``range(n)`` generated by ``relations`` (pairs ``a <= b``).

    Morphisms are the pairs ``a <= b`` of the reflexive-transitive closure,
    identities first.
    """
    le = [[a == b for b in range(n)] for a in range(n)]
    for a, b in relations:
        le[a][b] = True
    for k in range(n):
        for a in range(n):
            if le[a][k]:
                for b in range(n):
                    if le[k][b]:
                        le[a][b] = True
    for a in range(n):
        for b in range(n):
            if a != b and le[a][b] and le[b][a]:
                raise MalformedCategory("relations contain a cycle", objects=[a, b])
    arrows = [(a, a) for a in range(n)] + [(a, b) for a in range(n) for b in range(n) if a != b and le[a][b]]
    index = {ab: i for i, ab in enumerate(arrows)}
    src = [a for a, _ in arrows]
    tgt = [b for _, b in arrows]
    return FiniteCategory.from_function(
        n, src, tgt, list(range(n)),
        lambda g, f: index[(arrows[f][0], arrows[g][1])])


def monoid_category(table: Sequence[Sequence[int]], unit: int = 0) -> FiniteCategory:
    """One-object category on a monoid; ``table[g][f]`` is ``g∘f``."""
    m = len(table)
    return FiniteCategory.from_function(1, [0] * m, [0] * m, [unit], lambda g, f: table[g][f])


def cyclic_group_category(n: int) -> FiniteCategory:
    """``B(Z/n)``: morphism ``i`` is the residue ``i``."""
    return monoid_category([[(g + f) % n for f in range(n)] for g in range(n)], 0)


def disjoint_union(categories: Sequence[FiniteCategory]) -> tuple[FiniteCategory, list[int], list[int]]:
    """Coproduct; returns the category with per-summand object and morphism offsets."""
    obj_off, mor_off = [0], [0]
    for C in categories:
        obj_off.append(obj_off[-1] + C.n_objects)
        mor_off.append(mor_off[-1] + C.n_morphisms)
    src = np.concatenate([C.src + o for C, o in zip(categories, obj_off)] or [np.zeros(0, INDEX)])
    tgt = np.concatenate([C.tgt + o for C, o in zip(categories, obj_off)] or [np.zeros(0, INDEX)])
    ident = np.concatenate([C.identity + o for C, o in zip(categories, mor_off)] or [np.zeros(0, INDEX)])
    comp = np.concatenate([C.comp + o for C, o in zip(categories, mor_off)] or [np.zeros(0, INDEX)])
    return FiniteCategory(obj_off[-1], src, tgt, ident, comp), obj_off, mor_off


# -----------------------------------------------------------------------------
# isomorphisms and layeredness
# -----------------------------------------------------------------------------

def is_iso(C: FiniteCategory, f: int) -> bool:
    return bool(C.inverses()[f] >= 0)


@dataclass(frozen=True)
class LayeredWitness:
    category: FiniteCategory
    endo_inverses: dict

    def check(self) -> bool:
        C = self.category
        for e, i in self.endo_inverses.items():
            x = int(C.src[e])
            if C.compose(e, i) != C.identity[x] or C.compose(i, e) != C.identity[x]:
                return False
        return True


@dataclass(frozen=True)
class LayeredFailure:
    category: FiniteCategory
    endomorphism: int

    def __bool__(self):
        return False


def is_layered(C: FiniteCategory) -> LayeredWitness | LayeredFailure:
    inv = C.inverses()
    endos = np.flatnonzero(C.src == C.tgt)
    witness = {}
    for e in endos.tolist():
        if inv[e] < 0:
            return LayeredFailure(C, e)
        witness[e] = int(inv[e])
    return LayeredWitness(C, witness)


# -----------------------------------------------------------------------------
# functors and natural transformations
# -----------------------------------------------------------------------------

class Functor:
    def __init__(self, source: FiniteCategory, target: FiniteCategory, object_map, morphism_map):
        self.source = source
        self.target = target
        self.object_map = np.asarray(object_map, dtype=INDEX)
        self.morphism_map = np.asarray(morphism_map, dtype=INDEX)

    def __eq__(self, other):
        if not isinstance(other, Functor):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and np.array_equal(self.object_map, other.object_map)
                and np.array_equal(self.morphism_map, other.morphism_map))

    def __hash__(self):
        return hash((self.object_map.tobytes(), self.morphism_map.tobytes()))

    def __repr__(self):
        return f"Functor({self.source!r} -> {self.target!r})"

    def validate(self) -> "Functor":
        S, T = self.source, self.target
        om, mm = self.object_map, self.morphism_map
        if len(om) != S.n_objects or len(mm) != S.n_morphisms:
            raise NotFunctorial("map sizes do not match the source category")
        if len(om) and (om.min() < 0 or om.max() >= T.n_objects):
            raise NotFunctorial("object image out of range")
        if len(mm) and (mm.min() < 0 or mm.max() >= T.n_morphisms):
            raise NotFunctorial("morphism image out of range")
        bad = (T.src[mm] != om[S.src]) | (T.tgt[mm] != om[S.tgt])
        if bad.any():
            f = int(np.flatnonzero(bad)[0])
            raise NotFunctorial(f"morphism {f} is sent to a morphism with the wrong endpoints", morphism=f)
        bad = mm[S.identity] != T.identity[om]
        if bad.any():
            x = int(np.flatnonzero(bad)[0])
            raise NotFunctorial(f"identity of object {x} is not preserved", object=x)
        G, F = S.pairs()
        bad = mm[S.comp] != T.compose_many(mm[G], mm[F])
        if bad.any():
            p = int(np.flatnonzero(bad)[0])
            raise NotFunctorial(f"composite of {int(G[p])} after {int(F[p])} is not preserved",
                                g=int(G[p]), f=int(F[p]))
        return self


def identity_functor(C: FiniteCategory) -> Functor:
    return Functor(C, C, np.arange(C.n_objects), np.arange(C.n_morphisms))


def validate_functor(source: FiniteCategory, target: FiniteCategory, object_map, morphism_map) -> Functor:
    return Functor(source, target, object_map, morphism_map).validate()


def compose_functors(F: Functor, G: Functor) -> Functor:
    """``G∘F`` (first ``F``, then ``G``)."""
    if not (F.target is G.source or F.target == G.source):
        raise SourceTargetMismatch("target of the first functor is not the source of the second")
    return Functor(F.source, G.target, G.object_map[F.object_map], G.morphism_map[F.morphism_map])


@dataclass(frozen=True, eq=False)
class NaturalTransformation:
    source_functor: Functor
    target_functor: Functor
    components: np.ndarray

    def is_natural(self) -> bool:
        F, G = self.source_functor, self.target_functor
        C, D = F.source, F.target
        a = np.asarray(self.components, dtype=INDEX)
        if np.any(D.src[a] != F.object_map) or np.any(D.tgt[a] != G.object_map):
            return False
        left = D.compose_many(a[C.tgt], F.morphism_map)
        right = D.compose_many(G.morphism_map, a[C.src])
        return bool(np.all(left == right))

    def is_iso(self) -> bool:
        return bool(np.all(self.source_functor.target.inverses()[self.components] >= 0))

    def inverse(self) -> "NaturalTransformation":
        inv = self.source_functor.target.inverses()[self.components]
        if np.any(inv < 0):
            raise ValueError("transformation is not invertible")
        return NaturalTransformation(self.target_functor, self.source_functor, inv)


def natural_iso_check(F: Functor, G: Functor) -> NaturalTransformation | None:
    """Find a natural isomorphism ``F ⇒ G`` by exhaustive component search,
    or return ``None`` if there is none."""
    if not (F.source == G.source and F.target == G.target):
        raise SourceTargetMismatch("functors do not share source and target")
    C, D = F.source, F.target
    n = C.n_objects
    if n == 0:
        return NaturalTransformation(F, G, np.zeros(0, dtype=INDEX))
    inv = D.inverses().tolist()
    Fo, Go = F.object_map.tolist(), G.object_map.tolist()
    Fm, Gm = F.morphism_map.tolist(), G.morphism_map.tolist()
    csrc, ctgt = C.src.tolist(), C.tgt.tolist()
    comp = D.compose

    incident: list[list[int]] = [[] for _ in range(n)]
    for f in range(C.n_morphisms):
        incident[csrc[f]].append(f)
        if ctgt[f] != csrc[f]:
            incident[ctgt[f]].append(f)

    candidates = []
    for x in range(n):
        hs = [int(h) for h in D.hom(Fo[x], Go[x]) if inv[h] >= 0]
        if not hs:
            return None
        candidates.append(hs)

    def consistent(f, alpha):
        # α_tgt ∘ F(f) == G(f) ∘ α_src
        return comp(alpha[ctgt[f]], Fm[f]) == comp(Gm[f], alpha[csrc[f]])

    def assign(alpha, x, h):
        """Set α_x = h and propagate; return False on conflict."""
        alpha[x] = h
        queue = [x]
        while queue:
            y = queue.pop()
            for f in incident[y]:
                s, t = csrc[f], ctgt[f]
                if alpha[s] is not None and alpha[t] is not None:
                    if not consistent(f, alpha):
                        return False
                elif alpha[s] is not None and inv[Fm[f]] >= 0:
                    alpha[t] = comp(comp(Gm[f], alpha[s]), inv[Fm[f]])
                    if inv[alpha[t]] < 0:
                        return False
                    queue.append(t)
                elif alpha[t] is not None and inv[Gm[f]] >= 0:
                    alpha[s] = comp(comp(inv[Gm[f]], alpha[t]), Fm[f])
                    if inv[alpha[s]] < 0:
                        return False
                    queue.append(s)
        return True

    def search(alpha):
        try:
            x = alpha.index(None)
        except ValueError:
            return alpha
        for h in candidates[x]:
            trial = list(alpha)
            if assign(trial, x, h):
                found = search(trial)
                if found is not None:
                    return found
        return None

    found = search([None] * n)
    if found is None:
        return None
    eta = NaturalTransformation(F, G, np.asarray(found, dtype=INDEX))
    assert eta.is_natural()
    return eta


# -----------------------------------------------------------------------------
# canonical forms
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalForm:
    encoding: tuple
    object_order: tuple   # new index -> old object
    morphism_order: tuple  # new index -> old morphism


def _compress(keys: list) -> list[int]:
    ranks = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [ranks[k] for k in keys]


def _refine_colours(C: FiniteCategory):
    n, M = C.n_objects, C.n_morphisms
    src, tgt = C.src.tolist(), C.tgt.tolist()
    is_id = C.is_identity_mask().tolist()
    G, F = C.pairs()
    H = C.comp.tolist()
    after: list[list[tuple[int, int]]] = [[] for _ in range(M)]
    before: list[list[tuple[int, int]]] = [[] for _ in range(M)]
    for g, f, h in zip(G.tolist(), F.tolist(), H):
        after[f].append((g, h))
        before[g].append((f, h))
    mcol = [int(b) for b in is_id]
    ocol = [0] * n
    classes = -1
    for _ in range(M + n + 1):
        out: list[list[int]] = [[] for _ in range(n)]
        inc: list[list[int]] = [[] for _ in range(n)]
        for f in range(M):
            out[src[f]].append(mcol[f])
            inc[tgt[f]].append(mcol[f])
        new_o = _compress([(ocol[x], tuple(sorted(out[x])), tuple(sorted(inc[x]))) for x in range(n)])
        new_m = _compress([
            (mcol[f], new_o[src[f]], new_o[tgt[f]],
             tuple(sorted((mcol[g], mcol[h]) for g, h in after[f])),
             tuple(sorted((mcol[k], mcol[h]) for k, h in before[f])))
            for f in range(M)])
        count = len(set(new_o)) + len(set(new_m))
        ocol, mcol = new_o, new_m
        if count == classes:
            break
        classes = count
    return ocol, mcol


def canonical_form(C: FiniteCategory, max_candidates: int = 500_000) -> CanonicalForm:
    """Minimal-lexicographic encoding over all relabelings compatible with a
    colour refinement; isomorphic categories get identical encodings."""
    n, M = C.n_objects, C.n_morphisms
    ocol, mcol = _refine_colours(C)
    src, tgt = C.src.tolist(), C.tgt.tolist()
    ident = C.identity.tolist()
    G, F = C.pairs()
    triples = list(zip(G.tolist(), F.tolist(), C.comp.tolist()))

    obj_classes: dict[int, list[int]] = {}
    for x in range(n):
        obj_classes.setdefault(ocol[x], []).append(x)
    obj_groups = [obj_classes[c] for c in sorted(obj_classes)]

    def count_perms(groups):
        total = 1
        for grp in groups:
            for i in range(2, len(grp) + 1):
                total *= i
        return total

    budget = count_perms(obj_groups)
    if budget > max_candidates:
        raise SizeGuardExceeded("canonical form search space too large", candidates=budget)

    best = None
    for choice in itertools.product(*(itertools.permutations(grp) for grp in obj_groups)):
        order = [x for grp in choice for x in grp]
        new_obj = [0] * n
        for i, x in enumerate(order):
            new_obj[x] = i
        mor_classes: dict[tuple, list[int]] = {}
        for f in range(M):
            mor_classes.setdefault((new_obj[src[f]], new_obj[tgt[f]], mcol[f]), []).append(f)
        mor_groups = [mor_classes[k] for k in sorted(mor_classes)]
        budget += count_perms(mor_groups)
        if budget > max_candidates:
            raise SizeGuardExceeded("canonical form search space too large", candidates=budget)
        header = (n, M,
                  tuple((new_obj[src[f]], new_obj[tgt[f]]) for grp in mor_groups for f in grp))
        for mchoice in itertools.product(*(itertools.permutations(grp) for grp in mor_groups)):
            morder = [f for grp in mchoice for f in grp]
            new_mor = [0] * M
            for i, f in enumerate(morder):
                new_mor[f] = i
            enc = header + (
                tuple(new_mor[ident[x]] for x in order),
                tuple(sorted((new_mor[g], new_mor[f], new_mor[h]) for g, f, h in triples)),
            )
            if best is None or enc < best[0]:
                best = (enc, tuple(order), tuple(morder))
    if best is None:  # empty category
        best = ((0, 0, (), (), ()), (), ())
    return CanonicalForm(*best)


def relabel(C: FiniteCategory, object_perm: Sequence[int], morphism_perm: Sequence[int]) -> FiniteCategory:
    """Copy of ``C`` in which old object ``x`` becomes ``object_perm[x]`` and
    old morphism ``f`` becomes ``morphism_perm[f]``."""
    op = np.asarray(object_perm, dtype=INDEX)
    mp = np.asarray(morphism_perm, dtype=INDEX)
    back = np.empty_like(mp)
    back[mp] = np.arange(len(mp), dtype=INDEX)
    src = op[C.src[back]]
    tgt = op[C.tgt[back]]
    obj_back = np.empty_like(op)
    obj_back[op] = np.arange(len(op), dtype=INDEX)
    ident = mp[C.identity[obj_back]]
    return FiniteCategory.from_vectorized(
        C.n_objects, src, tgt, ident,
        lambda G, F: mp[C.compose_many(back[G], back[F])])
