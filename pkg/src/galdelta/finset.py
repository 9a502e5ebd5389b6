"""Finite-set-valued functors.

``FinSet(k)`` is the finite category whose objects are the sets
``{0, .., s-1}`` for ``s <= k`` and whose morphisms are all functions between
them.  A functor into it is stored more conveniently as a
:class:`SetFunctor`: a size per object and a tuple ``image[f]`` per morphism,
with ``image[f][i]`` the value of ``F(f)`` at ``i``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import NotFunctorial, SearchBudgetExceeded
from .fincat import INDEX, FiniteCategory, Functor, NaturalTransformation, natural_iso_check

DEFAULT_NODE_BUDGET = 2_000_000


class FinSet:
    def __init__(self, k: int):
        self.k = k
        funcs = []
        for a in range(k + 1):
            for b in range(k + 1):
                for f in itertools.product(range(b), repeat=a):
                    funcs.append((a, b, f))
        self.functions = funcs
        self.index = {fn: i for i, fn in enumerate(funcs)}
        identity = [self.index[(a, a, tuple(range(a)))] for a in range(k + 1)]

        def compose(g, f):
            a, _, fv = funcs[f]
            _, c, gv = funcs[g]
            return self.index[(a, c, tuple(gv[i] for i in fv))]

        self.category = FiniteCategory.from_function(
            k + 1, [fn[0] for fn in funcs], [fn[1] for fn in funcs], identity, compose)

    def morphism(self, a: int, b: int, values: Sequence[int]) -> int:
        return self.index[(a, b, tuple(values))]


@lru_cache(maxsize=None)
def finset(k: int) -> FinSet:
    return FinSet(k)


def compose_maps(g: tuple, f: tuple) -> tuple:
    """``g∘f`` for functions stored as value tuples."""
    return tuple(g[i] for i in f)


def invert_map(p: tuple) -> tuple:
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v] = i
    return tuple(inv)


def is_bijection(f: tuple, size: int) -> bool:
    return len(f) == size and len(set(f)) == size


@dataclass(frozen=True, eq=False)
class SetFunctor:
    source: FiniteCategory
    sizes: tuple
    images: tuple

    @property
    def bound(self) -> int:
        return max(self.sizes, default=0)

    def encoding(self) -> tuple:
        return (self.sizes, self.images)

    def __eq__(self, other):
        if not isinstance(other, SetFunctor):
            return NotImplemented
        return self.encoding() == other.encoding() and self.source == other.source

    def __hash__(self):
        return hash(self.encoding())

    def to_functor(self, k: int | None = None) -> Functor:
        k = self.bound if k is None else k
        fs = finset(k)
        src, tgt = self.source.src.tolist(), self.source.tgt.tolist()
        mm = [fs.index[(self.sizes[src[f]], self.sizes[tgt[f]], img)] for f, img in enumerate(self.images)]
        return Functor(self.source, fs.category, list(self.sizes), mm)

    @classmethod
    def from_functor(cls, F: Functor) -> "SetFunctor":
        fs = finset(F.target.n_objects - 1)
        sizes = tuple(int(x) for x in F.object_map)
        images = tuple(fs.functions[m][2] for m in F.morphism_map.tolist())
        return cls(F.source, sizes, images)

    def validate(self) -> "SetFunctor":
        src, tgt = self.source.src.tolist(), self.source.tgt.tolist()
        for f, img in enumerate(self.images):
            a, b = self.sizes[src[f]], self.sizes[tgt[f]]
            if len(img) != a or any(not 0 <= v < b for v in img):
                raise NotFunctorial(f"image of morphism {f} is not a function of the right shape", morphism=f)
        if len(self.sizes) != self.source.n_objects or len(self.images) != self.source.n_morphisms:
            raise NotFunctorial("sizes or images do not match the source category")
        C = self.source
        sizes = np.asarray(self.sizes, dtype=INDEX)
        width = max(self.bound, 1)
        table = np.full((C.n_morphisms, width), -1, dtype=INDEX)
        for f, img in enumerate(self.images):
            table[f, :len(img)] = img
        live = np.arange(width) < sizes[C.src][:, None]
        ident = np.where(live[C.identity], np.arange(width), -1)
        bad = np.flatnonzero((table[C.identity] != ident).any(axis=1))
        if len(bad):
            x = int(bad[0])
            raise NotFunctorial(f"identity of object {x} is not sent to an identity", object=x)
        G, F = C.pairs()
        # F(g∘f)(i) = F(g)(F(f)(i)) on the live part of each row
        first = table[F]
        after = np.take_along_axis(table[G], np.maximum(first, 0), axis=1)
        bad = np.flatnonzero(((after != table[C.comp]) & live[F]).any(axis=1))
        if len(bad):
            p = int(bad[0])
            raise NotFunctorial(f"composite of {int(G[p])} after {int(F[p])} is not preserved",
                                g=int(G[p]), f=int(F[p]))
        return self

    def non_bijective(self, edges: Iterable[int]) -> int | None:
        """First edge in ``edges`` not sent to a bijection, or ``None``."""
        tgt = self.source.tgt.tolist()
        for e in edges:
            if not is_bijection(self.images[e], self.sizes[tgt[e]]):
                return int(e)
        return None

    def restrict(self, objects: np.ndarray, morphisms: np.ndarray, category: FiniteCategory) -> "SetFunctor":
        return SetFunctor(category, tuple(self.sizes[x] for x in objects.tolist()),
                          tuple(self.images[f] for f in morphisms.tolist()))

    def precompose(self, P: Functor) -> "SetFunctor":
        """``self∘P`` for a functor ``P`` into ``self.source``."""
        return SetFunctor(P.source, tuple(self.sizes[x] for x in P.object_map.tolist()),
                          tuple(self.images[f] for f in P.morphism_map.tolist()))


def constant_set_functor(C: FiniteCategory, size: int) -> SetFunctor:
    ident = tuple(range(size))
    return SetFunctor(C, (size,) * C.n_objects, (ident,) * C.n_morphisms)


def set_natural_iso(F: SetFunctor, G: SetFunctor) -> NaturalTransformation | None:
    """Natural isomorphism ``F ⇒ G`` between set-valued functors, or ``None``."""
    if F.sizes != G.sizes:
        return None
    k = max(F.bound, G.bound)
    return natural_iso_check(F.to_functor(k), G.to_functor(k))


def components_as_maps(eta: NaturalTransformation) -> list[tuple]:
    fs = finset(eta.source_functor.target.n_objects - 1)
    return [fs.functions[c][2] for c in eta.components.tolist()]


# -----------------------------------------------------------------------------
# enumeration
# -----------------------------------------------------------------------------

def _spanning_forest(C: FiniteCategory, inverted: np.ndarray):
    """BFS forest of the inverted non-identity edges.

    Returns ``(component per object, root per component, tree-edge mask,
    BFS edge order)``.
    """
    n = C.n_objects
    src, tgt = C.src.tolist(), C.tgt.tolist()
    adj: list[list[int]] = [[] for _ in range(n)]
    for e in np.flatnonzero(inverted).tolist():
        if src[e] != tgt[e]:
            adj[src[e]].append(e)
            adj[tgt[e]].append(e)
    comp = [-1] * n
    roots = []
    tree = np.zeros(C.n_morphisms, dtype=bool)
    for r in range(n):
        if comp[r] >= 0:
            continue
        c = len(roots)
        roots.append(r)
        comp[r] = c
        queue = [r]
        for x in queue:
            for e in adj[x]:
                y = tgt[e] if src[e] == x else src[e]
                if comp[y] < 0:
                    comp[y] = c
                    tree[e] = True
                    queue.append(y)
    return comp, roots, tree


class _Search:
    def __init__(self, C: FiniteCategory, inverted: np.ndarray, budget: int):
        self.C = C
        self.inverted = inverted.tolist()
        self.budget = budget
        self.nodes = 0
        self.src, self.tgt = C.src.tolist(), C.tgt.tolist()
        is_id = C.is_identity_mask()
        self.is_id = is_id.tolist()
        G, F = C.pairs()
        keep = ~(is_id[G] | is_id[F])
        self.rel = list(zip(G[keep].tolist(), F[keep].tolist(), C.comp[keep].tolist()))
        self.by_mor: list[list[int]] = [[] for _ in range(C.n_morphisms)]
        for r, (g, f, h) in enumerate(self.rel):
            self.by_mor[g].append(r)
            self.by_mor[f].append(r)
            if h != g and h != f:
                self.by_mor[h].append(r)
        self.comp, self.roots, tree = _spanning_forest(C, inverted)
        self.tree = tree.tolist()
        # free edges in BFS order of their source component, then by index
        self.free = [e for e in range(C.n_morphisms) if not self.is_id[e] and not self.tree[e]]

    def run(self, k: int) -> list[dict]:
        n_comp = len(self.roots)
        solutions = []
        for comp_sizes in itertools.product(range(k + 1), repeat=n_comp):
            sizes = [comp_sizes[self.comp[x]] for x in range(self.C.n_objects)]
            if any(sizes[self.src[e]] > 0 and sizes[self.tgt[e]] == 0 for e in self.free):
                continue
            for assignment in self._solve(sizes):
                solutions.append((tuple(sizes), tuple(comp_sizes), assignment))
        return solutions

    def _solve(self, sizes):
        M = self.C.n_morphisms
        A: list = [None] * M
        trail: list[int] = []
        queue = []
        for e in range(M):
            if self.is_id[e] or self.tree[e]:
                A[e] = tuple(range(sizes[self.src[e]]))
                queue.append(e)
        if not self._propagate(A, sizes, queue, trail):
            return
        yield from self._branch(A, sizes, trail, 0)

    def _set(self, A, sizes, e, value, trail, queue) -> bool:
        if self.inverted[e] and not is_bijection(value, sizes[self.tgt[e]]):
            return False
        A[e] = value
        trail.append(e)
        queue.append(e)
        return True

    def _propagate(self, A, sizes, queue, trail) -> bool:
        rel, by_mor = self.rel, self.by_mor
        tgt = self.tgt
        while queue:
            e = queue.pop()
            for r in by_mor[e]:
                g, f, h = rel[r]
                a, b, c = A[g], A[f], A[h]
                if a is not None and b is not None:
                    gf = tuple(a[i] for i in b)
                    if c is None:
                        if not self._set(A, sizes, h, gf, trail, queue):
                            return False
                    elif c != gf:
                        return False
                elif b is not None and c is not None:
                    if is_bijection(b, sizes[tgt[f]]):
                        if not self._set(A, sizes, g, compose_maps(c, invert_map(b)), trail, queue):
                            return False
                elif a is not None and c is not None:
                    if is_bijection(a, sizes[tgt[g]]):
                        if not self._set(A, sizes, f, compose_maps(invert_map(a), c), trail, queue):
                            return False
        return True

    def _candidates(self, e, sizes):
        a, b = sizes[self.src[e]], sizes[self.tgt[e]]
        if self.inverted[e]:
            return itertools.permutations(range(a)) if a == b else ()
        return itertools.product(range(b), repeat=a)

    def _branch(self, A, sizes, trail, pos):
        free = self.free
        while pos < len(free) and A[free[pos]] is not None:
            pos += 1
        if pos == len(free):
            yield list(A)
            return
        e = free[pos]
        for value in self._candidates(e, sizes):
            self.nodes += 1
            if self.nodes > self.budget:
                raise SearchBudgetExceeded("functor enumeration exceeded its node budget",
                                           budget=self.budget)
            mark = len(trail)
            queue: list[int] = []
            if self._set(A, sizes, e, tuple(value), trail, queue) and self._propagate(A, sizes, queue, trail):
                yield from self._branch(A, sizes, trail, pos + 1)
            while len(trail) > mark:
                A[trail.pop()] = None


def _gauge_orbit_key(search: _Search, comp_sizes, assignment) -> tuple:
    """Least encoding of ``assignment`` under conjugation by one permutation
    per forest component (tree edges stay identities)."""
    free = search.free
    comp, src, tgt = search.comp, search.src, search.tgt
    best = None
    for betas in itertools.product(*(itertools.permutations(range(s)) for s in comp_sizes)):
        inv = [invert_map(b) for b in betas]
        enc = tuple(
            tuple(betas[comp[tgt[e]]][assignment[e][inv[comp[src[e]]][i]]]
                  for i in range(len(assignment[e])))
            for e in free)
        if best is None or enc < best[0]:
            best = (enc, betas)
    return best


def _apply_gauge(search: _Search, betas, assignment) -> list:
    comp, src, tgt = search.comp, search.src, search.tgt
    out = []
    for e, img in enumerate(assignment):
        bs, bt = betas[comp[src[e]]], betas[comp[tgt[e]]]
        inv = invert_map(bs)
        out.append(tuple(bt[img[inv[i]]] for i in range(len(img))))
    return out


def enumerate_set_functors(C: FiniteCategory, k: int, invert: Iterable[int] | np.ndarray | None = None,
                           budget: int = DEFAULT_NODE_BUDGET) -> list[SetFunctor]:
    """All functors ``C → FinSet`` with values of size ``<= k`` sending every
    edge of ``invert`` to a bijection, one representative per natural
    isomorphism class, in canonical order."""
    inverted = _edge_mask(C, invert)
    search = _Search(C, inverted, budget)
    gauge_limit = 5040
    reps: dict[tuple, SetFunctor] = {}
    pending: list[SetFunctor] = []
    for sizes, comp_sizes, assignment in search.run(k):
        order = 1
        for s in comp_sizes:
            for i in range(2, s + 1):
                order *= i
        if order <= gauge_limit:
            key, betas = _gauge_orbit_key(search, comp_sizes, assignment)
            if (sizes, key) not in reps:
                images = _apply_gauge(search, betas, assignment)
                reps[(sizes, key)] = SetFunctor(C, sizes, tuple(images))
        else:
            pending.append(SetFunctor(C, sizes, tuple(assignment)))
    out = [reps[key] for key in sorted(reps)]
    # residual gauge groups too large for orbit minimisation: pairwise check
    classes: list[SetFunctor] = []
    for F in pending:
        if not any(set_natural_iso(F, R) is not None for R in classes):
            classes.append(F)
    out.extend(sorted(classes, key=lambda F: F.encoding()))
    return out


def _edge_mask(C: FiniteCategory, invert) -> np.ndarray:
    if invert is None:
        return np.zeros(C.n_morphisms, dtype=bool)
    if isinstance(invert, str) and invert == "all":
        return np.ones(C.n_morphisms, dtype=bool)
    arr = np.asarray(invert)
    if arr.dtype == bool and arr.shape == (C.n_morphisms,):
        return arr.copy()
    mask = np.zeros(C.n_morphisms, dtype=bool)
    mask[np.asarray(list(invert), dtype=INDEX)] = True
    return mask
