"""Fundamental groupoids of finite categories and small finite groups.

The localization of a finite category at all of its morphisms is presented
per connected component by a spanning tree: one generator per non-tree,
non-identity morphism and one relator ``f·g = h`` per composable pair with
``h = g∘f``.  Words are read in path order (``f·g`` is "first ``f``, then
``g``"), so that the coset action is a right action and a functor to sets is
obtained from a permutation representation without inversions.

Before coset enumeration the presentation is shrunk by eliminating every
generator that a relator of length at most two expresses through another
one; the group order is then found by Todd–Coxeter enumeration over the
trivial subgroup.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import OrderTooLarge
from .fincat import INDEX, FiniteCategory
from .simplex import FiniteGroup, validate_group

DEFAULT_MAX_ORDER = 24
DEFAULT_COSET_LIMIT = 4_000_000   # table entries, cosets times columns


# -----------------------------------------------------------------------------
# coset enumeration
# -----------------------------------------------------------------------------

def _letter(gen: int, sign: int) -> int:
    return 2 * gen + (0 if sign > 0 else 1)


def todd_coxeter(n_gens: int, relators: list[list[int]], max_order: int = DEFAULT_MAX_ORDER,
                 limit: int = DEFAULT_COSET_LIMIT) -> list[list[int]]:
    """Coset table of the trivial subgroup (HLT strategy with coincidences).

    Letters are ``2*i`` for generator ``i`` and ``2*i+1`` for its inverse.
    Returns the table of live cosets, renumbered so that coset 0 is the
    subgroup, or raises :class:`OrderTooLarge`.
    """
    ncols = 2 * n_gens
    # enough room for coincidence processing on groups within the order bound
    max_cosets = max(min(limit // max(ncols, 1), 2000 * max_order), max_order + 1)
    table: list[list] = [[None] * ncols]
    parent = [0]

    def rep(k):
        root = k
        while parent[root] != root:
            root = parent[root]
        while parent[k] != root:
            parent[k], k = root, parent[k]
        return root

    def merge(k, l, queue):
        k, l = rep(k), rep(l)
        if k == l:
            return
        if k > l:
            k, l = l, k
        parent[l] = k
        queue.append(l)

    def coincidence(a, b):
        queue: list[int] = []
        merge(a, b, queue)
        i = 0
        while i < len(queue):
            e = queue[i]
            i += 1
            row = table[e]
            for x in range(ncols):
                f = row[x]
                if f is None:
                    continue
                table[f][x ^ 1] = None
                e1, f1 = rep(e), rep(f)
                if table[e1][x] is not None:
                    merge(f1, table[e1][x], queue)
                elif table[f1][x ^ 1] is not None:
                    merge(e1, table[f1][x ^ 1], queue)
                else:
                    table[e1][x] = f1
                    table[f1][x ^ 1] = e1

    def define(c, x):
        if len(table) >= max_cosets:
            raise OrderTooLarge("coset enumeration exceeded its limit", cosets=len(table), bound=max_order)
        d = len(table)
        table.append([None] * ncols)
        parent.append(d)
        table[c][x] = d
        table[d][x ^ 1] = c

    def scan_and_fill(c, w):
        f, b = c, c
        i, j = 0, len(w) - 1
        while True:
            while i <= j and table[f][w[i]] is not None:
                f = table[f][w[i]]
                i += 1
            if i > j:
                if f != b:
                    coincidence(f, b)
                return
            while j >= i and table[b][w[j] ^ 1] is not None:
                b = table[b][w[j] ^ 1]
                j -= 1
            if j < i:
                coincidence(f, b)
                return
            if i == j:
                table[f][w[i]] = b
                table[b][w[i] ^ 1] = f
                return
            define(f, w[i])

    c = 0
    while c < len(table):
        for w in relators:
            if parent[c] != c:
                break
            scan_and_fill(c, w)
        if parent[c] == c:
            for x in range(ncols):
                if parent[c] != c:
                    break
                if table[c][x] is None:
                    define(c, x)
        c += 1

    live = [k for k in range(len(table)) if parent[k] == k]
    if len(live) > max_order:
        raise OrderTooLarge(f"group has order {len(live)} > {max_order}", order=len(live), bound=max_order)
    new = {k: i for i, k in enumerate(live)}
    return [[new[rep(v)] for v in table[k]] for k in live]


def group_from_coset_table(table: list[list[int]], n_gens: int) -> tuple[FiniteGroup, list[int]]:
    """Regular-representation group of a coset table of the trivial subgroup.

    Element ``i`` is the coset ``0·w_i``; products are path concatenation.
    Also returns the element of each generator.
    """
    N = len(table)
    words: list = [None] * N
    words[0] = ()
    queue = [0]
    for c in queue:
        for x in range(2 * n_gens):
            d = table[c][x]
            if words[d] is None:
                words[d] = words[c] + (x,)
                queue.append(d)

    def act(c, w):
        for x in w:
            c = table[c][x]
        return c

    mult = [[act(a, words[b]) for b in range(N)] for a in range(N)]
    gens = [table[0][2 * i] for i in range(n_gens)]
    return FiniteGroup(tuple(tuple(r) for r in mult), 0), gens


# -----------------------------------------------------------------------------
# groups
# -----------------------------------------------------------------------------

def element_orders(G: FiniteGroup) -> list[int]:
    out = []
    for g in range(G.order):
        k, x = 1, g
        while x != G.identity:
            x = G.table[x][g]
            k += 1
        out.append(k)
    return out


def generated_subgroup(G: FiniteGroup, gens) -> set:
    seen = {G.identity}
    queue = [G.identity]
    for x in queue:
        for g in gens:
            y = G.table[x][g]
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def small_generating_set(G: FiniteGroup) -> list[int]:
    orders = element_orders(G)
    gens: list[int] = []
    sub = {G.identity}
    # prefer elements of large order so that few generators are needed
    for g in sorted(range(G.order), key=lambda g: (-orders[g], g)):
        if g not in sub:
            gens.append(g)
            sub = generated_subgroup(G, gens)
        if len(sub) == G.order:
            break
    return gens


def find_isomorphism(A: FiniteGroup, B: FiniteGroup) -> list[int] | None:
    """Brute-force isomorphism ``A → B`` as an element map, or ``None``."""
    if A.order != B.order:
        return None
    oa, ob = element_orders(A), element_orders(B)
    if sorted(oa) != sorted(ob):
        return None
    gens = small_generating_set(A)
    candidates = [[h for h in range(B.order) if ob[h] == oa[g]] for g in gens]
    for images in itertools.product(*candidates):
        phi = {A.identity: B.identity}
        queue = [A.identity]
        ok = True
        for x in queue:
            for g, h in zip(gens, images):
                y, z = A.table[x][g], B.table[phi[x]][h]
                if y in phi:
                    if phi[y] != z:
                        ok = False
                        break
                else:
                    phi[y] = z
                    queue.append(y)
            if not ok:
                break
        if not ok or len(set(phi.values())) != A.order:
            continue
        if all(phi[A.table[x][y]] == B.table[phi[x]][phi[y]] for x in range(A.order) for y in range(A.order)):
            return [phi[x] for x in range(A.order)]
    return None


def groups_isomorphic(A: FiniteGroup, B: FiniteGroup) -> bool:
    return find_isomorphism(A, B) is not None


def trivial_group() -> FiniteGroup:
    return validate_group([[0]], 0, "z1")


# -----------------------------------------------------------------------------
# presentations of the localization
# -----------------------------------------------------------------------------

class _SignedUnionFind:
    """Letters ``x = root^sign``; the extra node ``trivial`` is the identity."""

    def __init__(self, n: int):
        self.trivial = n
        self.parent = list(range(n + 1))
        self.sign = [1] * (n + 1)

    def find(self, x: int) -> tuple[int, int]:
        path = []
        s = 1
        while self.parent[x] != x:
            path.append(x)
            x = self.parent[x]
        root = x
        # compress
        for y in reversed(path):
            if self.parent[y] != root:
                p = self.parent[y]
                self.sign[y] *= self.sign[p]
                self.parent[y] = root
        if path:
            s = self.sign[path[0]]
        return root, s

    def resolve_all(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = [self.resolve(x) for x in range(len(self.parent))]
        return (np.array([p[0] for p in pairs], dtype=INDEX), np.array([p[1] for p in pairs], dtype=INDEX))

    def resolve(self, x: int) -> tuple[int, int]:
        r, s = self.find(x)
        return (r, 1) if r == self.trivial else (r, s)

    def set_trivial(self, x: int) -> None:
        r, _ = self.find(x)
        if r != self.trivial:
            self.parent[r] = self.trivial
            self.sign[r] = 1

    def union(self, a: int, b: int, s: int) -> bool:
        """Record ``a = b^s``; ``False`` if it only says ``r^2 = 1``."""
        ra, sa = self.find(a)
        rb, sb = self.find(b)
        t = sa * sb * s            # ra = rb^t
        if ra == rb:
            return ra == self.trivial or t == 1
        if rb == self.trivial:
            self.parent[ra] = self.trivial
        elif ra == self.trivial:
            self.parent[rb] = self.trivial
        elif ra > rb:
            self.parent[ra], self.sign[ra] = rb, t
        else:
            self.parent[rb], self.sign[rb] = ra, t
        return True


def _reduce_relators(uf: _SignedUnionFind, pending: np.ndarray) -> list:
    """Eliminate generators through relators ``f·g·h⁻¹`` that reduce to at
    most two letters; returns the remaining relators as resolved words."""
    T = uf.trivial
    exps = np.array([1, 1, -1], dtype=INDEX)
    while True:
        root, sign = uf.resolve_all()
        r = root[pending]
        s = sign[pending] * exps
        live = r != T
        nt = live.sum(axis=1)
        left = np.full(len(r), -1, dtype=INDEX)     # surviving letter after a cancellation
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            cancel = live[:, i] & live[:, j] & (r[:, i] == r[:, j]) & (s[:, i] == -s[:, j])
            left[cancel & (left < 0)] = k
        empty = (nt == 0) | ((nt == 2) & (left >= 0))
        rows = np.arange(len(r))
        single = (nt == 1) | ((nt == 3) & (left >= 0))
        single_root = np.where(nt[single] == 1, np.where(live[single], r[single], -1).max(axis=1),
                               r[rows[single], np.maximum(left[single], 0)])
        pair = (nt == 2) & (left < 0)
        pr, ps = r[pair], s[pair]
        order = np.argsort(~live[pair], axis=1, kind="stable")[:, :2]
        a = np.take_along_axis(pr, order, axis=1)
        e = np.take_along_axis(ps, order, axis=1)
        distinct = a[:, 0] != a[:, 1]
        unions = np.unique(np.stack([a[distinct, 0], a[distinct, 1], -e[distinct, 0] * e[distinct, 1]], axis=1), axis=0)
        changed = False
        for x in np.unique(single_root).tolist():
            uf.set_trivial(x)
            changed = True
        for x, y, t in unions.tolist():
            uf.union(x, y, t)
            changed = True
        pending = pending[~empty & ~single]
        if not changed:
            break
    r, s = r[~empty & ~single], s[~empty & ~single]
    hard = []
    words = np.unique(np.concatenate([r, s], axis=1), axis=0) if len(r) else np.zeros((0, 6), dtype=INDEX)
    for row in words.tolist():
        hard.append([(row[i], row[i + 3]) for i in range(3) if row[i] != T])
    return hard


def _reduce(word):
    out = []
    for letter in word:
        if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
            out.pop()
        else:
            out.append(letter)
    while len(out) >= 2 and out[0][0] == out[-1][0] and out[0][1] == -out[-1][1]:
        out = out[1:-1]
    return out


def _spanning_tree(C: FiniteCategory, roots_first=()) -> tuple[np.ndarray, list[int], np.ndarray]:
    n = C.n_objects
    src, tgt = C.src.tolist(), C.tgt.tolist()
    adj: list[list[int]] = [[] for _ in range(n)]
    for e in range(C.n_morphisms):
        if src[e] != tgt[e]:
            adj[src[e]].append(e)
            adj[tgt[e]].append(e)
    comp = np.full(n, -1, dtype=INDEX)
    roots: list[int] = []
    tree = np.zeros(C.n_morphisms, dtype=bool)
    order = list(roots_first) + list(range(n))
    for r in order:
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
    # components labelled by least object for a basepoint-independent numbering
    return comp, roots, tree


@dataclass(eq=False)
class GroupoidComponent:
    representative: int
    objects: np.ndarray
    generators: np.ndarray        # non-tree, non-identity morphisms
    relators: np.ndarray          # rows (f, g, h): f·g = h, tree edges and identities trivial
    order: int
    group: FiniteGroup
    element_of: np.ndarray = field(repr=False, default=None)   # per morphism, -1 outside the component
    reduced_generators: list = field(default_factory=list)
    reduced_relators: list = field(default_factory=list)

    def relator_words(self):
        """Relators as words ``[(generator, ±1), ...]`` in the non-tree generators."""
        gens = set(self.generators.tolist())
        for f, g, h in self.relators.tolist():
            word = [(x, s) for x, s in ((f, 1), (g, 1), (h, -1)) if x in gens]
            yield word

    def check_relators(self) -> bool:
        el = self.element_of
        tab = np.asarray(self.group.table, dtype=INDEX)
        f, g, h = self.relators.T
        return bool(np.all(tab[el[f], el[g]] == el[h]))

    def abelianization(self) -> tuple[int, list[int]]:
        """``(free rank, torsion invariant factors)`` of the component group."""
        from .homology import smith_invariants

        gens = self.reduced_generators
        if not gens:
            return 0, []
        col = {g: i for i, g in enumerate(gens)}
        rows = []
        for word in self.reduced_relators:
            row = [0] * len(gens)
            for g, s in word:
                row[col[g]] += s
            rows.append(row)
        rank, factors = smith_invariants(rows, len(gens))
        torsion = [d for d in factors if d > 1]
        return len(gens) - rank, torsion


@dataclass(eq=False)
class GroupoidPresentation:
    category: FiniteCategory
    components: list
    component_of: np.ndarray      # per object
    tree: np.ndarray              # per morphism

    def element(self, e: int) -> tuple[int, int]:
        """``(component, group element)`` of a morphism."""
        c = int(self.component_of[self.category.src[e]])
        return c, int(self.components[c].element_of[e])


def fundamental_groupoid(C: FiniteCategory, invert: str = "all", basepoints=(),
                         max_order: int = DEFAULT_MAX_ORDER) -> GroupoidPresentation:
    """Spanning-tree presentation of the localization of ``C`` at all
    morphisms, with the group of every component computed by coset
    enumeration."""
    if invert != "all":
        raise ValueError("only the localization at all morphisms is supported")
    comp, roots, tree = _spanning_tree(C, basepoints)
    is_id = C.is_identity_mask()
    trivial_mask = tree | is_id
    G, F = C.pairs()
    keep = ~(is_id[G] | is_id[F])
    rel = np.stack([F[keep], G[keep], C.comp[keep]], axis=1)     # f then g equals h

    uf = _SignedUnionFind(C.n_morphisms)
    for e in np.flatnonzero(trivial_mask).tolist():
        uf.set_trivial(e)
    pending = rel[~(trivial_mask[rel[:, 0]] & trivial_mask[rel[:, 1]] & trivial_mask[rel[:, 2]])]
    hard = _reduce_relators(uf, pending)

    components = []
    objects_of = [np.flatnonzero(comp == c) for c in range(len(roots))]
    mor_comp = comp[C.src]
    rel_comp = mor_comp[rel[:, 0]] if len(rel) else np.zeros(0, dtype=INDEX)
    hard_by_comp: list[list] = [[] for _ in roots]
    seen = set()
    for word in hard:
        word = _canonical_cyclic(_reduce(word))
        if not word or word in seen:
            continue
        seen.add(word)
        hard_by_comp[int(comp[C.src[word[0][0]]])].append(list(word))
    root_all, sign_all = uf.resolve_all()
    for c, r in enumerate(roots):
        mors = np.flatnonzero(mor_comp == c)
        gens_orig = mors[~trivial_mask[mors]]
        reduced = sorted({uf.find(int(e))[0] for e in gens_orig.tolist()} - {uf.trivial})
        index = {g: i for i, g in enumerate(reduced)}
        words = [[_letter(index[x], s) for x, s in w] for w in hard_by_comp[c]]
        table = todd_coxeter(len(reduced), words, max_order=max_order)
        group, gen_el = group_from_coset_table(table, len(reduced))
        inv = np.asarray(group.inverses, dtype=INDEX)
        gen_el = np.asarray(gen_el, dtype=INDEX)
        element_of = np.full(C.n_morphisms, -1, dtype=INDEX)
        root_m, sign_m = root_all[mors], sign_all[mors]
        trivial_m = root_m == uf.trivial
        el = gen_el[np.searchsorted(np.asarray(reduced, dtype=INDEX), np.where(trivial_m, 0, root_m))] \
            if reduced else np.zeros(len(mors), dtype=INDEX)
        el = np.where(sign_m > 0, el, inv[el])
        element_of[mors] = np.where(trivial_m, group.identity, el)
        components.append(GroupoidComponent(
            representative=r,
            objects=objects_of[c],
            generators=gens_orig,
            relators=rel[rel_comp == c],
            order=group.order,
            group=group,
            element_of=element_of,
            reduced_generators=reduced,
            reduced_relators=hard_by_comp[c],
        ))
    return GroupoidPresentation(C, components, comp, tree)


def _canonical_cyclic(word) -> tuple:
    if not word:
        return ()
    rots = [tuple(word[i:] + word[:i]) for i in range(len(word))]
    inv = [(x, -s) for x, s in reversed(word)]
    rots += [tuple(inv[i:] + inv[:i]) for i in range(len(inv))]
    return min(rots)


def groupoid_equivalent(P: GroupoidPresentation, Q: GroupoidPresentation) -> bool:
    """Same number of components and a matching of components with
    isomorphic groups."""
    if len(P.components) != len(Q.components):
        return False
    remaining = list(Q.components)
    for a in P.components:
        for i, b in enumerate(remaining):
            if groups_isomorphic(a.group, b.group):
                del remaining[i]
                break
        else:
            return False
    return True
