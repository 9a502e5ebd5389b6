"""Sheaves on a total category versus equivariant sheaves.

For a bar datum of a finite group ``G`` acting on ``X``, finite-set-valued
functors on the total category that invert cartesian edges are compared with
functors on the action groupoid ``X//G``.  :func:`descend` and
:func:`assemble` go back and forth; :func:`verify_exodromy` enumerates both
sides independently and matches their isomorphism classes.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EquivalenceFailure, NotCartesianInverting, NotFunctorial
from .fincat import FiniteCategory
from .finset import (
    DEFAULT_NODE_BUDGET,
    SetFunctor,
    components_as_maps,
    compose_maps,
    enumerate_set_functors,
    invert_map,
    set_natural_iso,
)
from .groupoid import fundamental_groupoid, small_generating_set
from .simplex import FiniteGroup, GSet, SimplexMap, bar_datum
from .total import TotalCategory, build_total, cartesian_lift

GROUPOID_ROUTE_PAIRS = 200_000   # "auto" switches to the groupoid route above this many composable pairs


@dataclass(frozen=True, eq=False)
class SheafFunctor(SetFunctor):
    """Set-valued functor on a total category."""

    total: TotalCategory | None = None

    def inverts_cartesian(self) -> bool:
        return self.non_bijective(np.flatnonzero(self.total.cartesian_flags).tolist()) is None


@dataclass(frozen=True, eq=False)
class EquivariantSheaf(SetFunctor):
    """Set-valued functor on the action groupoid ``X//G``."""

    group: FiniteGroup | None = None
    xset: GSet | None = None

    def action(self, x: int, g: int) -> tuple:
        """``ρ_g : S(x) → S(x·g)``."""
        return self.images[x * self.group.order + g]


def action_groupoid(G: FiniteGroup, X: GSet) -> FiniteCategory:
    """Objects the points of ``X``; morphism ``x*|G| + g`` is ``g : x → x·g``."""
    N = G.order
    src = [x for x in range(X.size) for _ in range(N)]
    tgt = [X.action[x][g] for x in range(X.size) for g in range(N)]
    ident = [x * N + G.identity for x in range(X.size)]

    def compose(second, first):
        x, g = divmod(first, N)
        h = second % N
        return x * N + G.table[g][h]

    return FiniteCategory.from_function(X.size, src, tgt, ident, compose)


# -----------------------------------------------------------------------------
# enumeration
# -----------------------------------------------------------------------------

def _permutation_homs(group: FiniteGroup, s: int) -> list[tuple]:
    """Homomorphisms to ``S_s`` up to conjugacy, as tuples of permutations
    (one per group element); products are "first, then"."""
    perms = list(itertools.permutations(range(s)))
    gens = small_generating_set(group)
    classes = {}
    for images in itertools.product(perms, repeat=len(gens)):
        phi = {group.identity: tuple(range(s))}
        queue = [group.identity]
        ok = True
        for x in queue:
            for g, p in zip(gens, images):
                y = group.table[x][g]
                val = compose_maps(p, phi[x])       # first phi[x], then p
                if y in phi:
                    if phi[y] != val:
                        ok = False
                        break
                else:
                    phi[y] = val
                    queue.append(y)
            if not ok:
                break
        if not ok:
            continue
        if any(phi[group.table[a][b]] != compose_maps(phi[b], phi[a])
               for a in range(group.order) for b in range(group.order)):
            continue
        rep = tuple(phi[x] for x in range(group.order))
        key = min(tuple(compose_maps(beta, compose_maps(p, invert_map(beta))) for p in rep) for beta in perms)
        classes.setdefault(key, key)
    return sorted(classes)


def _groupoid_route(C: FiniteCategory, k: int) -> list[SetFunctor]:
    """Functors inverting every morphism, through the fundamental groupoid."""
    P = fundamental_groupoid(C)
    per_comp = []
    for comp in P.components:
        options = []
        for s in range(k + 1):
            for phi in _permutation_homs(comp.group, s):
                options.append((s, phi))
        per_comp.append(options)
    comp_of_mor = P.component_of[C.src]
    out = []
    for choice in itertools.product(*per_comp):
        sizes = tuple(choice[int(c)][0] for c in P.component_of.tolist())
        images = []
        for e, c in enumerate(comp_of_mor.tolist()):
            phi = choice[c][1]
            images.append(phi[int(P.components[c].element_of[e])])
        out.append(SetFunctor(C, sizes, tuple(images)))
    return sorted(out, key=lambda F: F.encoding())


def enumerate_sheaves(C: FiniteCategory, k: int, invert=None, budget: int = DEFAULT_NODE_BUDGET,
                      route: str = "search") -> list[SetFunctor]:
    """Isomorphism classes of functors ``C → FinSet`` with values of size at
    most ``k`` inverting the edges in ``invert``.

    ``route="groupoid"`` requires every morphism to be inverted and goes
    through the fundamental groupoid instead of the backtracking search.
    """
    if route == "groupoid":
        mask = _all_inverted(C, invert)
        if not mask:
            raise ValueError("the groupoid route needs every morphism inverted")
        return _groupoid_route(C, k)
    return enumerate_set_functors(C, k, invert, budget)


def _all_inverted(C: FiniteCategory, invert) -> bool:
    if isinstance(invert, str):
        return invert == "all"
    if invert is None:
        return C.n_morphisms == C.n_objects and bool(C.is_identity_mask().all())
    arr = np.asarray(invert)
    if arr.dtype == bool:
        return bool(arr.all())
    return set(arr.tolist()) >= set(range(C.n_morphisms))


# -----------------------------------------------------------------------------
# descent and assembly
# -----------------------------------------------------------------------------

_D0 = SimplexMap(0, 1, (1,))
_D1 = SimplexMap(0, 1, (0,))


def _bar_parts(T: TotalCategory) -> tuple[FiniteGroup, GSet]:
    meta = T.datum.meta
    if "group" not in meta or "xset" not in meta:
        raise ValueError("total category was not built from a bar datum")
    return meta["group"], meta["xset"]


def descend(T: TotalCategory, F: SetFunctor) -> EquivariantSheaf:
    """Equivariant sheaf with ``S(x) = F(0, x)`` and
    ``ρ_g = F(δ_0-lift)^{-1} ∘ F(δ_1-lift)`` at ``(1, (x, g))``."""
    G, X = _bar_parts(T)
    bad = F.non_bijective(np.flatnonzero(T.cartesian_flags).tolist())
    if bad is not None:
        raise NotCartesianInverting(f"edge {bad} is cartesian but not sent to a bijection", edge=bad)
    N = G.order
    sizes = tuple(F.sizes[T.object_index(0, x)] for x in range(X.size))
    images = []
    for x in range(X.size):
        for g in range(N):
            xi = x * N + g
            a = F.images[cartesian_lift(T, _D0, xi)]      # S(x·g) → F(1, (x, g))
            b = F.images[cartesian_lift(T, _D1, xi)]      # S(x) → F(1, (x, g))
            images.append(compose_maps(invert_map(a), b))
    S = EquivariantSheaf(action_groupoid(G, X), sizes, tuple(images), G, X)
    _check_descent(T, F, S)
    try:
        S.validate()
    except NotFunctorial as exc:
        raise EquivalenceFailure(f"descended datum is not functorial: {exc.message}") from exc
    return S


def _check_descent(T: TotalCategory, F: SetFunctor, S: EquivariantSheaf) -> None:
    """Unit through the degeneracy ``s_0`` and multiplicativity through the
    three edges of the level-2 objects ``(x, g, h)``."""
    G, X = S.group, S.xset
    N, e = G.order, G.identity
    s0 = SimplexMap(1, 0, (0, 0))
    for x in range(X.size):
        # σ_0∘δ_1 = id, so F(s_0-lift)∘F(δ_1-lift at (x, e)) is the identity
        up = F.images[cartesian_lift(T, _D1, x * N + e)]
        down = F.images[cartesian_lift(T, s0, x)]
        if compose_maps(down, up) != tuple(range(S.sizes[x])) or S.action(x, e) != tuple(range(S.sizes[x])):
            raise EquivalenceFailure("descended action is not unital", point=x)
    if T.truncation < 2:
        return
    vertex = [SimplexMap(0, 2, (i,)) for i in range(3)]
    for x in range(X.size):
        for g in range(N):
            xg = X.action[x][g]
            for h in range(N):
                zeta = (x * N + g) * N + h
                a, b, c = (F.images[cartesian_lift(T, v, zeta)] for v in vertex)
                gh = G.table[g][h]
                if (compose_maps(invert_map(b), a) != S.action(x, g)
                        or compose_maps(invert_map(c), b) != S.action(xg, h)
                        or compose_maps(invert_map(c), a) != S.action(x, gh)
                        or S.action(x, gh) != compose_maps(S.action(xg, h), S.action(x, g))):
                    raise EquivalenceFailure("descended action is not multiplicative", point=x, g=g, h=h)


def assemble(G: FiniteGroup, X: GSet, S: SetFunctor, n: int | None = None,
             T: TotalCategory | None = None) -> SheafFunctor:
    """Functor on the total category of the bar datum with
    ``F(m, (x; g_1..g_m)) = S(x)``; the edge over ``σ`` into ``(x; g…)``
    acts by the inverse of ``ρ_{g_1⋯g_{σ(0)}}`` at ``x``."""
    if T is None:
        T = build_total(bar_datum(G, X, n))
    N = G.order
    labels = T.datum.labels
    maps = T.maps
    C = T.underlying
    obj_label = [labels[int(m)][int(v)] for m, v in zip(T.level_of.tolist(), T.fiber_object_of.tolist())]
    sizes = tuple(S.sizes[t[0]] for t in obj_label)
    inverse_cache: dict = {}
    images = []
    tgt = C.tgt.tolist()
    for e, s in enumerate(T.sigma_of.tolist()):
        t = obj_label[tgt[e]]
        x = t[0]
        w = G.identity
        for g in t[1:maps[s].values[0] + 1]:
            w = G.table[w][g]
        key = x * N + w
        if key not in inverse_cache:
            inverse_cache[key] = invert_map(S.images[key])
        images.append(inverse_cache[key])
    return SheafFunctor(C, sizes, tuple(images), T)


# -----------------------------------------------------------------------------
# comparison
# -----------------------------------------------------------------------------

def _transport_iso(F: SetFunctor, G: SetFunctor, invertible: np.ndarray) -> list | None:
    """Natural isomorphism ``F ⇒ G`` when spanning edges are bijections in
    both: the component at a root determines the rest, so every bijection at
    each root is tried and the result checked for naturality."""
    from .groupoid import _spanning_tree

    C = F.source
    if F.sizes != G.sizes:
        return None
    comp, roots, tree = _spanning_tree(C)
    src, tgt = C.src.tolist(), C.tgt.tolist()
    tree_edges = np.flatnonzero(tree).tolist()
    if any(not invertible[e] for e in tree_edges):
        return None
    adj: dict = {}
    for e in tree_edges:
        adj.setdefault(src[e], []).append(e)
        adj.setdefault(tgt[e], []).append(e)
    eta: list = [None] * C.n_objects
    for r in roots:
        found = False
        for beta in itertools.permutations(range(F.sizes[r])):
            eta[r] = tuple(beta)
            order = [r]
            seen = {r}
            for x in order:
                for e in adj.get(x, []):
                    y = tgt[e] if src[e] == x else src[e]
                    if y in seen:
                        continue
                    seen.add(y)
                    order.append(y)
                    if src[e] == x:     # η_y = G(e)∘η_x∘F(e)^{-1}
                        eta[y] = compose_maps(G.images[e], compose_maps(eta[x], invert_map(F.images[e])))
                    else:               # e : y → x, η_y = G(e)^{-1}∘η_x∘F(e)
                        eta[y] = compose_maps(invert_map(G.images[e]), compose_maps(eta[x], F.images[e]))
            members = [x for x in range(C.n_objects) if comp[x] == comp[r]]
            if all(compose_maps(eta[tgt[e]], F.images[e]) == compose_maps(G.images[e], eta[src[e]])
                   for e in range(C.n_morphisms) if comp[src[e]] == comp[r]):
                found = True
                break
            for x in members:
                eta[x] = None
        if not found:
            return None
    return eta


def natural_iso_maps(F: SetFunctor, G: SetFunctor) -> list | None:
    """Components of a natural isomorphism ``F ⇒ G`` or ``None``."""
    inv_f = np.array([len(set(img)) == F.sizes[t] and len(img) == F.sizes[t]
                      for img, t in zip(F.images, F.source.tgt.tolist())])
    inv_g = np.array([len(set(img)) == G.sizes[t] and len(img) == G.sizes[t]
                      for img, t in zip(G.images, G.source.tgt.tolist())])
    if F.source.n_morphisms and inv_f.all() and inv_g.all():
        return _transport_iso(F, G, inv_f & inv_g)
    eta = set_natural_iso(F, G)
    if eta is None:
        return None
    return components_as_maps(eta)


def check_natural_iso(F: SetFunctor, G: SetFunctor, eta: list) -> bool:
    """Components are bijections and every naturality square commutes."""
    C = F.source
    if any(len(eta[x]) != F.sizes[x] or sorted(eta[x]) != list(range(G.sizes[x])) for x in range(C.n_objects)):
        return False
    src, tgt = C.src.tolist(), C.tgt.tolist()
    return all(compose_maps(eta[tgt[e]], F.images[e]) == compose_maps(G.images[e], eta[src[e]])
               for e in range(C.n_morphisms))


def _fingerprint(F: SetFunctor) -> str:
    payload = json.dumps([list(F.sizes), [list(i) for i in F.images]], separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class ComparisonReport:
    group: str
    xset: str
    fiber_bound: int
    truncation: int
    route: str
    sheaf_classes: list
    descent_classes: list
    matched: list                   # matched[i] = descent class of sheaf class i
    sheaf_witnesses: list = field(repr=False, default_factory=list)     # F_i ⇒ assemble(descend(F_i))
    descent_witnesses: list = field(repr=False, default_factory=list)   # S_j ⇒ descend(assemble(S_j))
    assembled_witnesses: list = field(repr=False, default_factory=list)  # assemble(S_j) ⇒ F_{matched^-1(j)}

    @property
    def iso_classes_sheaf_side(self) -> int:
        return len(self.sheaf_classes)

    @property
    def iso_classes_descent_side(self) -> int:
        return len(self.descent_classes)

    @property
    def is_bijection(self) -> bool:
        return sorted(self.matched) == list(range(len(self.descent_classes))) and \
            len(self.matched) == len(self.sheaf_classes)

    def to_document(self) -> dict:
        points = self.descent_classes[0].xset.size if self.descent_classes else 0
        return {
            "group": self.group,
            "xset": self.xset,
            "fiber_bound": self.fiber_bound,
            "truncation": self.truncation,
            "route": self.route,
            "iso_classes_sheaf_side": self.iso_classes_sheaf_side,
            "iso_classes_descent_side": self.iso_classes_descent_side,
            "bijection": self.is_bijection,
            "matched": [[i, j] for i, j in enumerate(self.matched)],
            # level-0 objects come first in the total category
            "sheaf_representatives": [{"sizes_level0": list(F.sizes[:points]), "fingerprint": _fingerprint(F)}
                                      for F in self.sheaf_classes],
            "descent_representatives": [{"sizes": list(S.sizes), "actions": [list(a) for a in S.images]}
                                        for S in self.descent_classes],
            "witnesses": [{"sheaf": i, "level0_components": [list(c) for c in w[:points]]}
                          for i, w in enumerate(self.sheaf_witnesses)],
        }


def verify_exodromy(G: FiniteGroup, X: GSet, k: int, n: int, route: str = "auto",
                    budget: int = DEFAULT_NODE_BUDGET) -> ComparisonReport:
    """Enumerate both sides, match classes through descent and assembly, and
    check round-trip witnesses; raises :class:`EquivalenceFailure` on any
    mismatch."""
    D = bar_datum(G, X, n)
    T = build_total(D)
    C = T.underlying
    if route == "auto":
        route = "groupoid" if C.n_pairs > GROUPOID_ROUTE_PAIRS and T.cartesian_flags.all() else "search"
    sheaf_side = enumerate_sheaves(C, k, T.cartesian_flags, budget, route=route)
    sheaf_side = [SheafFunctor(F.source, F.sizes, F.images, T) for F in sheaf_side]
    A = action_groupoid(G, X)
    descent_side = [EquivariantSheaf(S.source, S.sizes, S.images, G, X)
                    for S in enumerate_sheaves(A, k, "all", budget)]
    if len(sheaf_side) != len(descent_side):
        raise EquivalenceFailure("the two sides have different numbers of classes",
                                 sheaf_side=len(sheaf_side), descent_side=len(descent_side))

    matched, sheaf_w = [], []
    for i, F in enumerate(sheaf_side):
        if not F.inverts_cartesian():
            raise EquivalenceFailure("enumerated functor does not invert cartesian edges", sheaf=i)
        S = descend(T, F)
        j = next((j for j, R in enumerate(descent_side) if natural_iso_maps(S, R) is not None), None)
        if j is None:
            raise EquivalenceFailure("descended sheaf matches no equivariant class", sheaf=i)
        matched.append(j)
        back = assemble(G, X, S, T=T)
        eta = natural_iso_maps(F, back)
        if eta is None or not check_natural_iso(F, back, eta):
            raise EquivalenceFailure("round trip through descent is not isomorphic to the identity", sheaf=i)
        sheaf_w.append(eta)
    if sorted(matched) != list(range(len(descent_side))):
        raise EquivalenceFailure("matching is not a bijection", matched=matched)

    descent_w, assembled_w = [], []
    inverse = {j: i for i, j in enumerate(matched)}
    for j, S in enumerate(descent_side):
        F = assemble(G, X, S, T=T)
        F.validate()
        if not F.inverts_cartesian():
            raise EquivalenceFailure("assembled functor does not invert cartesian edges", descent=j)
        back = descend(T, F)
        eta = natural_iso_maps(S, back)
        if eta is None or not check_natural_iso(S, back, eta):
            raise EquivalenceFailure("round trip through assembly is not isomorphic to the identity", descent=j)
        descent_w.append(eta)
        i = inverse[j]
        theta = natural_iso_maps(F, sheaf_side[i])
        if theta is None or not check_natural_iso(F, sheaf_side[i], theta):
            raise EquivalenceFailure("assembled sheaf is not isomorphic to its matched class", descent=j)
        assembled_w.append(theta)
    return ComparisonReport(G.name, X.name, k, n, route, sheaf_side, descent_side, matched,
                            sheaf_w, descent_w, assembled_w)
