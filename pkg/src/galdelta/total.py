"""The total category of a simplicial datum (Grothendieck construction).

Objects are pairs ``(m, ν)`` with ``ν`` an object of ``C_m``.  A morphism
``(m, ν) → (n, ξ)`` is a pair ``(σ, f)`` of a map ``σ : [m] → [n]`` and a
fiber morphism ``f : ν → σ*(ξ)`` in ``C_m``; composition is

    (τ, g) ∘ (σ, f) = (τ∘σ, σ*(g) ∘ f).

Morphism indices are ordered by the index of ``σ`` in :func:`all_maps`, then
by the target ``ξ``, then by the index of ``f``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeGuardExceeded
from .fincat import INDEX, FiniteCategory, Functor, disjoint_union
from .simplex import SimplexMap, SimplicialGaloisDatum, all_maps, identity_map, sigma_star, simplex_category

DEFAULT_MAX_MORPHISMS = 2_000_000


@dataclass(eq=False)
class TotalCategory:
    underlying: FiniteCategory
    datum: SimplicialGaloisDatum
    level_of: np.ndarray           # per object
    fiber_object_of: np.ndarray    # per object, local to its level
    sigma_of: np.ndarray           # per morphism, index into all_maps(n)
    fiber_morphism_of: np.ndarray  # per morphism, local to the source level
    cartesian_flags: np.ndarray
    object_offsets: list           # total object id of (m, 0)
    _block_start: np.ndarray
    _block_offsets: np.ndarray
    _pos_into: np.ndarray
    _fiber_mor_offsets: list

    @property
    def truncation(self) -> int:
        return self.datum.truncation

    @property
    def maps(self) -> tuple:
        return all_maps(self.truncation)

    def object_index(self, m: int, nu: int) -> int:
        self.datum.check_level(m)
        return self.object_offsets[m] + int(nu)

    def decomposition(self, e: int) -> tuple[SimplexMap, int]:
        return self.maps[int(self.sigma_of[e])], int(self.fiber_morphism_of[e])

    def morphism_index(self, sigma: SimplexMap, xi: int, f: int) -> int:
        """Index of ``(σ, f)`` with target ``(n, ξ)``."""
        s = self._map_index()[sigma]
        block = self._block_offsets[s] + int(xi)
        start = self._block_start[block]
        return int(start + self._pos_into[self._fiber_mor_offsets[sigma.source] + int(f)])

    def _map_index(self) -> dict:
        if not hasattr(self, "_maps_idx"):
            self._maps_idx = {s: i for i, s in enumerate(self.maps)}
        return self._maps_idx

    def object_label(self, x: int) -> str:
        m, nu = int(self.level_of[x]), int(self.fiber_object_of[x])
        labels = self.datum.labels
        if labels is not None:
            return f"{m}:{','.join(str(v) for v in labels[m][nu])}"
        return f"{m}:{nu}"

    def projection(self) -> Functor:
        """The functor ``(m, ν) ↦ m``, ``(σ, f) ↦ σ`` to the truncated simplex category."""
        return Functor(self.underlying, simplex_category(self.truncation), self.level_of, self.sigma_of)


def projected_morphism_count(D: SimplicialGaloisDatum) -> int:
    total = 0
    for sigma in all_maps(D.truncation):
        C = D.fibers[sigma.source]
        indeg = np.bincount(C.tgt, minlength=C.n_objects)
        total += int(indeg[sigma_star(D, sigma).object_map].sum())
    return total


def build_total(D: SimplicialGaloisDatum, max_morphisms: int = DEFAULT_MAX_MORPHISMS) -> TotalCategory:
    n = D.truncation
    maps = all_maps(n)
    map_index = {s: i for i, s in enumerate(maps)}
    projected = projected_morphism_count(D)
    if projected > max_morphisms:
        raise SizeGuardExceeded(f"total category would have {projected} morphisms", projected=projected,
                                bound=max_morphisms)
    delta = simplex_category(n)
    U, obj_off, mor_off = disjoint_union(D.fibers)

    # morphisms of U sorted by target, and the position of each within its target block
    into_list = np.argsort(U.tgt, kind="stable").astype(INDEX)
    indeg = np.bincount(U.tgt, minlength=U.n_objects).astype(INDEX)
    into_ptr = np.concatenate([[0], np.cumsum(indeg)]).astype(INDEX)
    pos_into = np.empty(U.n_morphisms, dtype=INDEX)
    pos_into[into_list] = np.arange(U.n_morphisms, dtype=INDEX) - into_ptr[U.tgt[into_list]]

    # flat pullback tables: star_obj[star_obj_off[s] + ξ] and star_mor[star_mor_off[s] + g] (global ids)
    star_obj, star_mor = [], []
    for s in maps:
        F = sigma_star(D, s)
        star_obj.append(F.object_map + obj_off[s.source])
        star_mor.append(F.morphism_map + mor_off[s.source])
    star_obj_off = np.concatenate([[0], np.cumsum([len(a) for a in star_obj])]).astype(INDEX)
    star_mor_off = np.concatenate([[0], np.cumsum([len(a) for a in star_mor])]).astype(INDEX)
    star_obj = np.concatenate(star_obj).astype(INDEX)
    star_mor = np.concatenate(star_mor).astype(INDEX)

    # block (σ, ξ) holds the morphisms of U into σ*(ξ)
    block_sigma = np.repeat(np.arange(len(maps), dtype=INDEX), np.diff(star_obj_off))
    block_xi = np.arange(len(star_obj), dtype=INDEX) - star_obj_off[block_sigma]
    block_size = indeg[star_obj]
    block_start = np.concatenate([[0], np.cumsum(block_size)]).astype(INDEX)
    M = int(block_start[-1])
    blk = np.repeat(np.arange(len(star_obj), dtype=INDEX), block_size)
    offs = np.arange(M, dtype=INDEX) - block_start[blk]
    fib = into_list[into_ptr[star_obj[blk]] + offs]          # global fiber morphism
    sig = block_sigma[blk]
    sig_target = np.array([s.target for s in maps], dtype=INDEX)
    src = U.src[fib]
    tgt = np.asarray(obj_off, dtype=INDEX)[sig_target[sig]] + block_xi[blk]

    id_sigma = np.array([map_index[identity_map(m)] for m in range(n + 1)], dtype=INDEX)
    obj_level = np.repeat(np.arange(n + 1, dtype=INDEX), [C.n_objects for C in D.fibers])
    obj_local = np.arange(U.n_objects, dtype=INDEX) - np.asarray(obj_off, dtype=INDEX)[obj_level]
    id_blocks = star_obj_off[id_sigma[obj_level]] + obj_local
    identity = block_start[id_blocks] + pos_into[U.identity]

    def compose_many(G, F):
        sF, sG = sig[F], sig[G]
        s_new = delta.compose_many(sG, sF)
        pulled = star_mor[star_mor_off[sF] + (fib[G] - np.asarray(mor_off, dtype=INDEX)[sig_target[sF]])]
        h = U.compose_many(pulled, fib[F])
        zeta = block_xi[blk[G]]
        return block_start[star_obj_off[s_new] + zeta] + pos_into[h]

    cat = FiniteCategory.from_vectorized(U.n_objects, src, tgt, identity, compose_many)
    mor_level = np.array([s.source for s in maps], dtype=INDEX)[sig]
    return TotalCategory(
        underlying=cat,
        datum=D,
        level_of=obj_level,
        fiber_object_of=obj_local,
        sigma_of=sig,
        fiber_morphism_of=fib - np.asarray(mor_off, dtype=INDEX)[mor_level],
        cartesian_flags=U.iso_mask()[fib],
        object_offsets=list(obj_off[:-1]),
        _block_start=block_start,
        _block_offsets=star_obj_off,
        _pos_into=pos_into,
        _fiber_mor_offsets=list(mor_off[:-1]),
    )


def is_cartesian(T: TotalCategory, e: int) -> bool:
    return bool(T.cartesian_flags[e])


@dataclass(frozen=True, eq=False)
class FiberView:
    category: FiniteCategory
    objects: np.ndarray       # total ids
    morphisms: np.ndarray     # total ids
    to_fiber: Functor         # category -> C_m
    from_fiber: Functor       # C_m -> category


def fiber_of(T: TotalCategory, m: int) -> FiberView:
    """Subcategory over ``m`` with ``σ = id``, with an explicit isomorphism to ``C_m``."""
    T.datum.check_level(m)
    ident = T._map_index()[identity_map(m)]
    mors = np.flatnonzero(T.sigma_of == ident)
    sub, objects, old = T.underlying.subcategory(mors)
    C = T.datum.fibers[m]
    if len(objects) != C.n_objects:
        # isolated objects still carry their identity, so this cannot happen
        raise AssertionError("fiber lost objects")
    to_fiber = Functor(sub, C, T.fiber_object_of[objects], T.fiber_morphism_of[old])
    inv_obj = np.empty(C.n_objects, dtype=INDEX)
    inv_obj[to_fiber.object_map] = np.arange(sub.n_objects, dtype=INDEX)
    inv_mor = np.empty(C.n_morphisms, dtype=INDEX)
    inv_mor[to_fiber.morphism_map] = np.arange(sub.n_morphisms, dtype=INDEX)
    return FiberView(sub, objects, old, to_fiber, Functor(C, sub, inv_obj, inv_mor))


def cartesian_lift(T: TotalCategory, sigma: SimplexMap, xi: int) -> int:
    """The edge ``(σ, id_{σ*ξ}) : (m, σ*ξ) → (n, ξ)``."""
    T.datum.check_level(sigma.target)
    C = T.datum.fibers[sigma.source]
    pulled = int(sigma_star(T.datum, sigma).object_map[xi])
    return T.morphism_index(sigma, xi, int(C.identity[pulled]))


def factor_through_lift(T: TotalCategory, e: int) -> tuple[int, int]:
    """Write ``e = lift ∘ (id, f)``; returns ``(fiber edge, lift)``."""
    sigma, f = T.decomposition(e)
    xi = int(T.fiber_object_of[T.underlying.tgt[e]])
    lift = cartesian_lift(T, sigma, xi)
    fiber_edge = T.morphism_index(identity_map(sigma.source), int(T.datum.fibers[sigma.source].tgt[f]), f)
    return fiber_edge, lift


def to_dot(T: TotalCategory, include_identities: bool = False) -> str:
    """DOT rendering; cartesian edges solid and bold, the others dashed."""
    C = T.underlying
    lines = ["digraph total {", "  rankdir=LR;"]
    for x in range(C.n_objects):
        lines.append(f'  n{x} [label="{T.object_label(x)}"];')
    is_id = C.is_identity_mask()
    for e in range(C.n_morphisms):
        if is_id[e] and not include_identities:
            continue
        sigma, f = T.decomposition(e)
        label = "".join(str(v) for v in sigma.values) + f"/{f}"
        style = "solid,bold" if T.cartesian_flags[e] else "dashed"
        lines.append(f'  n{int(C.src[e])} -> n{int(C.tgt[e])} [label="{label}", style="{style}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
