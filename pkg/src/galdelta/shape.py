"""Homotopy invariants of finite categories and of simplicial data.

The nerve route works on the normalized nerve of a category (chains of
composable non-identity morphisms).  The diagram route computes the homotopy
colimit of the fiber nerves over the truncated simplex category through the
simplicial-replacement double complex, without forming the total category.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LevelOutOfRange, MatrixBudgetExceeded
from .fincat import INDEX, FiniteCategory
from .groupoid import GroupoidComponent, fundamental_groupoid
from .homology import DEFAULT_MATRIX_BUDGET, ChainComplex, HomologyResult, SparseMatrix
from .simplex import SimplicialGaloisDatum, all_maps, sigma_star, simplex_category
from .total import build_total

_KEY_LIMIT = 1 << 62


# -----------------------------------------------------------------------------
# nerve
# -----------------------------------------------------------------------------

@dataclass(eq=False)
class TruncatedSimplicialSet:
    """Normalized nerve of ``category`` up to dimension ``cap``.

    ``simplices[0]`` lists the objects; ``simplices[d]`` for ``d >= 1`` is an
    ``(N, d)`` array of chains ``(f_1, .., f_d)`` in path order
    (``tgt f_i = src f_{i+1}``), sorted lexicographically.
    """

    category: FiniteCategory
    cap: int
    simplices: list
    _keys: list = field(default_factory=list, repr=False)

    def counts(self) -> list[int]:
        return [len(s) for s in self.simplices]

    def index_of(self, d: int, chains: np.ndarray) -> np.ndarray:
        """Indices of ``d``-chains (which must be present)."""
        if d == 0:
            return np.asarray(chains, dtype=INDEX).reshape(-1)
        keys = _encode(chains, self.category.n_morphisms)
        return np.searchsorted(self._keys[d], keys)

    def faces(self, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Triplets ``(row, column, sign)`` of ``∂_d`` on normalized chains."""
        C = self.category
        S = self.simplices[d]
        cols = np.arange(len(S), dtype=INDEX)
        if d == 1:
            f = S[:, 0]
            return (np.concatenate([C.tgt[f], C.src[f]]), np.concatenate([cols, cols]),
                    np.concatenate([np.ones(len(f), INDEX), -np.ones(len(f), INDEX)]))
        rows, cs, signs = [], [], []
        is_id = C.is_identity_mask()
        for i in range(d + 1):
            sign = 1 if i % 2 == 0 else -1
            if i == 0:
                face, keep = S[:, 1:], np.ones(len(S), dtype=bool)
            elif i == d:
                face, keep = S[:, :-1], np.ones(len(S), dtype=bool)
            else:
                comp = C.compose_many(S[:, i], S[:, i - 1])
                keep = ~is_id[comp]
                face = np.concatenate([S[:, :i - 1], comp[:, None], S[:, i + 1:]], axis=1)[keep]
            rows.append(self.index_of(d - 1, face))
            cs.append(cols[keep])
            signs.append(np.full(int(keep.sum()), sign, dtype=INDEX))
        return np.concatenate(rows), np.concatenate(cs), np.concatenate(signs)

    def chain_complex(self) -> ChainComplex:
        dims = self.counts()
        bds = [None]
        for d in range(1, self.cap + 1):
            r, c, v = self.faces(d)
            bds.append(SparseMatrix.from_triplets(dims[d - 1], dims[d], r, c, v))
        return ChainComplex(dims, bds)


def _encode(chains: np.ndarray, radix: int) -> np.ndarray:
    chains = np.asarray(chains, dtype=INDEX)
    if chains.ndim == 1:
        chains = chains[:, None]
    key = np.zeros(len(chains), dtype=INDEX)
    for j in range(chains.shape[1]):
        key = key * radix + chains[:, j]
    return key


def _chain_extensions(C: FiniteCategory, S: np.ndarray, nonid_by_src) -> np.ndarray:
    out_ptr, out_list = nonid_by_src
    last = S[:, -1]
    t = C.tgt[last]
    counts = out_ptr[t + 1] - out_ptr[t]
    parent = np.repeat(np.arange(len(S), dtype=INDEX), counts)
    offs = np.arange(len(parent), dtype=INDEX) - np.repeat(np.cumsum(counts) - counts, counts)
    ext = out_list[out_ptr[t[parent]] + offs]
    return np.concatenate([S[parent], ext[:, None]], axis=1)


def nerve(C: FiniteCategory, cap: int, budget: int = DEFAULT_MATRIX_BUDGET) -> TruncatedSimplicialSet:
    nonid = np.flatnonzero(~C.is_identity_mask()).astype(INDEX)
    order = np.argsort(C.src[nonid], kind="stable")
    out_list = nonid[order]
    out_ptr = np.concatenate([[0], np.cumsum(np.bincount(C.src[nonid], minlength=C.n_objects))]).astype(INDEX)
    simplices = [np.arange(C.n_objects, dtype=INDEX)]
    keys = [simplices[0]]
    M = max(C.n_morphisms, 1)
    if cap >= 1:
        S = nonid[:, None]
        for d in range(1, cap + 1):
            if d > 1:
                # count before materializing
                t = C.tgt[S[:, -1]]
                total = int((out_ptr[t + 1] - out_ptr[t]).sum())
                if total * d > budget:
                    raise MatrixBudgetExceeded(f"nerve has {total} simplices in dimension {d}",
                                               dimension=d, simplices=total, budget=budget)
                S = _chain_extensions(C, S, (out_ptr, out_list))
            if float(M) ** d >= _KEY_LIMIT:
                raise MatrixBudgetExceeded("chain keys overflow machine integers", dimension=d)
            simplices.append(S)
            keys.append(_encode(S, M))
    return TruncatedSimplicialSet(C, cap, simplices, keys)


def homology(C: FiniteCategory, max_degree: int, budget: int = DEFAULT_MATRIX_BUDGET) -> HomologyResult:
    """Integral homology of the nerve in degrees ``0..max_degree``."""
    N = nerve(C, max_degree + 1, budget)
    return N.chain_complex().homology(max_degree, budget)


# -----------------------------------------------------------------------------
# homotopy colimit
# -----------------------------------------------------------------------------

def hocolim_complex(D: SimplicialGaloisDatum, top: int, budget: int = DEFAULT_MATRIX_BUDGET) -> ChainComplex:
    """Total complex of the simplicial replacement of ``m ↦ N(C_m)`` up to
    total degree ``top``.

    A generator in bidegree ``(p, q)`` is a chain ``a_0 ← a_1 ← … ← a_p`` of
    non-identity maps of the truncated simplex category together with a
    ``q``-simplex of the normalized nerve of ``C_{a_0}``.  The face ``d_0``
    forgets ``σ_1 : a_1 → a_0`` and pulls the simplex back along it; inner
    faces compose; ``d_p`` forgets ``σ_p``.  The differential is
    ``∂_h + (-1)^p ∂_v``.
    """
    n = D.truncation
    delta = simplex_category(n)
    maps = all_maps(n)
    # Δ-chains in path order b_0 → … → b_p; σ_i is the (p+1-i)-th map and a_0 = b_p
    base = nerve(delta, top, budget)
    fib = [nerve(C, top, budget) for C in D.fibers]
    is_id_delta = delta.is_identity_mask()
    star = [sigma_star(D, s) for s in maps]

    def a0(p, chains):
        if p == 0:
            return chains
        return delta.tgt[chains[:, -1]]

    # generators of total degree d: blocks (p, q) with p + q = d, ordered by p,
    # then by chain, then by fiber simplex
    offsets: dict = {}
    dims = []
    for d in range(top + 1):
        pos = 0
        for p in range(d + 1):
            q = d - p
            chains = base.simplices[p]
            lv = a0(p, chains)
            sizes = np.array([len(fib[m].simplices[q]) for m in range(n + 1)], dtype=INDEX)[lv]
            starts = np.concatenate([[0], np.cumsum(sizes)]).astype(INDEX)
            offsets[(p, q)] = (pos, starts[:-1], sizes)
            pos += int(starts[-1])
        dims.append(pos)
        if pos > budget:
            raise MatrixBudgetExceeded(f"total complex has {pos} generators in degree {d}", degree=d, budget=budget)

    def expand(p, q):
        """All generators of bidegree (p, q): (chain index, level, fiber simplex index)."""
        _, starts, sizes = offsets[(p, q)]
        ci = np.repeat(np.arange(len(sizes), dtype=INDEX), sizes)
        xi = np.arange(int(sizes.sum()), dtype=INDEX) - np.repeat(starts, sizes)
        return ci, xi

    def gid(p, q, ci, xi):
        return offsets[(p, q)][0] + offsets[(p, q)][1][ci] + xi

    boundaries = [None]
    for d in range(1, top + 1):
        rows, cols, vals = [], [], []
        for p in range(d + 1):
            q = d - p
            ci, xi = expand(p, q)
            if len(ci) == 0:
                continue
            chains = base.simplices[p]
            col_ids = gid(p, q, ci, xi)
            lv = a0(p, chains)[ci]
            # vertical part
            if q >= 1:
                vsign = 1 if p % 2 == 0 else -1
                for m in range(n + 1):
                    sel = lv == m
                    if not sel.any():
                        continue
                    r, c, v = fib[m].faces(q)
                    # column c of the fiber boundary -> all generators with that fiber simplex
                    order = np.argsort(c, kind="stable")
                    r, c, v = r[order], c[order], v[order]
                    ptr = np.concatenate([[0], np.cumsum(np.bincount(c, minlength=len(fib[m].simplices[q])))])
                    g_ci, g_xi, g_col = ci[sel], xi[sel], col_ids[sel]
                    cnt = ptr[g_xi + 1] - ptr[g_xi]
                    rep = np.repeat(np.arange(len(g_xi)), cnt)
                    off = np.arange(len(rep)) - np.repeat(np.cumsum(cnt) - cnt, cnt)
                    e = ptr[g_xi[rep]] + off
                    rows.append(gid(p, q - 1, g_ci[rep], r[e]))
                    cols.append(g_col[rep])
                    vals.append(vsign * v[e])
            # horizontal part
            if p >= 1:
                path = chains[ci]                 # (N, p) in path order
                for i in range(p + 1):
                    hsign = 1 if i % 2 == 0 else -1
                    if i == 0:
                        # drop σ_1 (last in path order) and pull the simplex back along it
                        sig = path[:, -1]
                        new_path = path[:, :-1]
                        new_x, keep = _pull_back(fib, star, maps, sig, xi, q)
                    elif i == p:
                        new_path = path[:, 1:]
                        new_x, keep = xi, np.ones(len(ci), dtype=bool)
                    else:
                        # σ_i∘σ_{i+1}: path positions p-i and p-i-1
                        j = p - i
                        comp = delta.compose_many(path[:, j], path[:, j - 1])
                        keep = ~is_id_delta[comp]
                        new_path = np.concatenate([path[:, :j - 1], comp[:, None], path[:, j + 1:]], axis=1)
                        new_x = xi
                    if p == 1:
                        # the remaining chain is a single level
                        new_ci = (delta.src if i == 0 else delta.tgt)[path[:, 0]][keep]
                    else:
                        new_ci = base.index_of(p - 1, new_path[keep])
                    rows.append(gid(p - 1, q, new_ci, new_x[keep]))
                    cols.append(col_ids[keep])
                    vals.append(np.full(int(keep.sum()), hsign, dtype=INDEX))
        r = np.concatenate(rows) if rows else np.zeros(0, INDEX)
        c = np.concatenate(cols) if cols else np.zeros(0, INDEX)
        v = np.concatenate(vals) if vals else np.zeros(0, INDEX)
        boundaries.append(SparseMatrix.from_triplets(dims[d - 1], dims[d], r, c, v))
    return ChainComplex(dims, boundaries)


def _pull_back(fib, star, maps, sig, xi, q):
    """Pull fiber ``q``-simplices (index ``xi`` at the target level of each
    map in ``sig``) back along those maps; returns indices at the source
    levels and a mask of the simplices that stay nondegenerate."""
    new_x = np.zeros(len(sig), dtype=INDEX)
    keep = np.ones(len(sig), dtype=bool)
    for s in np.unique(sig).tolist():
        sel = np.flatnonzero(sig == s)
        sigma, F = maps[s], star[s]          # F : C_target -> C_source
        S = fib[sigma.target].simplices[q][xi[sel]]
        if q == 0:
            new_x[sel] = F.object_map[S]
            continue
        img = F.morphism_map[S]
        ok = ~F.target.is_identity_mask()[img].any(axis=1)
        keep[sel] = ok
        new_x[sel[ok]] = fib[sigma.source].index_of(q, img[ok])
    return new_x, keep


def hocolim_homology(D: SimplicialGaloisDatum, max_degree: int,
                     budget: int = DEFAULT_MATRIX_BUDGET) -> HomologyResult:
    return hocolim_complex(D, max_degree + 1, budget).homology(max_degree, budget)


# -----------------------------------------------------------------------------
# fundamental group and reports
# -----------------------------------------------------------------------------

def pi1_presentation(C: FiniteCategory, basepoint: int) -> GroupoidComponent:
    """Spanning-tree presentation of the fundamental group of the nerve at
    ``basepoint``: generators are the non-tree 1-simplices, relators the
    2-simplices."""
    if not 0 <= basepoint < C.n_objects:
        raise LevelOutOfRange(f"basepoint {basepoint} is not an object", basepoint=basepoint)
    P = fundamental_groupoid(C, basepoints=(basepoint,))
    return P.components[int(P.component_of[basepoint])]


@dataclass
class ShapeReport:
    components: int
    groups: list                  # per component: dict with representative, order, abelianization
    nerve_homology: HomologyResult
    hocolim_homology: HomologyResult
    max_degree: int

    @property
    def routes_agree(self) -> bool:
        return self.nerve_homology == self.hocolim_homology

    @property
    def contractible(self) -> bool:
        h = self.nerve_homology
        return (self.components == 1 and all(g["order"] == 1 for g in self.groups)
                and h[0].rank == 1 and not h[0].torsion
                and all(g.rank == 0 and not g.torsion for g in h.groups[1:]))

    @property
    def verdict(self) -> str:
        if not self.routes_agree:
            return "routes-disagree"
        return "contractible" if self.contractible else "routes-agree"

    def to_document(self) -> dict:
        return {
            "components": self.components,
            "fundamental_groups": self.groups,
            "homology": {"nerve": self.nerve_homology.to_document(),
                         "hocolim": self.hocolim_homology.to_document()},
            "max_degree": self.max_degree,
            "routes_agree": self.routes_agree,
            "verdict": self.verdict,
        }


def shape_report(D: SimplicialGaloisDatum, max_degree: int = 2,
                 budget: int = DEFAULT_MATRIX_BUDGET) -> ShapeReport:
    T = build_total(D)
    C = T.underlying
    P = fundamental_groupoid(C)
    groups = []
    for comp in P.components:
        free, torsion = comp.abelianization()
        groups.append({
            "representative": T.object_label(comp.representative),
            "order": comp.order,
            "abelianization": {"rank": free, "torsion": torsion},
        })
    return ShapeReport(
        components=len(P.components),
        groups=groups,
        nerve_homology=homology(C, max_degree, budget),
        hocolim_homology=hocolim_homology(D, max_degree, budget),
        max_degree=max_degree,
    )
