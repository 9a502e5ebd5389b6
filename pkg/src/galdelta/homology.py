"""Exact integer linear algebra for chain complexes.

Large sparse boundary matrices are reduced by unimodular column operations
(persistence-style: each column is reduced against earlier pivots by its
lowest nonzero row, with a gcd step when a pivot does not divide).  The
number of surviving columns is the rank.  If every pivot is a unit the
cokernel is free; otherwise the non-unit columns are cleared against the unit
pivots and the small remainder goes through a dense Smith normal form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import MatrixBudgetExceeded

DEFAULT_MATRIX_BUDGET = 60_000_000   # stored nonzeros
_COEFF_LIMIT = 1 << 52


@dataclass
class SparseMatrix:
    """Integer matrix in compressed-column form (row indices sorted)."""

    n_rows: int
    n_cols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @classmethod
    def from_triplets(cls, n_rows: int, n_cols: int, rows, cols, vals) -> "SparseMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.int64)
        if len(rows):
            # sum duplicates, drop zeros
            key = cols * max(n_rows, 1) + rows
            order = np.argsort(key, kind="stable")
            key, vals = key[order], vals[order]
            uniq, start = np.unique(key, return_index=True)
            sums = np.add.reduceat(vals, start) if len(vals) else vals
            keep = sums != 0
            uniq, sums = uniq[keep], sums[keep]
            cols, rows = uniq // max(n_rows, 1), uniq % max(n_rows, 1)
            vals = sums
        counts = np.bincount(cols, minlength=n_cols) if n_cols else np.zeros(0, dtype=np.int64)
        indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        return cls(n_rows, n_cols, indptr, rows.astype(np.int64), vals.astype(np.int64))

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        cols = np.repeat(np.arange(self.n_cols, dtype=np.int64), np.diff(self.indptr))
        return self.indices, cols, self.data

    def transpose(self) -> "SparseMatrix":
        r, c, v = self.triplets()
        return SparseMatrix.from_triplets(self.n_cols, self.n_rows, c, r, v)

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.n_cols for _ in range(self.n_rows)]
        for r, c, v in zip(*(a.tolist() for a in self.triplets())):
            out[r][c] += v
        return out

    def matmul_is_zero(self, other: "SparseMatrix") -> bool:
        """Whether ``self @ other`` vanishes (exact, sparse)."""
        if self.n_cols != other.n_rows:
            raise ValueError("shape mismatch")
        r1, c1, v1 = self.triplets()
        # rows of self grouped by column; for each column j of other, combine
        order = np.argsort(c1, kind="stable")
        r1, c1, v1 = r1[order], c1[order], v1[order]
        ptr = np.concatenate([[0], np.cumsum(np.bincount(c1, minlength=self.n_cols))])
        r2, c2, v2 = other.triplets()
        counts = ptr[r2 + 1] - ptr[r2]
        idx = np.repeat(np.arange(len(r2)), counts)
        offs = np.arange(len(idx)) - np.repeat(np.cumsum(counts) - counts, counts)
        pos = ptr[r2[idx]] + offs
        rows = r1[pos]
        cols = c2[idx]
        vals = v1[pos] * v2[idx]
        prod = SparseMatrix.from_triplets(self.n_rows, other.n_cols, rows, cols, vals)
        return prod.nnz == 0


# -----------------------------------------------------------------------------
# dense Smith normal form
# -----------------------------------------------------------------------------

def smith_invariants(rows: list[list[int]], n_cols: int) -> tuple[int, list[int]]:
    """Rank and nonzero invariant factors (each dividing the next)."""
    A = [list(map(int, r)) for r in rows]
    m = len(A)
    n = n_cols
    diag = []
    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = A[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            done = True
            for i in range(t + 1, m):
                q = A[i][t] // p
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                if A[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = A[t][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j]:
                    done = False
            if done:
                # the pivot must divide the whole remaining block
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
                if bad is None:
                    break
                A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
                continue
            # move a smaller remainder into the pivot position
            best = None
            for i in range(t, m):
                if A[i][t] and (best is None or abs(A[i][t]) < best[0]):
                    best = (abs(A[i][t]), "r", i)
            for j in range(t, n):
                if A[t][j] and (best is None or abs(A[t][j]) < best[0]):
                    best = (abs(A[t][j]), "c", j)
            _, kind, k = best
            if kind == "r":
                A[t], A[k] = A[k], A[t]
            else:
                for row in A:
                    row[t], row[k] = row[k], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    return len(diag), diag


# -----------------------------------------------------------------------------
# sparse column reduction
# -----------------------------------------------------------------------------

@numba.njit(cache=True)
def _ext_gcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b != 0:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


@numba.njit(cache=True)
def _combine(ai, av, bi, bv, ca, cb, out_i, out_v):
    """``ca*a + cb*b`` of two sorted sparse vectors into preallocated output."""
    i = j = k = 0
    na, nb = len(ai), len(bi)
    while i < na or j < nb:
        if j >= nb or (i < na and ai[i] < bi[j]):
            r, v = ai[i], ca * av[i]
            i += 1
        elif i >= na or bi[j] < ai[i]:
            r, v = bi[j], cb * bv[j]
            j += 1
        else:
            r, v = ai[i], ca * av[i] + cb * bv[j]
            i += 1
            j += 1
        if v != 0:
            out_i[k] = r
            out_v[k] = v
            k += 1
    return k


@numba.njit(cache=True)
def _reduce_columns(n_rows, indptr, indices, data, skip, budget, limit):
    n_cols = len(indptr) - 1
    pivot_col = np.full(n_rows, -1, np.int64)
    start = np.zeros(n_cols, np.int64)
    length = np.zeros(n_cols, np.int64)
    cap = max(16, len(indices) * 2)
    pool_i = np.empty(cap, np.int64)
    pool_v = np.empty(cap, np.int64)
    used = 0
    status = 0
    for j in range(n_cols):
        if skip[j]:
            continue
        cur_i = indices[indptr[j]:indptr[j + 1]].copy()
        cur_v = data[indptr[j]:indptr[j + 1]].copy()
        while len(cur_i) > 0:
            low = cur_i[-1]
            c = cur_v[-1]
            p = pivot_col[low]
            if p < 0:
                break
            pi = pool_i[start[p]:start[p] + length[p]]
            pv = pool_v[start[p]:start[p] + length[p]]
            d = pv[-1]
            tmp_i = np.empty(len(cur_i) + len(pi), np.int64)
            tmp_v = np.empty(len(cur_i) + len(pi), np.int64)
            if c % d == 0:
                k = _combine(cur_i, cur_v, pi, pv, 1, -(c // d), tmp_i, tmp_v)
                cur_i, cur_v = tmp_i[:k], tmp_v[:k]
            else:
                g, x, y = _ext_gcd(d, c)
                # new pivot column x*pivot + y*cur has leading coefficient g
                k = _combine(pi, pv, cur_i, cur_v, x, y, tmp_i, tmp_v)
                if used + k > cap:
                    while used + k > cap:
                        cap *= 2
                    if cap > budget:
                        return pivot_col, start, length, pool_i, pool_v, 2
                    ni = np.empty(cap, np.int64)
                    nv = np.empty(cap, np.int64)
                    ni[:used] = pool_i[:used]
                    nv[:used] = pool_v[:used]
                    pool_i, pool_v = ni, nv
                pool_i[used:used + k] = tmp_i[:k]
                pool_v[used:used + k] = tmp_v[:k]
                # the rest (c/g)*pivot - (d/g)*cur loses its leading entry
                rest_i = np.empty(len(cur_i) + len(pi), np.int64)
                rest_v = np.empty(len(cur_i) + len(pi), np.int64)
                k2 = _combine(pi, pv, cur_i, cur_v, c // g, -(d // g), rest_i, rest_v)
                start[p] = used
                length[p] = k
                used += k
                cur_i, cur_v = rest_i[:k2], rest_v[:k2]
            for t in range(len(cur_v)):
                if cur_v[t] > limit or cur_v[t] < -limit:
                    return pivot_col, start, length, pool_i, pool_v, 1
        if len(cur_i) == 0:
            continue
        k = len(cur_i)
        if used + k > cap:
            while used + k > cap:
                cap *= 2
            if cap > budget:
                return pivot_col, start, length, pool_i, pool_v, 2
            ni = np.empty(cap, np.int64)
            nv = np.empty(cap, np.int64)
            ni[:used] = pool_i[:used]
            nv[:used] = pool_v[:used]
            pool_i, pool_v = ni, nv
        pool_i[used:used + k] = cur_i
        pool_v[used:used + k] = cur_v
        start[j] = used
        length[j] = k
        used += k
        pivot_col[cur_i[-1]] = j
    return pivot_col, start, length, pool_i, pool_v, status


@dataclass
class Reduction:
    rank: int
    invariant_factors: list          # non-unit invariant factors (> 1)
    pivot_rows: np.ndarray           # rows that carry a unit pivot
    unit_pivot_rows: np.ndarray = field(repr=False, default=None)


def _dict_col(pool_i, pool_v, s, n) -> dict:
    return dict(zip(pool_i[s:s + n].tolist(), pool_v[s:s + n].tolist()))


def reduce_matrix(A: SparseMatrix, skip: np.ndarray | None = None,
                  budget: int = DEFAULT_MATRIX_BUDGET) -> Reduction:
    """Rank and non-unit invariant factors of ``A`` by unimodular column
    operations.  Columns in ``skip`` must be known to be integral
    combinations of the other columns (clearing)."""
    if A.nnz > budget:
        raise MatrixBudgetExceeded(f"matrix has {A.nnz} nonzeros", nnz=A.nnz, budget=budget)
    if skip is None:
        skip = np.zeros(A.n_cols, dtype=np.bool_)
    pivot_col, start, length, pool_i, pool_v, status = _reduce_columns(
        A.n_rows, A.indptr, A.indices, A.data, skip, budget, _COEFF_LIMIT)
    if status == 2:
        raise MatrixBudgetExceeded("reduction fill-in exceeded the budget", budget=budget)
    if status == 1:
        # coefficients too large for machine integers: exact slow path
        return _reduce_python(A, skip)
    rows = np.flatnonzero(pivot_col >= 0)
    cols = pivot_col[rows]
    lead = pool_v[start[cols] + length[cols] - 1]
    unit = np.abs(lead) == 1
    nonunit_cols = cols[~unit]
    factors: list[int] = []
    if len(nonunit_cols):
        unit_rows = rows[unit]
        unit_cols = cols[unit]
        factors = _torsion_block(
            {int(r): _dict_col(pool_i, pool_v, int(start[c]), int(length[c])) for r, c in zip(unit_rows, unit_cols)},
            [_dict_col(pool_i, pool_v, int(start[c]), int(length[c])) for c in nonunit_cols])
    return Reduction(len(rows), factors, rows, rows[unit])


def _torsion_block(unit_pivots: dict, others: list[dict]) -> list[int]:
    """Invariant factors > 1 of [units | others] where ``unit_pivots`` maps a
    pivot row to a column whose lowest entry there is ±1."""
    cleared = []
    for col in others:
        col = dict(col)
        while True:
            hits = [r for r in col if r in unit_pivots]
            if not hits:
                break
            r = max(hits)
            u = unit_pivots[r]
            q = col[r] * u[r]          # u[r] = ±1
            for rr, v in u.items():
                nv = col.get(rr, 0) - q * v
                if nv:
                    col[rr] = nv
                else:
                    col.pop(rr, None)
        cleared.append(col)
    support = sorted({r for col in cleared for r in col})
    index = {r: i for i, r in enumerate(support)}
    dense = [[0] * len(cleared) for _ in support]
    for j, col in enumerate(cleared):
        for r, v in col.items():
            dense[index[r]][j] = v
    _, diag = smith_invariants(dense, len(cleared))
    return [d for d in diag if d > 1]


def _reduce_python(A: SparseMatrix, skip) -> Reduction:
    pivots: dict[int, dict] = {}
    for j in range(A.n_cols):
        if skip[j]:
            continue
        s, e = A.indptr[j], A.indptr[j + 1]
        col = dict(zip(A.indices[s:e].tolist(), A.data[s:e].tolist()))
        while col:
            low = max(col)
            if low not in pivots:
                pivots[low] = col
                break
            p = pivots[low]
            c, d = col[low], p[low]
            if c % d == 0:
                q = c // d
                for r, v in p.items():
                    nv = col.get(r, 0) - q * v
                    if nv:
                        col[r] = nv
                    else:
                        col.pop(r, None)
            else:
                g, x, y = _py_ext_gcd(d, c)
                newp = {r: x * p.get(r, 0) + y * col.get(r, 0) for r in set(p) | set(col)}
                rest = {r: (c // g) * p.get(r, 0) - (d // g) * col.get(r, 0) for r in set(p) | set(col)}
                pivots[low] = {r: v for r, v in newp.items() if v}
                col = {r: v for r, v in rest.items() if v}
    rows = np.array(sorted(pivots), dtype=np.int64)
    units = {r: c for r, c in pivots.items() if abs(c[r]) == 1}
    others = [c for r, c in pivots.items() if abs(c[r]) != 1]
    factors = _torsion_block(units, others) if others else []
    unit_rows = np.array(sorted(units), dtype=np.int64)
    return Reduction(len(rows), factors, rows, unit_rows)


def _py_ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


# -----------------------------------------------------------------------------
# chain complexes
# -----------------------------------------------------------------------------

@dataclass
class HomologyGroup:
    rank: int
    torsion: tuple = ()

    def __str__(self):
        parts = ([] if not self.rank else ["Z" if self.rank == 1 else f"Z^{self.rank}"])
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"

    def to_document(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion)}


@dataclass
class HomologyResult:
    groups: list

    def __getitem__(self, d: int) -> HomologyGroup:
        return self.groups[d]

    def __len__(self):
        return len(self.groups)

    def __eq__(self, other):
        if not isinstance(other, HomologyResult):
            return NotImplemented
        return [(g.rank, tuple(g.torsion)) for g in self.groups] == [(g.rank, tuple(g.torsion)) for g in other.groups]

    def to_document(self) -> list:
        return [g.to_document() for g in self.groups]

    def __str__(self):
        return ", ".join(f"H{d}={g}" for d, g in enumerate(self.groups))


@dataclass
class ChainComplex:
    """``dims[d]`` generators in degree ``d``; ``boundaries[d]`` is
    ``∂_d : C_d → C_{d-1}`` for ``d >= 1`` (``boundaries[0]`` unused)."""

    dims: list
    boundaries: list

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def check_square_zero(self) -> bool:
        return all(self.boundaries[d - 1].matmul_is_zero(self.boundaries[d]) for d in range(2, self.top + 1))

    def homology(self, max_degree: int, budget: int = DEFAULT_MATRIX_BUDGET) -> HomologyResult:
        """Homology in degrees ``0..max_degree``; needs ``top > max_degree``
        unless the complex stops earlier."""
        ranks = [0] * (self.top + 2)
        torsion: list = [[] for _ in range(self.top + 2)]
        # cohomology direction with clearing: reduce ∂_d^T for increasing d
        cleared = None
        upto = min(max_degree + 1, self.top)
        for d in range(1, upto + 1):
            At = self.boundaries[d].transpose()     # columns indexed by (d-1)-simplices
            skip = np.zeros(At.n_cols, dtype=np.bool_)
            if cleared is not None:
                skip[cleared] = True
            red = reduce_matrix(At, skip, budget)
            ranks[d] = red.rank
            torsion[d] = red.invariant_factors
            cleared = red.unit_pivot_rows            # d-simplices hit by a unit pivot
        out = []
        for d in range(max_degree + 1):
            if d > self.top:
                out.append(HomologyGroup(0, ()))
                continue
            free = self.dims[d] - ranks[d] - ranks[d + 1]
            out.append(HomologyGroup(int(free), tuple(sorted(torsion[d + 1]))))
        return HomologyResult(out)
