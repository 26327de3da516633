"""Exact homological algebra over the integers for graded complexes.

Everything here is finitely generated and free as a module; gradings
are integers (or exact rationals after a global shift), boundary maps
drop the grading by exactly 1, and the optional U-endomorphism drops
it by 2.  Homology is computed degree by degree through an integer
Smith normal form, which keeps every result exact: free ranks, torsion
invariant factors, and chosen cycle representatives that let chain
maps act on homology.

The Smith normal form is a sparse gcd-pivot elimination.  Pivots are
chosen with the smallest nonzero magnitude (entries of magnitude one
are taken immediately), and the row/column operations are mirrored
into the unimodular transforms that each caller asks for:

    L * M * R == D

with D diagonal and d_1 | d_2 | ... .  Only the transforms actually
needed are tracked; kernel computations want R and R^{-1}, the
quotient structure wants L and L^{-1}.

Setting SELF_CHECK = True (the test suite does this) re-multiplies
L * M * R on every call and compares against D exactly, and checks
|det| = 1 on small transforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

from .errors import NotStabilizedError, TorsionInTowerError

SELF_CHECK = False


# ---------------------------------------------------------------------------
# sparse helpers


def _dict_axpy(dst, src, k):
    # dst += k * src, dropping zeros
    if not k:
        return
    for key, v in src.items():
        nv = dst.get(key, 0) + k * v
        if nv:
            dst[key] = nv
        elif key in dst:
            del dst[key]


def _compose(outer, inner):
    """Column-sparse composition: (outer . inner) as columns."""
    out = []
    for col in inner:
        acc = {}
        for mid, c in col.items():
            for row, v in outer[mid].items():
                nv = acc.get(row, 0) + c * v
                if nv:
                    acc[row] = nv
                elif row in acc:
                    del acc[row]
        out.append(acc)
    return out


def _det(m):
    """Exact determinant of a small dense integer matrix (Bareiss)."""
    a = [row[:] for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k]:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1]


# ---------------------------------------------------------------------------
# Smith normal form


class _SnfWork:
    """Sparse SNF elimination with optional transform tracking.

    The matrix lives as a list of row dicts plus a per-column index of
    nonzero rows; both are kept in sync by the elementary operations.
    """

    def __init__(self, rows, nrows, ncols, track_l=False, track_linv=False,
                 track_r=False, track_rinv=False):
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows
        self.colnz = [set() for _ in range(ncols)]
        for r, row in enumerate(rows):
            for c in row:
                self.colnz[c].add(r)
        self.l_rows = [{i: 1} for i in range(nrows)] if track_l else None
        self.linv_cols = [{i: 1} for i in range(nrows)] if track_linv else None
        self.r_cols = [{i: 1} for i in range(ncols)] if track_r else None
        self.q_rows = [{i: 1} for i in range(ncols)] if track_rinv else None
        self.rank = 0
        self.diag = []

    # -- elementary operations ------------------------------------------

    def _row_axpy(self, r, p, k):
        # row_r += k * row_p
        rows, colnz = self.rows, self.colnz
        rowr = rows[r]
        for c, v in rows[p].items():
            nv = rowr.get(c, 0) + k * v
            if nv:
                if c not in rowr:
                    colnz[c].add(r)
                rowr[c] = nv
            elif c in rowr:
                del rowr[c]
                colnz[c].discard(r)
        if self.l_rows is not None:
            _dict_axpy(self.l_rows[r], self.l_rows[p], k)
        if self.linv_cols is not None:
            # L <- E L  =>  Linv <- Linv E^{-1}: col_p -= k * col_r
            _dict_axpy(self.linv_cols[p], self.linv_cols[r], -k)

    def _col_axpy(self, j, i, k):
        # col_j += k * col_i
        rows, colnz = self.rows, self.colnz
        for r in list(colnz[i]):
            row = rows[r]
            nv = row.get(j, 0) + k * row[i]
            if nv:
                if j not in row:
                    colnz[j].add(r)
                row[j] = nv
            elif j in row:
                del row[j]
                colnz[j].discard(r)
        if self.r_cols is not None:
            _dict_axpy(self.r_cols[j], self.r_cols[i], k)
        if self.q_rows is not None:
            # R <- R E  =>  Rinv <- E^{-1} Rinv: row_i -= k * row_j
            _dict_axpy(self.q_rows[i], self.q_rows[j], -k)

    def _row_swap(self, r, p):
        if r == p:
            return
        rows, colnz = self.rows, self.colnz
        union = set(rows[r]) | set(rows[p])
        rows[r], rows[p] = rows[p], rows[r]
        for c in union:
            if c in rows[r]:
                colnz[c].add(r)
            else:
                colnz[c].discard(r)
            if c in rows[p]:
                colnz[c].add(p)
            else:
                colnz[c].discard(p)
        if self.l_rows is not None:
            self.l_rows[r], self.l_rows[p] = self.l_rows[p], self.l_rows[r]
        if self.linv_cols is not None:
            self.linv_cols[r], self.linv_cols[p] = (
                self.linv_cols[p], self.linv_cols[r])

    def _col_swap(self, i, j):
        if i == j:
            return
        rows, colnz = self.rows, self.colnz
        for r in colnz[i] | colnz[j]:
            row = rows[r]
            vi = row.pop(i, None)
            vj = row.pop(j, None)
            if vj is not None:
                row[i] = vj
            if vi is not None:
                row[j] = vi
        colnz[i], colnz[j] = colnz[j], colnz[i]
        if self.r_cols is not None:
            self.r_cols[i], self.r_cols[j] = self.r_cols[j], self.r_cols[i]
        if self.q_rows is not None:
            self.q_rows[i], self.q_rows[j] = self.q_rows[j], self.q_rows[i]

    def _row_negate(self, r):
        row = self.rows[r]
        for c in row:
            row[c] = -row[c]
        if self.l_rows is not None:
            lr = self.l_rows[r]
            for c in lr:
                lr[c] = -lr[c]
        if self.linv_cols is not None:
            lc = self.linv_cols[r]
            for c in lc:
                lc[c] = -lc[c]

    # -- elimination ------------------------------------------------------

    def _pick_pivot(self, t):
        best = None
        best_val = None
        for c in range(t, self.ncols):
            for r in self.colnz[c]:
                if r < t:
                    continue
                v = self.rows[r][c]
                v = -v if v < 0 else v
                if v == 1:
                    return r, c
                if best_val is None or v < best_val:
                    best_val = v
                    best = (r, c)
        return best

    def _reduce_slot(self, t):
        rows, colnz = self.rows, self.colnz
        while True:
            if rows[t].get(t, 0) < 0:
                self._row_negate(t)
            p = rows[t][t]
            swapped = False
            for r in [r for r in colnz[t] if r != t]:
                v = rows[r].get(t)
                if not v:
                    continue
                k = v // p
                if k:
                    self._row_axpy(r, t, -k)
                if rows[t].get(t, 0) < 0:  # defensive; p stays positive
                    self._row_negate(t)
                if rows[r].get(t):
                    self._row_swap(t, r)
                    swapped = True
                    break
            if swapped:
                continue
            p = rows[t][t]
            for c in [c for c in rows[t] if c != t]:
                v = rows[t][c]
                k = v // p
                if k:
                    self._col_axpy(c, t, -k)
                if rows[t].get(c):
                    self._col_swap(t, c)
                    swapped = True
                    break
            if swapped:
                continue
            if all(r == t for r in colnz[t]) and all(c == t for c in rows[t]):
                return

    def run(self):
        t = 0
        limit = min(self.nrows, self.ncols)
        while t < limit:
            piv = self._pick_pivot(t)
            if piv is None:
                break
            self._row_swap(t, piv[0])
            self._col_swap(t, piv[1])
            self._reduce_slot(t)
            t += 1
        self.rank = t
        # enforce the divisibility chain d_i | d_{i+1}
        i = 0
        while i + 1 < self.rank:
            a = self.rows[i][i]
            if self.rows[i + 1][i + 1] % a:
                self._row_axpy(i, i + 1, 1)
                self._reduce_slot(i)
                if i:
                    i -= 1
            else:
                i += 1
        for k in range(self.rank):
            if self.rows[k][k] < 0:
                self._row_negate(k)
        self.diag = [self.rows[k][k] for k in range(self.rank)]
        return self


def _snf(entries_rows, nrows, ncols, **track):
    if SELF_CHECK:
        # keep a pristine copy and force full tracking for verification
        original = [dict(row) for row in entries_rows]
        work = _SnfWork(entries_rows, nrows, ncols,
                        track_l=True, track_linv=track.get("track_linv", False),
                        track_r=True, track_rinv=track.get("track_rinv", False))
        work.run()
        _verify_snf(work, original)
        return work
    return _SnfWork(entries_rows, nrows, ncols, **track).run()


def _verify_snf(work, original):
    # L * M * R == D, entry by entry
    lm = []
    for r in range(work.nrows):
        acc = {}
        for c, coeff in work.l_rows[r].items():
            _dict_axpy(acc, original[c], coeff)
        lm.append(acc)
    for j in range(work.ncols):
        col = work.r_cols[j]
        for r in range(work.nrows):
            s = 0
            row = lm[r]
            for c, v in col.items():
                s += row.get(c, 0) * v
            expect = work.rows[r].get(j, 0)
            if s != expect:
                raise AssertionError("smith normal form self-check failed")
    if work.nrows <= 16:
        dense = [[work.l_rows[r].get(c, 0) for c in range(work.nrows)]
                 for r in range(work.nrows)]
        if abs(_det(dense)) != 1:
            raise AssertionError("row transform is not unimodular")
    if work.ncols <= 16:
        dense = [[work.r_cols[c].get(r, 0) for c in range(work.ncols)]
                 for r in range(work.ncols)]
        if abs(_det(dense)) != 1:
            raise AssertionError("column transform is not unimodular")


def smith_normal_form(matrix):
    """Smith normal form of a dense integer matrix (list of rows).

    Returns (L, D, R) as dense lists of rows with L*matrix*R == D,
    D diagonal with nonnegative entries satisfying d_1 | d_2 | ...,
    and L, R unimodular.
    """
    nrows = len(matrix)
    ncols = len(matrix[0]) if nrows else 0
    for row in matrix:
        if len(row) != ncols:
            raise ValueError("matrix rows have unequal lengths")
    rows = [{c: int(v) for c, v in enumerate(row) if v} for row in matrix]
    work = _SnfWork(rows, nrows, ncols, track_l=True, track_r=True)
    work.run()
    if SELF_CHECK:
        _verify_snf(work, [{c: int(v) for c, v in enumerate(row) if v}
                           for row in matrix])
    l_dense = [[work.l_rows[r].get(c, 0) for c in range(nrows)]
               for r in range(nrows)]
    d_dense = [[work.rows[r].get(c, 0) for c in range(ncols)]
               for r in range(nrows)]
    r_dense = [[work.r_cols[c].get(r, 0) for c in range(ncols)]
               for r in range(ncols)]
    return l_dense, d_dense, r_dense


def integer_rank(columns):
    """Rank of a column-sparse integer matrix (= rank over Q)."""
    rows = {}
    maxrow = -1
    cols = list(columns)
    for j, col in enumerate(cols):
        for r, v in col.items():
            rows.setdefault(r, {})[j] = v
            if r > maxrow:
                maxrow = r
    dense_rows = [rows.get(r, {}) for r in range(maxrow + 1)]
    work = _SnfWork(dense_rows, maxrow + 1, len(cols))
    work.run()
    return work.rank


# ---------------------------------------------------------------------------
# graded complexes


class GradedComplex:
    """A finite chain complex of free Z-modules with exact degrees.

    boundary and u_action are column-sparse: entry ``boundary[j][i]``
    is the coefficient of basis element i in the boundary of basis
    element j.  The boundary drops the degree by 1; u_action (when
    present) drops it by 2 and commutes with the boundary.
    """

    def __init__(self, degrees, boundary, u_action=None, labels=None,
                 check=True):
        self.n = len(degrees)
        self.degrees = list(degrees)
        self.boundary = boundary
        self.u_action = u_action
        self.labels = labels
        by_degree = {}
        for idx, d in enumerate(self.degrees):
            by_degree.setdefault(d, []).append(idx)
        self.by_degree = by_degree
        if check:
            self._check()

    def _check(self):
        deg = self.degrees
        for j, col in enumerate(self.boundary):
            for i, v in col.items():
                if v == 0:
                    raise ValueError("explicit zero stored in boundary")
                if deg[i] != deg[j] - 1:
                    raise ValueError(
                        f"boundary entry {j}->{i} does not drop degree by 1")
        for col in _compose(self.boundary, self.boundary):
            if col:
                raise ValueError("boundary does not square to zero")
        if self.u_action is not None:
            for j, col in enumerate(self.u_action):
                for i, v in col.items():
                    if deg[i] != deg[j] - 2:
                        raise ValueError(
                            f"U entry {j}->{i} does not drop degree by 2")
            ud = _compose(self.u_action, self.boundary)
            du = _compose(self.boundary, self.u_action)
            if ud != du:
                raise ValueError("U does not commute with the boundary")

    def degree_support(self):
        return sorted(self.by_degree)


class _DegreeHomology:
    """Homology of a graded complex in a single degree, with enough of
    the Smith data retained to convert cycles to homology coordinates
    and to produce cycle representatives."""

    __slots__ = ("ids", "pos", "z", "d_rank", "kernel_cols", "q_rows",
                 "y_l_rows", "y_linv_cols", "y_diag", "y_rank",
                 "kept", "factors")

    def __init__(self, ids, pos, z, d_rank, kernel_cols, q_rows,
                 y_l_rows, y_linv_cols, y_diag, y_rank):
        self.ids = ids
        self.pos = pos
        self.z = z
        self.d_rank = d_rank
        self.kernel_cols = kernel_cols
        self.q_rows = q_rows
        self.y_l_rows = y_l_rows
        self.y_linv_cols = y_linv_cols
        self.y_diag = y_diag
        self.y_rank = y_rank
        kept = []
        factors = []
        for s in range(z):
            fac = y_diag[s] if s < y_rank else 0
            if fac != 1:
                kept.append(s)
                factors.append(fac)
        self.kept = kept
        self.factors = factors

    def kernel_coords(self, local_vec):
        # rows `d_rank..z-1` of Rinv applied to a cycle give its
        # coordinates in the kernel basis
        out = [0] * self.z
        for s in range(self.z):
            qrow = self.q_rows[self.d_rank + s]
            acc = 0
            for c, v in local_vec.items():
                coeff = qrow.get(c)
                if coeff:
                    acc += coeff * v
            out[s] = acc
        return out

    def coords(self, local_vec):
        """Homology coordinates (aligned with `kept`) of a cycle."""
        w = self.kernel_coords(local_vec)
        out = []
        for s, fac in zip(self.kept, self.factors):
            acc = 0
            for c, v in self.y_l_rows[s].items():
                acc += v * w[c]
            if fac:
                acc %= fac
            out.append(acc)
        return out

    def rep_local(self, slot_index):
        """A cycle (local sparse vector) representing generator
        `slot_index` of the homology in this degree."""
        s = self.kept[slot_index]
        kcoords = self.y_linv_cols[s]
        vec = {}
        for kslot, coeff in kcoords.items():
            _dict_axpy(vec, self.kernel_cols[kslot], coeff)
        return vec

    @property
    def free_rank(self):
        return sum(1 for f in self.factors if f == 0)

    @property
    def torsion(self):
        return tuple(sorted(f for f in self.factors if f > 1))


class GradedGroup:
    """Degreewise homology of a GradedComplex, with induced U-maps."""

    def __init__(self, complex_, data, ceiling=None):
        self.complex = complex_
        self._data = data
        self.ceiling = ceiling
        self._u_cache = {}

    def degree_data(self, d):
        return self._data.get(d)

    def support(self, max_degree=None):
        out = [d for d, dh in self._data.items() if dh.kept]
        if max_degree is not None:
            out = [d for d in out if d <= max_degree]
        return sorted(out)

    def free_rank(self, d):
        dh = self._data.get(d)
        return dh.free_rank if dh else 0

    def torsion(self, d):
        dh = self._data.get(d)
        return dh.torsion if dh else ()

    def total_free_rank(self, max_degree=None):
        return sum(self.free_rank(d) for d in self.support(max_degree))

    def summary(self, max_degree=None):
        """dict degree -> (free_rank, torsion) over nonzero degrees."""
        out = {}
        for d in self.support(max_degree):
            out[d] = (self.free_rank(d), self.torsion(d))
        return out

    def rep_global(self, d, slot_index):
        dh = self._data[d]
        local = dh.rep_local(slot_index)
        return {dh.ids[i]: v for i, v in local.items()}

    def coords_global(self, d, global_vec):
        """Homology coordinates at degree d of a global cycle vector."""
        dh = self._data.get(d)
        if dh is None:
            if global_vec:
                raise ValueError("cycle in a degree with no basis")
            return []
        if not dh.kept:
            return []  # zero homology: every cycle is a boundary
        local = {}
        for gid, v in global_vec.items():
            p = dh.pos.get(gid)
            if p is None:
                raise ValueError("vector is not homogeneous of degree %r" % d)
            local[p] = v
        return dh.coords(local)

    def u_matrix(self, d):
        """Induced U on homology, degree d -> d-2, as coordinate columns."""
        if d in self._u_cache:
            return self._u_cache[d]
        if self.complex.u_action is None:
            raise ValueError("complex carries no U-action")
        src = self._data.get(d)
        cols = []
        u = self.complex.u_action
        for slot in range(len(src.kept) if src else 0):
            vec = self.rep_global(d, slot)
            img = {}
            for gid, coeff in vec.items():
                _dict_axpy(img, u[gid], coeff)
            cols.append(self.coords_global(d - 2, img))
        self._u_cache[d] = cols
        return cols


def graded_homology(complex_, ceiling=None):
    """Homology of a GradedComplex, one Smith normal form per degree."""
    data = {}
    by_degree = complex_.by_degree
    boundary = complex_.boundary
    for d, ids in by_degree.items():
        pos = {gid: i for i, gid in enumerate(ids)}
        below = by_degree.get(d - 1, ())
        pos_below = {gid: i for i, gid in enumerate(below)}
        # local matrix of the boundary leaving degree d
        rows = [{} for _ in range(len(below))]
        for j, gid in enumerate(ids):
            for tgt, v in boundary[gid].items():
                rows[pos_below[tgt]][j] = v
        work = _snf(rows, len(below), len(ids),
                    track_r=True, track_rinv=True)
        z = len(ids) - work.rank
        kernel_cols = [work.r_cols[work.rank + s] for s in range(z)]
        # image from one degree up, in kernel coordinates
        above = by_degree.get(d + 1, ())
        stage = _DegreeHomology(ids, pos, z, work.rank, kernel_cols,
                                work.q_rows, None, None, [], 0)
        y_rows = [{} for _ in range(z)]
        ncols_y = 0
        for gid in above:
            col = boundary[gid]
            if not col:
                continue
            local = {pos[t]: v for t, v in col.items()}
            w = stage.kernel_coords(local)
            nonzero = False
            for s, val in enumerate(w):
                if val:
                    y_rows[s][ncols_y] = val
                    nonzero = True
            if nonzero:
                ncols_y += 1
        ywork = _snf(y_rows, z, ncols_y, track_l=True, track_linv=True)
        data[d] = _DegreeHomology(ids, pos, z, work.rank, kernel_cols,
                                  work.q_rows, ywork.l_rows, ywork.linv_cols,
                                  ywork.diag, ywork.rank)
    return GradedGroup(complex_, data, ceiling=ceiling)


# ---------------------------------------------------------------------------
# chain maps and induced maps on homology


class ChainMap:
    """A degree-homogeneous chain map between graded complexes.

    columns[j] is the (sparse) image of source basis element j.  The
    map must shift every degree by the same amount and commute with
    the boundaries on the nose.
    """

    def __init__(self, source, target, columns, shift=0, check=True):
        self.source = source
        self.target = target
        self.columns = columns
        self.shift = shift
        if check:
            self._check()

    def _check(self):
        sdeg, tdeg = self.source.degrees, self.target.degrees
        for j, col in enumerate(self.columns):
            for i in col:
                if tdeg[i] != sdeg[j] + self.shift:
                    raise ValueError(
                        f"map entry {j}->{i} does not shift degree "
                        f"by {self.shift}")
        fd = _compose(self.columns, self.source.boundary)
        df = _compose(self.target.boundary, self.columns)
        if fd != df:
            raise ValueError("not a chain map: boundary does not commute")

    def apply(self, global_vec):
        out = {}
        for gid, coeff in global_vec.items():
            _dict_axpy(out, self.columns[gid], coeff)
        return out

    def induced(self, source_h=None, target_h=None):
        """Map induced on homology (computes homology if not given)."""
        hs = source_h if source_h is not None else graded_homology(self.source)
        ht = target_h if target_h is not None else graded_homology(self.target)
        matrices = {}
        for d in hs.support():
            dh = hs.degree_data(d)
            cols = []
            for slot in range(len(dh.kept)):
                img = self.apply(hs.rep_global(d, slot))
                cols.append(ht.coords_global(d + self.shift, img))
            matrices[d] = cols
        return InducedMap(hs, ht, self.shift, matrices)


def induced_map(chain_map, source_h=None, target_h=None):
    return chain_map.induced(source_h, target_h)


class InducedMap:
    """The action of a chain map on homology, degree by degree."""

    def __init__(self, source_h, target_h, shift, matrices):
        self.source_h = source_h
        self.target_h = target_h
        self.shift = shift
        self.matrices = matrices

    def matrix(self, d):
        return self.matrices.get(d, [])

    def _degrees(self, max_degree):
        degs = self.source_h.support()
        if max_degree is not None:
            degs = [d for d in degs if d <= max_degree]
        return degs

    def kernel_rank(self, max_degree=None):
        """Free rank of the kernel (rank over Q of the degreewise maps)."""
        total = 0
        for d in self._degrees(max_degree):
            sdh = self.source_h.degree_data(d)
            tdh = self.target_h.degree_data(d + self.shift)
            src_free = [i for i, f in enumerate(sdh.factors) if f == 0]
            if not src_free:
                continue
            tgt_free = ([i for i, f in enumerate(tdh.factors) if f == 0]
                        if tdh else [])
            cols = self.matrices.get(d, [])
            reduced_cols = []
            for i in src_free:
                col = cols[i] if i < len(cols) else []
                reduced_cols.append(
                    {r: col[slot] for r, slot in enumerate(tgt_free)
                     if slot < len(col) and col[slot]})
            total += len(src_free) - integer_rank(reduced_cols)
        return total

    def is_surjective(self, max_degree=None):
        """Surjectivity as a map of abelian groups, degreewise."""
        targets = self.target_h.support(
            None if max_degree is None else max_degree + self.shift)
        for td in targets:
            d = td - self.shift
            tdh = self.target_h.degree_data(td)
            nslots = len(tdh.kept)
            if nslots == 0:
                continue
            if max_degree is not None and d > max_degree:
                continue
            # presentation of coker: torsion relations plus image columns
            rel_cols = []
            for i, f in enumerate(tdh.factors):
                if f > 1:
                    rel_cols.append({i: f})
            for col in self.matrices.get(d, []):
                entries = {i: v for i, v in enumerate(col) if v}
                if entries:
                    rel_cols.append(entries)
            rows = [{} for _ in range(nslots)]
            for j, col in enumerate(rel_cols):
                for r, v in col.items():
                    rows[r][j] = v
            work = _SnfWork(rows, nslots, len(rel_cols))
            work.run()
            if work.rank < nslots or any(x != 1 for x in work.diag):
                return False
        return True

    def is_isomorphism(self, max_degree=None):
        """Isomorphism check (torsion-free groups only)."""
        degs = self._degrees(max_degree)
        for d in degs:
            sdh = self.source_h.degree_data(d)
            tdh = self.target_h.degree_data(d + self.shift)
            if sdh.torsion or (tdh and tdh.torsion):
                raise NotImplementedError("iso check with torsion present")
            nsrc = len(sdh.kept)
            ntgt = len(tdh.kept) if tdh else 0
            if nsrc != ntgt:
                return False
            rows = [{} for _ in range(ntgt)]
            for j, col in enumerate(self.matrices.get(d, [])):
                for r, v in enumerate(col):
                    if v:
                        rows[r][j] = v
            work = _SnfWork(rows, ntgt, nsrc)
            work.run()
            if work.rank < nsrc or any(x != 1 for x in work.diag):
                return False
        # also: nothing in the target in these degrees may be missed
        tsupport = self.target_h.support(
            None if max_degree is None else max_degree + self.shift)
        ssupport = {d + self.shift for d in degs}
        for td in tsupport:
            if self.target_h.degree_data(td).kept and td not in ssupport:
                if max_degree is None or td - self.shift <= max_degree:
                    return False
        return True


# ---------------------------------------------------------------------------
# tower decomposition


@dataclass(frozen=True)
class TowerDecomposition:
    """A homology group split into one U-tower plus a finite remainder.

    d_bottom is the degree of the bottom of the tower; reduced maps
    each degree to (free_rank, torsion) of the complement.  stabilized
    records that the decomposition survived the drop-two re-check.
    """

    d_bottom: object
    reduced: tuple
    stabilized: bool

    def reduced_dict(self):
        return {d: v for d, v in self.reduced}

    @property
    def total_reduced_rank(self):
        return sum(r for _, (r, _) in self.reduced)


def _quotient_by_class(factors, vec):
    """(free_rank, torsion) of H/<v> where H = prod Z/factors (0 = Z)."""
    n = len(factors)
    cols = []
    for i, f in enumerate(factors):
        if f > 1:
            cols.append({i: f})
    entries = {i: v for i, v in enumerate(vec) if v}
    if entries:
        cols.append(entries)
    rows = [{} for _ in range(n)]
    for j, col in enumerate(cols):
        for r, v in col.items():
            rows[r][j] = v
    work = _SnfWork(rows, n, len(cols))
    work.run()
    free = n - work.rank
    torsion = tuple(sorted(x for x in work.diag if x > 1))
    return free, torsion


def _decompose_once(h, degrees, n_levels):
    if len(degrees) < 2:
        raise NotStabilizedError(
            "homology support too small to isolate a tower")
    run = min(n_levels, len(degrees))
    # the top `run` degrees must be bare Z's linked by U-isomorphisms
    for idx in range(run):
        d = degrees[idx]
        if h.torsion(d):
            raise TorsionInTowerError(
                f"torsion at degree {d} inside the stable tower region")
        if h.free_rank(d) != 1:
            raise NotStabilizedError(
                f"rank {h.free_rank(d)} at degree {d} near the top")
        if idx + 1 < run:
            if degrees[idx + 1] != d - 2:
                raise NotStabilizedError(
                    f"tower degrees not spaced by two near {d}")
            col = h.u_matrix(d)
            if len(col) != 1 or len(col[0]) != 1 or abs(col[0][0]) != 1:
                raise NotStabilizedError(
                    f"U is not an isomorphism from degree {d}")
    # walk the tower down from the top
    top = degrees[0]
    dh = h.degree_data(top)
    vec = [0] * len(dh.kept)
    vec[next(i for i, f in enumerate(dh.factors) if f == 0)] = 1
    tower = {top: vec}
    cur = top
    while True:
        below = h.degree_data(cur - 2)
        if below is None or not below.kept:
            break
        cols = h.u_matrix(cur)
        img = [0] * len(below.kept)
        for slot, coeff in enumerate(tower[cur]):
            if coeff:
                col = cols[slot]
                for r in range(len(img)):
                    img[r] += coeff * col[r]
        for r, f in enumerate(below.factors):
            if f:
                img[r] %= f
        has_free = any(img[r] for r, f in enumerate(below.factors) if f == 0)
        if not has_free:
            break
        cur -= 2
        tower[cur] = img
    d_bottom = cur
    reduced = []
    for d in sorted(degrees):
        if d in tower:
            free, torsion = _quotient_by_class(
                h.degree_data(d).factors, tower[d])
        else:
            free, torsion = h.free_rank(d), h.torsion(d)
        if free or torsion:
            reduced.append((d, (free, torsion)))
    return d_bottom, tuple(reduced)


def tower_decompose(h, depth, ceiling=None):
    """Split a U-equipped homology group into tower + reduced part.

    `depth` is the truncation depth used to build the complex; the top
    ceil(depth/2) occupied degrees must look like an honest truncated
    tower.  The decomposition is recomputed with the top two occupied
    degrees dropped and must agree (this is the stabilization check).
    Degrees above `ceiling` are ignored entirely; producers of
    truncated complexes pass the degree below which homology is
    guaranteed faithful.
    """
    if ceiling is None:
        ceiling = h.ceiling
    degrees = sorted(h.support(ceiling), reverse=True)
    n_levels = max(2, ceil(depth / 2))
    d_bottom, reduced = _decompose_once(h, degrees, n_levels)
    d2, red2 = _decompose_once(h, degrees[2:], max(2, n_levels - 2))
    limit = degrees[2]
    trimmed = tuple((d, v) for d, v in reduced if d <= limit)
    if d2 != d_bottom or red2 != trimmed:
        raise NotStabilizedError(
            "decomposition changed after dropping the top two degrees")
    return TowerDecomposition(d_bottom=d_bottom, reduced=reduced,
                              stabilized=True)
