"""Concrete realizations of filtration regions and their structure maps.

A knot complex stores one generator per U-orbit; to compute anything
we unfold finitely many translates.  The translate (x, k) sits at
filtration (i_x + k, j_x + k) and grading m_x + 2k, and U acts by
k -> k - 1.  Realizing a region keeps the translates whose filtration
lies in the region, with upward-closed regions additionally cut off at
a depth N: translates more than N levels inside are discarded.  Since
the differential never increases the region depth, the kept part is an
honest subcomplex of the (quotient) region complex, and its homology
is faithful strictly below the degree floor of what was discarded --
realizations record that trust ceiling.

The two maps out of A_s = C{max(i, j-s) >= 0} both land in
B = C{i >= 0}: the vertical map is the evident projection, and the
horizontal one projects to C{j >= s}, slides down by U^s, and applies
the flip.  When the flip only commutes with the differential up to a
global sign, the horizontal map absorbs (-1)^m per generator, which
restores the chain-map identity without disturbing the involution.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil

from .cfk import Region, flip_chain_sign
from .errors import (FlipMissingError, GradingError, InvalidComplexError,
                     NotStabilizedError)
from .homology import ChainMap, GradedComplex, graded_homology


def default_depth(complex_, slope=0):
    """The standard truncation depth heuristic: generous and cheap."""
    return int(ceil(4 * (complex_.grading_spread + slope + 4)))


def _k_range(g, region, depth):
    """Inclusive range of translates of generator g inside the region."""
    if region.kind == "min_i":
        (bound,) = region.params
        lo = bound - g.i
        return lo, lo + depth
    if region.kind == "max_ij":
        s, bound = region.params
        lo = bound - max(g.i, g.j - s)
        return lo, lo + depth
    if region.kind == "box":
        (ilo, ihi), (jlo, jhi) = region.params
        return max(ilo - g.i, jlo - g.j), min(ihi - g.i, jhi - g.j)
    ci, cj = region.params
    k = ci - g.i
    if g.j + k == cj:
        return k, k
    return 0, -1


class RealizedRegion:
    """A region of a knot complex, unfolded into a finite GradedComplex.

    ids[n] is the (generator name, translate) pair of basis element n;
    id_of inverts it.  dropped_floor is the least grading among the
    discarded deeper translates (None when nothing was discarded), and
    ceiling = dropped_floor - 2 bounds the degrees in which homology
    of the realization agrees with the untruncated region.
    """

    def __init__(self, source, region, depth):
        if not source.graded:
            raise GradingError("realization requires solved gradings")
        self.source = source
        self.region = region
        self.depth = depth
        ids = []
        id_of = {}
        degrees = []
        floor = None
        for g in source.generators:
            lo, hi = _k_range(g, region, depth)
            for k in range(lo, hi + 1):
                id_of[(g.name, k)] = len(ids)
                ids.append((g.name, k))
                degrees.append(g.m + 2 * k)
            if region.classification == "quotient":
                dropped = g.m + 2 * (hi + 1)
                floor = dropped if floor is None else min(floor, dropped)
        self.ids = ids
        self.id_of = id_of
        self.dropped_floor = floor
        self.ceiling = None if floor is None else floor - 2
        boundary = []
        u_action = []
        for name, k in ids:
            col = {}
            for t in source.differential.get(name, ()):
                tid = id_of.get((t.target, k - t.u_exponent))
                if tid is not None:
                    col[tid] = t.coefficient
            boundary.append(col)
            uid = id_of.get((name, k - 1))
            u_action.append({uid: 1} if uid is not None else {})
        self.realization = GradedComplex(degrees, boundary, u_action,
                                         labels=ids)

    def __repr__(self):
        return (f"RealizedRegion({self.source.name or '?'}, "
                f"{self.region.describe()}, depth={self.depth}, "
                f"{len(self.ids)} elements)")


@lru_cache(maxsize=512)
def realize(complex_, region, depth):
    """Cached realization; knot complexes hash by content."""
    return RealizedRegion(complex_, region, depth)


@lru_cache(maxsize=256)
def region_homology(complex_, region, depth):
    """(RealizedRegion, GradedGroup) for a region, cached together."""
    realized = realize(complex_, region, depth)
    h = graded_homology(realized.realization, ceiling=realized.ceiling)
    return realized, h


def map_v(complex_, s, depth):
    """The projection A_s -> B as a checked ChainMap (degree shift 0)."""
    src = realize(complex_, Region.max_ij(s), depth)
    tgt = realize(complex_, Region.min_i(), depth)
    cols = []
    for name, k in src.ids:
        tid = tgt.id_of.get((name, k))
        cols.append({} if tid is None else {tid: 1})
    return ChainMap(src.realization, tgt.realization, cols, shift=0)


def map_h(complex_, s, depth):
    """Project to {j >= s}, slide by U^s, flip: A_s -> B, shift -2s."""
    if complex_.flip is None:
        raise FlipMissingError(
            "horizontal maps need flip data on the complex")
    eps = flip_chain_sign(complex_)
    if eps is None:
        raise InvalidComplexError(["flip is not a chain map up to "
                                   "global sign"])
    src = realize(complex_, Region.max_ij(s), depth)
    tgt = realize(complex_, Region.min_i(), depth)
    cols = []
    for name, k in src.ids:
        g = complex_.by_name[name]
        if g.j + k - s < 0:
            cols.append({})
            continue
        sgn, flipped = complex_.flip[name]
        if eps < 0 and g.m % 2:
            sgn = -sgn
        tid = tgt.id_of.get((flipped, k - s))
        cols.append({} if tid is None else {tid: sgn})
    return ChainMap(src.realization, tgt.realization, cols, shift=-2 * s)


def induced_v(complex_, s, depth):
    """(InducedMap of v, trusted source-degree ceiling)."""
    _, h_a = region_homology(complex_, Region.max_ij(s), depth)
    _, h_b = region_homology(complex_, Region.min_i(), depth)
    vmap = map_v(complex_, s, depth)
    ceiling = min(h_a.ceiling, h_b.ceiling)
    return vmap.induced(h_a, h_b), ceiling


def induced_h(complex_, s, depth):
    """(InducedMap of h, trusted source-degree ceiling)."""
    _, h_a = region_homology(complex_, Region.max_ij(s), depth)
    _, h_b = region_homology(complex_, Region.min_i(), depth)
    hmap = map_h(complex_, s, depth)
    # the map shifts degree by -2s, so target trust pulls back by +2s
    ceiling = min(h_a.ceiling, h_b.ceiling + 2 * s)
    return hmap.induced(h_a, h_b), ceiling


# ---------------------------------------------------------------------------
# knot-level invariants


def hfk_hat(complex_, s):
    """Homology of the single filtration level (0, s)."""
    if complex_.graded:
        realized = realize(complex_, Region.single(0, s), 0)
        return graded_homology(realized.realization)
    # rank-only queries work without gradings
    inside = [(g, -g.i) for g in complex_.generators if g.j - g.i == s]
    idx = {(g.name, k): n for n, (g, k) in enumerate(inside)}
    boundary = []
    for g, k in inside:
        col = {}
        for t in complex_.differential.get(g.name, ()):
            tid = idx.get((t.target, k - t.u_exponent))
            if tid is not None:
                col[tid] = t.coefficient
        boundary.append(col)
    return graded_homology(
        GradedComplex([0] * len(inside), boundary, check=False))


def _alexander_support(complex_):
    return sorted({g.j - g.i for g in complex_.generators})


def genus(complex_):
    """Top filtration level with nonzero hat homology (0 for the unknot)."""
    best = None
    for s in reversed(_alexander_support(complex_)):
        if hfk_hat(complex_, s).support():
            best = s
            break
    return max(best, 0) if best is not None else 0


@dataclass(frozen=True)
class LaurentPolynomial:
    """Integer Laurent polynomial, stored as sorted (exponent, coeff)."""

    coefficients: tuple

    @staticmethod
    def from_dict(d):
        return LaurentPolynomial(
            tuple(sorted((s, c) for s, c in d.items() if c)))

    def coefficient(self, s):
        for exp, c in self.coefficients:
            if exp == s:
                return c
        return 0

    def at_one(self):
        return sum(c for _, c in self.coefficients)

    def second_derivative_at_one(self):
        return sum(c * s * (s - 1) for s, c in self.coefficients)

    def __str__(self):
        if not self.coefficients:
            return "0"
        parts = []
        for s, c in sorted(self.coefficients, reverse=True):
            mag = abs(c)
            if s == 0:
                body = str(mag)
            else:
                t = "t" if s == 1 else f"t^{s}"
                body = t if mag == 1 else f"{mag}*{t}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {body}")
        return " ".join(parts)


def alexander_polynomial(complex_):
    """Euler characteristic of hat homology across filtration levels.

    Output is symmetric under s -> -s for any honest knot complex;
    asymmetry is reported as a validation failure.
    """
    if not complex_.graded:
        raise GradingError("alexander polynomial requires solved gradings")
    coeffs = {}
    for s in _alexander_support(complex_):
        h = hfk_hat(complex_, s)
        chi = 0
        for d in h.support():
            chi += h.free_rank(d) if d % 2 == 0 else -h.free_rank(d)
        if chi:
            coeffs[s] = chi
    for s, c in coeffs.items():
        if coeffs.get(-s, 0) != c:
            raise InvalidComplexError(
                [f"alexander polynomial asymmetric at t^{s}"])
    return LaurentPolynomial.from_dict(coeffs)


def kernel_rank_v(complex_, s, depth=None):
    """Free rank of ker(v on homology), checked at two depths."""
    if depth is None:
        depth = default_depth(complex_)

    def at_depth(n):
        ind, ceiling = induced_v(complex_, s, n)
        return ind.kernel_rank(max_degree=ceiling)

    first = at_depth(depth)
    again = at_depth(2 * depth)
    if first != again:
        raise NotStabilizedError(
            f"kernel rank of v_{s} changed between depth {depth} "
            f"and {2 * depth}")
    return first
