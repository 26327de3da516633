"""HF+ of rational surgery from a truncated mapping cone.

For a slope p/q > 0 and a residue i mod p, the cone X+ has one
A-summand (the realization of A_{t(s)} with t(s) = floor((i+ps)/q))
for each s in [-sigma, sigma] and one B-summand for s in (-sigma,
sigma]; the connecting differential sends a_s to v(a_s) in B_s plus
h(a_s) in B_{s+1}.  Outside the window the omitted maps are
isomorphisms on homology, which is what truncation_sigma guarantees,
so the finite cone computes the surgery.

Grading bookkeeping happens in two separate steps, both exact:

* relative offsets, one integer per summand, chosen so every
  component of the cone differential drops the total grading by 1.
  These are pinned by off_A(-sigma) = 0 and depend only on (p, q, i,
  sigma), never on the knot.

* an absolute shift, found by running the unknot through the very
  same cone shape and matching its tower bottom to the lens-space
  d-invariant recursion.  Because the B-offsets do not depend on the
  knot, the same shift is valid for every input at that shape.

Degrees stay integers throughout the computation; the (possibly
fractional) calibration shift is applied only when results are
assembled.  Negative slopes are computed on the dual complex and
reported with orientation "reversed", transporting only d -> -d.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .acomplex import default_depth, genus, realize
from .cfk import Region, builtin, flip_chain_sign, mirror
from .errors import (CFKError, FlipMissingError, GradingError,
                     NotStabilizedError, TorsionInTowerError)
from .homology import GradedComplex, graded_homology, tower_decompose


@dataclass(frozen=True)
class SurgeryDescriptor:
    """Shape of one truncated cone: slope, residue, window, depth."""

    p: int
    q: int
    spin_c: int
    sigma: int
    depth: int

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("descriptor requires p, q > 0")
        if gcd(self.p, self.q) != 1:
            raise ValueError("slope must be in lowest terms")
        if not 0 <= self.spin_c < self.p:
            raise ValueError("spin_c index out of range")
        if self.sigma < 1 or self.depth < 1:
            raise ValueError("sigma and depth must be positive")

    def t(self, s):
        """Index of the A-summand at position s: floor((i + ps) / q)."""
        return (self.spin_c + self.p * s) // self.q

    def a_positions(self):
        return range(-self.sigma, self.sigma + 1)

    def b_positions(self):
        return range(-self.sigma + 1, self.sigma + 1)


def truncation_sigma(complex_, p, q, i):
    """Smallest window half-width that only discards isomorphisms.

    Beyond the window every omitted vertical map has index >= genus
    and every omitted horizontal map has index <= -genus; both floor
    expressions are monotone in s, so checking s = sigma + 1 suffices.
    """
    if p <= 0 or q <= 0:
        raise ValueError("truncation_sigma requires p, q > 0")
    g = genus(complex_)
    sigma = 1
    while not ((i + p * (sigma + 1)) // q >= g
               and (i - p * (sigma + 1)) // q <= -g):
        sigma += 1
    return sigma


def _cone_offsets(descriptor, gauge=0):
    off_a = {-descriptor.sigma: gauge}
    for s in range(-descriptor.sigma, descriptor.sigma):
        off_a[s + 1] = off_a[s] + 2 * descriptor.t(s)
    off_b = {s: off_a[s] - 1 for s in descriptor.b_positions()}
    return off_a, off_b


class MappingCone:
    """The assembled truncated cone as one graded U-complex.

    Basis labels are ("A"|"B", s, generator name, translate); the
    construction re-checks that the total differential squares to
    zero, commutes with U, and drops the (offset) grading by exactly
    one on every component, including the v/h pieces.
    """

    def __init__(self, source, descriptor, gauge=0):
        if source.flip is None:
            raise FlipMissingError("surgery requires flip data")
        if not source.graded:
            raise GradingError("surgery requires solved gradings")
        eps = flip_chain_sign(source)
        self.source = source
        self.descriptor = descriptor
        d = descriptor
        a_real = {s: realize(source, Region.max_ij(d.t(s)), d.depth)
                  for s in d.a_positions()}
        b_real = realize(source, Region.min_i(), d.depth)
        off_a, off_b = _cone_offsets(d, gauge)
        self.a_offsets = off_a
        self.b_offsets = off_b

        ids = []
        degrees = []
        base = {}
        for s in d.a_positions():
            base[("A", s)] = len(ids)
            for name, k in a_real[s].ids:
                degrees.append(source.by_name[name].m + 2 * k + off_a[s])
                ids.append(("A", s, name, k))
        for s in d.b_positions():
            base[("B", s)] = len(ids)
            for name, k in b_real.ids:
                degrees.append(source.by_name[name].m + 2 * k + off_b[s])
                ids.append(("B", s, name, k))

        boundary = []
        u_cols = []
        for s in d.a_positions():
            real = a_real[s]
            a0 = base[("A", s)]
            t_s = d.t(s)
            has_h = ("B", s + 1) in base
            for local, (name, k) in enumerate(real.ids):
                col = {a0 + tgt: c
                       for tgt, c in real.realization.boundary[local].items()}
                if ("B", s) in base:
                    tid = b_real.id_of.get((name, k))
                    if tid is not None:
                        col[base[("B", s)] + tid] = 1
                if has_h:
                    g = source.by_name[name]
                    if g.j + k - t_s >= 0:
                        sgn, flipped = source.flip[name]
                        if eps < 0 and g.m % 2:
                            sgn = -sgn
                        tid = b_real.id_of.get((flipped, k - t_s))
                        if tid is not None:
                            col[base[("B", s + 1)] + tid] = sgn
                boundary.append(col)
                uid = real.id_of.get((name, k - 1))
                u_cols.append({} if uid is None else {a0 + uid: 1})
        for s in d.b_positions():
            b0 = base[("B", s)]
            for local, (name, k) in enumerate(b_real.ids):
                boundary.append(
                    {b0 + tgt: -c
                     for tgt, c in b_real.realization.boundary[local].items()})
                uid = b_real.id_of.get((name, k - 1))
                u_cols.append({} if uid is None else {b0 + uid: 1})

        floors = [a_real[s].dropped_floor + off_a[s] for s in d.a_positions()]
        floors += [b_real.dropped_floor + off_b[s] for s in d.b_positions()]
        self.ceiling = min(floors) - 2
        self.complex = GradedComplex(degrees, boundary, u_cols, labels=ids)
        self.ids = ids

    @property
    def n_a_summands(self):
        return 2 * self.descriptor.sigma + 1

    @property
    def n_b_summands(self):
        return 2 * self.descriptor.sigma


def build_mapping_cone(complex_, descriptor, gauge=0):
    return MappingCone(complex_, descriptor, gauge)


# ---------------------------------------------------------------------------
# absolute gradings


@lru_cache(maxsize=None)
def lens_d_oracle(p, q, i):
    """Correction term of p/q surgery on the unknot at residue i.

    The classical recursion: d(1, 0, 0) = 0 and
    d(p, q, i) = ((2i+1-p-q)^2 - pq) / 4pq - d(q, p mod q, i mod q).
    Exact rationals; arguments must be coprime with 0 <= i < p.  The
    surgery pipeline cross-checks this against its own unknot cones
    (the relative tower bottoms must match the oracle's differences).
    """
    if p < 1 or q < 0 or (q == 0 and p != 1):
        raise ValueError("lens_d_oracle needs p >= 1, q >= 1")
    if not 0 <= i < p:
        raise ValueError("residue out of range")
    if p == 1:
        return Fraction(0)
    if gcd(p, q) != 1:
        raise ValueError("lens_d_oracle needs gcd(p, q) = 1")
    num = (2 * i + 1 - p - q) ** 2 - p * q
    return Fraction(num, 4 * p * q) - lens_d_oracle(q, p % q, i % q)


_cone_cache = {}


def _cone_data(complex_, descriptor, gauge=0):
    """(relative tower bottom, relative reduced summary) for one cone."""
    key = (complex_.content_key(), descriptor, gauge)
    if key not in _cone_cache:
        cone = build_mapping_cone(complex_, descriptor, gauge)
        h = graded_homology(cone.complex, ceiling=cone.ceiling)
        tower = tower_decompose(h, descriptor.depth)
        _cone_cache[key] = (tower.d_bottom, tower.reduced)
    return _cone_cache[key]


_calibration_cache = {}


def _calibration_shift(descriptor):
    """Absolute-grading shift for every cone of this shape.

    Runs the unknot through the identical (p, q, i, sigma, depth)
    cone; the lens-space oracle says where its tower bottom belongs,
    and the difference is the shift.  Valid for arbitrary inputs at
    the same shape because the B-summand offsets are knot-independent.
    """
    if descriptor not in _calibration_cache:
        bottom, reduced = _cone_data(builtin("unknot"), descriptor)
        if any(rank or torsion for _, (rank, torsion) in reduced):
            raise CFKError(
                "calibration cone has reduced homology; truncation "
                "bookkeeping is broken")
        _calibration_cache[descriptor] = (
            lens_d_oracle(descriptor.p, descriptor.q, descriptor.spin_c)
            - bottom)
    return _calibration_cache[descriptor]


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class SpincResult:
    """Invariants of one Spin^c structure of the surgered manifold.

    hf_red lists (degree, free rank, torsion factors) with exact
    rational degrees; parity is the (even, odd) rank split relative
    to the tower bottom d.
    """

    index: int
    d: Fraction
    hf_red: tuple
    parity: tuple
    sigma: int
    depth: int

    @property
    def total_reduced_rank(self):
        return sum(rank for _, rank, _ in self.hf_red)

    def profile(self):
        """Grading data with the provenance (sigma, depth) left out."""
        return (self.d, self.hf_red)


@dataclass(frozen=True)
class HFResult:
    """HF+ of a surgery, split by Spin^c structure."""

    p: int
    q: int
    orientation: str
    spin_c: tuple
    source_name: str

    @property
    def slope(self):
        return Fraction(self.p, self.q)

    @property
    def total_reduced_rank(self):
        return sum(r.total_reduced_rank for r in self.spin_c)

    def d_values(self):
        return [r.d for r in self.spin_c]

    def profile_multiset(self):
        return tuple(sorted(r.profile() for r in self.spin_c))

    def comparable(self):
        """Everything except provenance (sigma/depth) and timing."""
        return (self.p, self.q, self.orientation,
                tuple((r.index, r.d, r.hf_red, r.parity)
                      for r in self.spin_c))


def conjugation_constant(result):
    """A constant c with profile(i) = profile(c - i mod p), if any.

    Spin^c conjugation acts on the residue labels by an affine
    reflection; which one depends on conventions, so we search.
    Returns None when no reflection matches (which would falsify the
    conjugation symmetry of the computation).
    """
    p = abs(result.p)
    profiles = {r.index: r.profile() for r in result.spin_c}
    for c in range(p):
        if all(profiles[i] == profiles[(c - i) % p] for i in range(p)):
            return c
    return None


_MAX_DOUBLINGS = 4


def _spin_c_result(complex_, p, q, i, sigma, depth, gauge):
    descriptor = SurgeryDescriptor(p, q, i, sigma, depth)
    bottom, reduced = _cone_data(complex_, descriptor, gauge)
    shift = _calibration_shift(descriptor)
    d = bottom + shift
    red = tuple((deg + shift, rank, torsion)
                for deg, (rank, torsion) in reduced)
    even = sum(rank for deg, (rank, _) in reduced if (deg - bottom) % 2 == 0)
    odd = sum(rank for deg, (rank, _) in reduced if (deg - bottom) % 2 == 1)
    return SpincResult(index=i, d=d, hf_red=red, parity=(even, odd),
                       sigma=sigma, depth=depth)


_hf_cache = {}


def hf_plus(complex_, p, q, depth=None, sigma_bump=0, gauge=0):
    """HF+ of p/q surgery, one SpincResult per residue class.

    With depth=None the truncation depth starts at the standard
    heuristic and doubles (up to 4 times) whenever the tower fails to
    stabilize; an explicit depth is used as given and failures
    propagate.  sigma_bump widens every truncation window, and gauge
    shifts all relative offsets by a constant -- both exist so that
    invariance of the output under them can be demonstrated.

    Negative p is computed on the mirror complex and the result
    carries orientation="reversed" with only d negated; the reduced
    group gradings are those of the mirror computation.
    """
    if q <= 0:
        raise ValueError("q must be a positive integer")
    if p == 0:
        raise ValueError("slope must be nonzero")
    if gcd(abs(p), q) != 1:
        raise ValueError("slope must be in lowest terms")
    key = (complex_.content_key(), p, q, depth, sigma_bump, gauge)
    if key in _hf_cache:
        return _hf_cache[key]
    if p < 0:
        inner = hf_plus(mirror(complex_), -p, q, depth, sigma_bump, gauge)
        flipped = tuple(
            SpincResult(index=r.index, d=-r.d, hf_red=r.hf_red,
                        parity=r.parity, sigma=r.sigma, depth=r.depth)
            for r in inner.spin_c)
        result = HFResult(p=p, q=q, orientation="reversed",
                          spin_c=flipped,
                          source_name=complex_.name or "complex")
        _hf_cache[key] = result
        return result
    if not complex_.graded:
        raise GradingError("surgery requires solved gradings")
    if complex_.flip is None:
        raise FlipMissingError("surgery requires flip data")
    per_index = []
    for i in range(p):
        sigma = truncation_sigma(complex_, p, q, i) + sigma_bump
        if depth is not None:
            per_index.append(
                _spin_c_result(complex_, p, q, i, sigma, depth, gauge))
            continue
        n = default_depth(complex_, Fraction(p, q))
        for attempt in range(_MAX_DOUBLINGS + 1):
            try:
                per_index.append(
                    _spin_c_result(complex_, p, q, i, sigma, n, gauge))
                break
            except (NotStabilizedError, TorsionInTowerError):
                if attempt == _MAX_DOUBLINGS:
                    raise
                n *= 2
    result = HFResult(p=p, q=q, orientation="standard",
                      spin_c=tuple(per_index),
                      source_name=complex_.name or "complex")
    _hf_cache[key] = result
    return result
