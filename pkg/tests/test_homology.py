import random

import pytest

from helpers import homology_free_ranks, random_complex, rational_rank
from hfplus.cfk import Region
from hfplus.acomplex import realize
from hfplus.homology import (ChainMap, GradedComplex, integer_rank,
                             graded_homology, smith_normal_form,
                             tower_decompose)


def _matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)]
            for row in a]


def _check_snf(matrix, expected_diagonal):
    l, d, r = smith_normal_form(matrix)
    assert _matmul(_matmul(l, matrix), r) == d
    diag = [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]
    assert diag == expected_diagonal
    for i, row in enumerate(d):
        for j, v in enumerate(row):
            if i != j:
                assert v == 0
    for a, b in zip(diag, diag[1:]):
        if b:
            assert a != 0 and b % a == 0


def test_snf_small_oracles():
    _check_snf([[2, 4], [6, 8]], [2, 4])
    _check_snf([[1, 0], [0, 1]], [1, 1])
    _check_snf([[0, 0], [0, 0]], [0, 0])
    _check_snf([[1, 2], [3, 4]], [1, 2])
    _check_snf([[6]], [6])
    _check_snf([[2, 4, 4], [-6, 6, 12], [10, 4, 16]], [2, 2, 156])


def test_snf_rectangular_and_empty():
    _check_snf([[3, 6, 9]], [3])
    _check_snf([[2], [4], [5]], [1])
    l, d, r = smith_normal_form([])
    assert l == [] and d == [] and r == []


def test_snf_matches_rational_rank_on_random_matrices():
    rng = random.Random(7)
    for _ in range(30):
        nrows = rng.randrange(1, 6)
        ncols = rng.randrange(1, 6)
        m = [[rng.randrange(-4, 5) for _ in range(ncols)]
             for _ in range(nrows)]
        _, d, _ = smith_normal_form(m)
        snf_rank = sum(1 for i in range(min(nrows, ncols)) if d[i][i])
        cols = [{r: m[r][c] for r in range(nrows) if m[r][c]}
                for c in range(ncols)]
        assert snf_rank == rational_rank(cols, nrows)
        assert snf_rank == integer_rank(cols)


def test_torsion_from_a_doubling_arrow():
    # x in degree 1 with dx = 2y gives H_0 = Z/2 and kills nothing else
    gc = GradedComplex([1, 0], [{1: 2}, {}])
    h = graded_homology(gc)
    assert h.free_rank(0) == 0
    assert h.torsion(0) == (2,)
    assert h.free_rank(1) == 0
    assert h.support() == [0]


def test_homology_of_a_split_pair_is_zero():
    gc = GradedComplex([1, 0], [{1: 1}, {}])
    h = graded_homology(gc)
    assert h.support() == []


def test_graded_complex_validation():
    with pytest.raises(ValueError):
        GradedComplex([0, 0], [{1: 1}, {}])  # boundary must drop degree 1
    with pytest.raises(ValueError):
        # d(a) = b, d(b) = c: the composite is nonzero
        GradedComplex([2, 1, 0], [{1: 1}, {2: 1}, {}])
    with pytest.raises(ValueError):
        # U must drop degree by exactly 2
        GradedComplex([1, 0], [{1: 1}, {}], u_action=[{1: 1}, {}])


def test_chain_map_validation_and_induced():
    src = GradedComplex([0], [{}])
    tgt = GradedComplex([0], [{}])
    doubling = ChainMap(src, tgt, [{0: 2}])
    ind = doubling.induced(graded_homology(src), graded_homology(tgt))
    assert ind.kernel_rank() == 0
    assert not ind.is_surjective()
    identity = ChainMap(src, tgt, [{0: 1}])
    assert identity.induced(graded_homology(src),
                            graded_homology(tgt)).is_isomorphism()


def test_chain_map_rejects_non_chain_maps():
    src = GradedComplex([1, 0], [{1: 1}, {}])
    tgt = GradedComplex([1, 0], [{1: 2}, {}])
    with pytest.raises(ValueError):
        ChainMap(src, tgt, [{0: 1}, {1: 1}])  # does not commute with d


def _tower_complex(levels, extra_degrees=()):
    """U-tower with top at degree 2*(levels-1), plus idle extra classes."""
    degrees = [2 * k for k in range(levels)] + list(extra_degrees)
    boundary = [{} for _ in degrees]
    u = [{} for _ in degrees]
    for k in range(1, levels):
        u[k] = {k - 1: 1}
    return GradedComplex(degrees, boundary, u_action=u)


def test_tower_decompose_bare_tower():
    h = graded_homology(_tower_complex(8))
    t = tower_decompose(h, depth=8)
    assert t.d_bottom == 0
    assert t.stabilized
    assert t.total_reduced_rank == 0


def test_tower_decompose_reports_reduced_classes():
    h = graded_homology(_tower_complex(8, extra_degrees=[3, 3, 0]))
    t = tower_decompose(h, depth=8)
    assert t.d_bottom == 0
    assert t.reduced_dict() == {3: (2, ()), 0: (1, ())}
    assert t.total_reduced_rank == 3


def test_tower_decompose_shifted_bottom():
    degrees = [4, 6, 8, 10]
    u = [{}, {0: 1}, {1: 1}, {2: 1}]
    h = graded_homology(GradedComplex(degrees, [{} for _ in degrees],
                                      u_action=u))
    t = tower_decompose(h, depth=4)
    assert t.d_bottom == 4


def test_random_realizations_match_rational_oracle():
    rng = random.Random(20260825)
    for _ in range(50):
        k = random_complex(rng)
        region = rng.choice([Region.min_i(), Region.max_ij(0),
                             Region.max_ij(1)])
        realized = realize(k, region, rng.randrange(2, 5))
        gc = realized.realization
        h = graded_homology(gc)
        oracle = homology_free_ranks(gc)
        for d in set(gc.degrees):
            assert h.free_rank(d) == oracle.get(d, 0), (k.name, region, d)
