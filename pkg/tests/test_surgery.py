from fractions import Fraction

import pytest

from hfplus.cfk import builtin, mirror
from hfplus.surgery import (SurgeryDescriptor, build_mapping_cone,
                            conjugation_constant, hf_plus, lens_d_oracle,
                            truncation_sigma)

F = Fraction


def test_truncation_sigma_examples():
    assert truncation_sigma(builtin("unknot"), 1, 1, 0) == 1
    assert truncation_sigma(builtin("trefoil_right"), 1, 1, 0) == 1
    assert truncation_sigma(builtin("figure_eight"), 7, 3, 2) == 1
    assert truncation_sigma(builtin("trefoil_right"), 1, 5, 0) == 4
    assert truncation_sigma(builtin("torus_2_5"), 3, 1, 0) == 1


def test_mapping_cone_shape():
    desc = SurgeryDescriptor(1, 1, 0, sigma=1, depth=8)
    cone = build_mapping_cone(builtin("trefoil_right"), desc)
    assert cone.n_a_summands == 3  # s in {-1, 0, 1}
    assert cone.n_b_summands == 2  # s in {0, 1}
    assert cone.complex.n > 0


def test_lens_oracle_frozen_values():
    assert lens_d_oracle(1, 1, 0) == 0
    assert lens_d_oracle(1, 5, 0) == 0
    assert [lens_d_oracle(2, 1, i) for i in range(2)] == [F(1, 4), F(-1, 4)]
    assert [lens_d_oracle(5, 1, i) for i in range(5)] == [
        F(1), F(1, 5), F(-1, 5), F(-1, 5), F(1, 5)]
    assert [lens_d_oracle(3, 2, i) for i in range(3)] == [
        F(1, 6), F(1, 6), F(-1, 2)]


def test_lens_oracle_domain():
    with pytest.raises(ValueError):
        lens_d_oracle(0, 1, 0)
    with pytest.raises(ValueError):
        lens_d_oracle(4, 2, 0)
    with pytest.raises(ValueError):
        lens_d_oracle(3, 2, 3)


def test_lens_oracle_conjugation_symmetry():
    for p, q in [(3, 1), (5, 2), (7, 3), (10, 3), (9, 5)]:
        values = [lens_d_oracle(p, q, i) for i in range(p)]
        assert any(
            all(values[i] == values[(c - i) % p] for i in range(p))
            for c in range(p))


def test_unknot_surgery_is_a_lens_space():
    for p, q in [(1, 1), (3, 2), (5, 4), (7, 2)]:
        res = hf_plus(builtin("unknot"), p, q)
        assert res.total_reduced_rank == 0
        for r in res.spin_c:
            assert r.d == lens_d_oracle(p, q, r.index)
            assert r.hf_red == ()


def test_plus_one_surgeries():
    right = hf_plus(builtin("trefoil_right"), 1, 1)
    assert right.d_values() == [F(-2)]
    assert right.total_reduced_rank == 0

    left = hf_plus(builtin("trefoil_left"), 1, 1)
    assert left.d_values() == [F(0)]
    assert left.spin_c[0].hf_red == ((F(0), 1, ()),)
    assert left.spin_c[0].parity == (1, 0)

    eight = hf_plus(builtin("figure_eight"), 1, 1)
    assert eight.d_values() == [F(0)]
    assert eight.spin_c[0].hf_red == ((F(-1), 1, ()),)
    assert eight.spin_c[0].parity == (0, 1)


def test_figure_eight_seven_thirds_frozen():
    res = hf_plus(builtin("figure_eight"), 7, 3)
    assert res.d_values() == [
        F(3, 14), F(1, 2), F(3, 14), F(-9, 14), F(-1, 14), F(-1, 14),
        F(-9, 14)]
    reds = {r.index: r.hf_red for r in res.spin_c}
    assert reds[0] == ((F(-11, 14), 1, ()),)
    assert reds[1] == ((F(-1, 2), 1, ()),)
    assert reds[2] == ((F(-11, 14), 1, ()),)
    assert all(reds[i] == () for i in (3, 4, 5, 6))
    assert res.total_reduced_rank == 3
    for r in res.spin_c:
        assert r.parity[0] == 0  # everything reduced sits in odd parity
    assert conjugation_constant(res) == 2


def test_right_trefoil_five_surgery_negates_the_lens_space():
    res = hf_plus(builtin("trefoil_right"), 5, 1)
    assert res.total_reduced_rank == 0
    mine = sorted(res.d_values())
    lens = sorted(-lens_d_oracle(5, 1, i) for i in range(5))
    assert mine == lens


def test_negative_slope_reports_reversed_orientation():
    res = hf_plus(builtin("trefoil_right"), -1, 1)
    assert res.orientation == "reversed"
    assert res.slope == F(-1)
    # -1 surgery on the right trefoil mirrors +1 on the left
    direct = hf_plus(builtin("trefoil_left"), 1, 1)
    assert res.d_values() == [-d for d in direct.d_values()]
    assert res.total_reduced_rank == direct.total_reduced_rank


def test_mirror_figure_eight_same_surgeries():
    # the complex is amphichiral, so every surgery output must agree
    for p, q in [(1, 1), (3, 2)]:
        a = hf_plus(builtin("figure_eight"), p, q)
        b = hf_plus(mirror(builtin("figure_eight")), p, q)
        assert a.comparable() == b.comparable()


def test_slope_validation():
    with pytest.raises(ValueError):
        hf_plus(builtin("unknot"), 0, 1)
    with pytest.raises(ValueError):
        hf_plus(builtin("unknot"), 1, 0)
    with pytest.raises(ValueError):
        hf_plus(builtin("unknot"), 4, 2)


def test_depth_and_width_do_not_change_results():
    samples = [("trefoil_right", 3, 2), ("figure_eight", 7, 3),
               ("trefoil_left", 5, 4), ("torus_2_5", 4, 3)]
    for name, p, q in samples:
        k = builtin(name)
        base = hf_plus(k, p, q)
        deeper = hf_plus(k, p, q, depth=2 * base.spin_c[0].depth)
        wider = hf_plus(k, p, q, sigma_bump=1)
        assert base.comparable() == deeper.comparable(), name
        assert base.comparable() == wider.comparable(), name


def test_gauge_shifts_every_d_by_the_constant():
    k = builtin("trefoil_left")
    base = hf_plus(k, 3, 2)
    shifted = hf_plus(k, 3, 2, gauge=5)
    for r0, r5 in zip(base.spin_c, shifted.spin_c):
        assert r5.d == r0.d + 5
        assert r5.parity == r0.parity
        assert r5.hf_red == tuple(
            (deg + 5, rank, torsion) for deg, rank, torsion in r0.hf_red)


def test_conjugation_constant_exists_on_samples():
    for name in ("unknot", "trefoil_right", "trefoil_left",
                 "figure_eight", "torus_2_5"):
        for p, q in [(4, 1), (5, 3)]:
            assert conjugation_constant(hf_plus(builtin(name), p, q)) is not None


def test_descriptor_validation():
    with pytest.raises(ValueError):
        SurgeryDescriptor(0, 1, 0, 1, 8)
    with pytest.raises(ValueError):
        SurgeryDescriptor(3, 1, 3, 1, 8)  # spin_c out of range
    with pytest.raises(ValueError):
        SurgeryDescriptor(3, 1, 0, 0, 8)  # sigma must be >= 1
