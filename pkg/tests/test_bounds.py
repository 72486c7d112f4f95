"""Symmetry-set bounds and the SL2 application layer."""

import random
from fractions import Fraction

import pytest

from actcomb import (
    AffineFpAction,
    DescriptorError,
    ElementSet,
    HypothesisError,
    LinearActionQ,
    LinearFpAction,
    PointSet,
    cyclic_translation,
)
from actcomb.actions import ProjectiveSL2Action
from actcomb.bounds import (
    affine_incidence_sym_bound,
    sl2_generating_pairs_reduced,
    sl2_growth_check,
    sl2_incidence_scan,
    sl2_self_action,
    subgroup_concentration_scan,
    sym_bound_almost_free,
    sym_bound_free,
    sym_bound_linear,
)
from actcomb.stats import symmetry_set

from oracles import oracle_symmetry


def test_sym_bound_free_translation_example():
    act = cyclic_translation(6)
    Y = PointSet([0, 1, 2, 3])
    rep = sym_bound_free(act, act.element_enum(), Y, Fraction(3, 4))
    assert rep.bound == Fraction(16, 3)
    assert rep.measured == 3
    assert rep.extras["transporter_max"] == 1


def test_sym_bound_free_transitive_saturation():
    act = cyclic_translation(8)
    Y = act.point_enum()
    rep = sym_bound_free(act, act.element_enum(), Y, Fraction(1))
    assert rep.measured == 8
    assert rep.extras["transitive_bound"] == 8
    assert rep.bound == 8


def test_sym_bound_free_affine_seeded():
    act = AffineFpAction(7)
    rng = random.Random(21)
    for _ in range(5):
        Y = PointSet(rng.sample(range(7), 4))
        A = ElementSet(rng.sample(act.element_enum().members, 10))
        rep = sym_bound_free(act, A, Y, Fraction(1, 2))
        assert rep.measured <= rep.bound


def test_sym_bound_almost_free_reduces_to_free_at_n1():
    act = cyclic_translation(20)
    Y = PointSet(range(8))
    rep = sym_bound_almost_free(act, Y, Fraction(1, 2), 1)
    free = sym_bound_free(act, act.element_enum(), Y, Fraction(1, 2))
    assert rep.measured == free.measured
    assert rep.bound >= free.bound  # the stated factor is a relaxation
    assert rep.measured <= rep.bound


def test_sym_bound_almost_free_projective():
    act = ProjectiveSL2Action(7)
    Y = act.point_enum()  # all 8 points of the projective line
    rep = sym_bound_almost_free(act, Y, Fraction(3, 4), 3)
    assert rep.measured == len(act.element_enum())  # Y is invariant under everything
    assert rep.measured <= rep.bound
    assert rep.extras["bound_tuple"] <= rep.extras["bound_closed"]


def test_sym_bound_almost_free_affine():
    act = AffineFpAction(11)
    Y = PointSet(range(8))
    rep = sym_bound_almost_free(act, Y, Fraction(1, 2), 2)
    assert rep.measured <= rep.bound


def test_sym_bound_almost_free_size_precondition():
    act = ProjectiveSL2Action(5)
    Y = act.point_enum()
    with pytest.raises(HypothesisError):
        sym_bound_almost_free(act, Y, Fraction(3, 5), 3)


def test_sym_bound_linear_gl1():
    act = LinearFpAction(1, 11)
    Y = PointSet([(1,), (2,), (4,), (8,), (5,)])
    rep = sym_bound_linear(act, Y, Fraction(3, 5), Fraction(1, 4))
    assert rep.measured is not None
    assert rep.measured <= rep.bound
    assert rep.bound == Fraction(5) / (Fraction(3, 5) - Fraction(1, 5))


def test_sym_bound_linear_gl2():
    act = LinearFpAction(2, 5)
    # pairwise non-proportional nonzero vectors: every line meets Y once
    Y = PointSet([(1, 0), (0, 1), (1, 1), (1, 2), (1, 3), (1, 4), (2, 1), (3, 1)])
    rep = sym_bound_linear(act, Y, Fraction(1, 2), Fraction(1, 4))
    assert rep.measured <= rep.bound
    assert rep.extras["independent_tuples"] > 0


def test_sym_bound_linear_identity_only_within_bound():
    act = LinearActionQ(1)
    Y = PointSet([(Fraction(1),), (Fraction(2),), (Fraction(4),)])
    rep = sym_bound_linear(act, Y, Fraction(2, 3), Fraction(1, 2))
    assert rep.measured is None
    assert rep.bound > 0


def test_sym_bound_linear_concentration_rejection():
    act = LinearFpAction(2, 5)
    Y = PointSet([(1, 0), (2, 0), (3, 0), (0, 1)])  # three points on one line
    with pytest.raises(HypothesisError) as err:
        sym_bound_linear(act, Y, Fraction(1, 2), Fraction(1, 3))
    assert "spanned by" in str(err.value)


def test_affine_incidence_bound_arithmetic():
    act = AffineFpAction(11)
    Y = PointSet(range(10))
    rep = affine_incidence_sym_bound(None, Y, Fraction(1, 2))
    assert rep.bound == Fraction(10000, 9)

    rep2 = affine_incidence_sym_bound(act, PointSet(range(1, 7)), Fraction(1, 2))
    assert rep2.measured <= rep2.bound

    # boundary: alpha |Y| = 3 just above the validity threshold
    rep3 = affine_incidence_sym_bound(act, PointSet(range(6)), Fraction(1, 2))
    assert rep3.measured <= rep3.bound
    with pytest.raises(HypothesisError):
        affine_incidence_sym_bound(act, PointSet(range(4)), Fraction(1, 2))


def test_sl2_incidence_identity_curve():
    scan = sl2_incidence_scan(5, ElementSet([(1, 0, 0, 1)]), PointSet([0, 1, 2]), PointSet([0, 1, 2]), 1)
    assert scan.incidences == 3  # the diagonal
    assert scan.incidences == scan.incidences_mobius


def test_sl2_incidence_translation_curve():
    scan = sl2_incidence_scan(5, ElementSet([(1, 1, 0, 1)]), PointSet([0, 1]), PointSet([1, 2]), 1)
    assert scan.incidences == 2  # y = x + 1 hits both columns


def test_sl2_incidence_seeded_dual_evaluation():
    rng = random.Random(13)
    action = sl2_self_action(7)
    elems = action.element_enum().members
    for _ in range(5):
        A = ElementSet(rng.sample(elems, 8))
        X = PointSet(rng.sample(range(7), 4))
        Y = PointSet(rng.sample(range(7), 4))
        scan = sl2_incidence_scan(7, A, X, Y, 2)
        assert scan.incidences == scan.incidences_mobius
        if scan.pop_lambda is not None:
            assert scan.pop_holds


def test_sl2_growth_full_group_and_subgroups():
    action = sl2_self_action(3)
    rep = sl2_growth_check(3, action.element_enum())
    assert rep.branch == "full-cube"

    borel5 = ElementSet((a, b, 0, pow(a, 3, 5)) for a in range(1, 5) for b in range(5))
    rep2 = sl2_growth_check(5, borel5)
    assert rep2.branch == "proper-subgroup"
    assert rep2.subgroup_order == 20

    rep3 = sl2_growth_check(5, ElementSet([(1, 1, 0, 1), (0, 4, 1, 0)]))
    assert rep3.branch in ("full-cube", "exponent-growth")
    assert rep3.cube_relation_holds

    with pytest.raises(DescriptorError):
        sl2_growth_check(11, ElementSet([(1, 0, 0, 1)]))


def test_sl2_generating_pairs_reduction_counts():
    pairs = sl2_generating_pairs_reduced(3)
    assert len(pairs) < 24 * 24
    action = sl2_self_action(3)
    # spot check: representatives are genuine elements
    for g, h in pairs[:5]:
        assert action.normalize_element(g) == g
        assert action.normalize_element(h) == h


def test_subgroup_concentration_scan_recovers_cosets():
    action = sl2_self_action(5)
    borel = ElementSet((a, b, 0, pow(a, 3, 5)) for a in range(1, 5) for b in range(5))
    g0 = (1, 0, 1, 1)
    coset = ElementSet(action.mul(g0, h) for h in borel)
    scan = subgroup_concentration_scan(action, coset, subgroup_cap=60)
    assert scan.best_count == len(coset)
    assert scan.best_subgroup_order == 20

    # 80% concentration on a Borel coset, 20% noise
    rng = random.Random(31)
    noise = ElementSet(rng.sample(action.element_enum().members, 5))
    A = ElementSet(list(coset.members)[:16] + list(noise.members)[:4])
    scan2 = subgroup_concentration_scan(action, A, subgroup_cap=60)
    assert scan2.best_count >= 16
    assert scan2.best_subgroup_order == 20


def test_subgroup_concentration_whole_group_not_concentrated():
    action = sl2_self_action(3)
    scan = subgroup_concentration_scan(action, action.element_enum(), subgroup_cap=24)
    assert scan.best_count < 24


def test_growth_composition_psl2_f5():
    """Pipeline, approximate-group closure, and the growth trichotomy
    compose at p=5: the extracted set lands in exactly one branch."""
    from actcomb.bsg import approx_group_close, bsg_pipeline
    from actcomb.stats import measured_alpha

    ps = ProjectiveSL2Action(5)
    rng = random.Random(77)
    Y = PointSet(rng.sample(ps.point_enum().members, 5))
    sym = symmetry_set(ps, Y, Fraction(2, 5)).members
    A = ElementSet(rng.sample(sym.members, 8)).union(ElementSet([ps.identity]))
    alpha = measured_alpha(ps, A, Y)
    trace = bsg_pipeline(ps, A, Y, alpha, 1, sym_mode="exact")
    closed = approx_group_close(ps, trace.A_star)
    # the sign-normalized representatives are genuine det-1 matrices
    rep = sl2_growth_check(5, closed.closure)
    assert rep.branch in ("full-cube", "exponent-growth", "proper-subgroup")
    if rep.branch == "proper-subgroup":
        assert rep.subgroup_order < rep.group_order
    else:
        assert rep.cube_relation_holds
