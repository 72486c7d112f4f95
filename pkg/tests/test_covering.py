"""Covering machinery: injections, greedy covers, subset selection."""

import random
from fractions import Fraction

import pytest

from actcomb import AffineFpAction, ElementSet, HypothesisError, PointSet, cyclic_translation, image_set, inverse_set, product_set
from actcomb.actions import CosetSpaceAction, PermutationNaturalAction, carrier_cyclic, carrier_product, generate_set
from actcomb.covering import (
    cover_by_image,
    cover_symmetry,
    growth_in_subgroup,
    petridis_select,
    ruzsa_triangle,
)
from actcomb.stats import symmetry_set

from instances import instance_stream
from oracles import oracle_image


def test_ruzsa_triangle_identity_case():
    act = cyclic_translation(7)
    Y = PointSet([0, 3, 5])
    cert = ruzsa_triangle(act, ElementSet([0]), ElementSet([0]), Y)
    assert cert.lhs == len(Y) and cert.rhs == len(Y)


def test_ruzsa_triangle_example_z5():
    act = cyclic_translation(5)
    A1, A2, Y = ElementSet([0, 1]), ElementSet([0, 2]), PointSet([0, 1])
    cert = ruzsa_triangle(act, A1, A2, Y)
    image2 = oracle_image(act, A2, Y)
    assert cert.lhs == len(A1) * len(image2) == 2 * 4
    prod = {act.mul(a2, act.inv(a1)) for a1 in A1 for a2 in A2}
    assert cert.rhs == len(prod) * len(oracle_image(act, A1, Y))
    assert cert.lhs <= cert.rhs
    # mapping table is injective with the right domain size
    images = {tuple(row[1]) for row in cert.mapping}
    assert len(images) == cert.domain_size


def test_ruzsa_triangle_multiplicative_specialization():
    act = cyclic_translation(101)
    rng = random.Random(5)
    B = ElementSet(rng.sample(range(101), 6))
    A = ElementSet(rng.sample(range(101), 5))
    C = PointSet(rng.sample(range(101), 7))
    Cinv = PointSet((-c) % 101 for c in C)
    cert = ruzsa_triangle(act, B, A, Cinv)
    # |B| |A - C| <= |A - B| |B - C| in additive notation
    AC = {(a - c) % 101 for a in A for c in C}
    AB = {(a - b) % 101 for a in A for b in B}
    BC = {(b - c) % 101 for b in B for c in C}
    assert cert.lhs == len(B) * len(AC)
    assert cert.rhs == len(AB) * len(BC)
    assert len(B) * len(AC) <= len(AB) * len(BC)


def test_ruzsa_triangle_empty_rejected():
    act = cyclic_translation(5)
    with pytest.raises(HypothesisError):
        ruzsa_triangle(act, ElementSet([]), ElementSet([0]), PointSet([0]))


def test_growth_in_subgroup_s3_example():
    s3 = PermutationNaturalAction(3)
    ident = (0, 1, 2)
    swap = (1, 0, 2)
    cycle = (1, 2, 0)
    H = ElementSet([ident, swap])
    A = ElementSet([ident, cycle])
    B = ElementSet([ident, swap])
    out = growth_in_subgroup(s3, H, A, B)
    assert out.coset_count == 2 and out.meet_size == 2
    assert out.product_size == 4
    assert out.holds

    # A = B = H: |pi(A)| = 1, equality |H| = |AB|
    out2 = growth_in_subgroup(s3, H, H, H)
    assert out2.coset_count == 1 and out2.product_size == len(H)


def test_growth_in_subgroup_seeded_z12():
    act = cyclic_translation(12)
    H = ElementSet([0, 4, 8])
    rng = random.Random(17)
    for _ in range(10):
        A = ElementSet(rng.sample(range(12), rng.randint(2, 6)))
        B = ElementSet(rng.sample(range(12), rng.randint(2, 6)))
        if not any(b in H for b in B):
            continue
        out = growth_in_subgroup(act, H, A, B)
        assert out.holds


def test_growth_in_subgroup_rejections():
    act = cyclic_translation(12)
    with pytest.raises(HypothesisError):
        growth_in_subgroup(act, ElementSet([0, 4, 8]), ElementSet([1]), ElementSet([1, 2]))
    with pytest.raises(HypothesisError):
        growth_in_subgroup(act, ElementSet([0, 5]), ElementSet([1]), ElementSet([0]))


def test_cover_by_image_z5_example():
    act = cyclic_translation(5)
    A, Y = ElementSet([0, 1]), PointSet([0, 1, 2])
    cert = cover_by_image(act, A, Y)
    assert cert.Z == PointSet([0, 2])
    diff = product_set(act, inverse_set(act, A), A)
    assert Y.issubset(image_set(act, diff, cert.Z))
    for iq in cert.inequalities:
        assert iq.holds


def test_cover_by_image_subgroup_single_orbit():
    act = cyclic_translation(12)
    H = ElementSet([0, 3, 6, 9])
    Y = PointSet([0, 3, 6, 9])
    cert = cover_by_image(act, H, Y)
    assert len(cert.Z) == 1 and cert.K == 1


def test_cover_by_image_sharpness_product_construction():
    # G1 x G2 acting on the cosets of G1 x {e}: the action factors through
    # the second coordinate, and stabilizers have size |G1| = 6.
    carrier = carrier_product([carrier_cyclic(6), carrier_cyclic(12)])
    act = CosetSpaceAction(carrier, [(1, 0)])
    A2 = [0, 4, 8]
    A = ElementSet((g1, a) for g1 in range(6) for a in A2)
    Y = act.point_enum()  # all 12 cosets
    cert = cover_by_image(act, A, Y)
    bound = next(iq for iq in cert.inequalities if iq.name == "cover-bound-max-stab")
    assert Fraction(len(cert.Z)) == bound.rhs  # meets the bound exactly
    assert len(cert.Z) == 4


def test_cover_symmetry_set_stabilizer_case():
    act = cyclic_translation(12)
    B = ElementSet([0, 4, 8])
    Y = PointSet([0, 4, 8, 1, 5, 9])
    cert = cover_symmetry(act, B, Y, Fraction(1))
    assert cert.Y_covered == Y
    assert len(cert.Z) == 2  # one point per orbit
    for iq in cert.inequalities:
        assert iq.holds


def test_cover_symmetry_z12_half_level():
    act = cyclic_translation(12)
    Y = PointSet(range(8))
    B = symmetry_set(act, Y, Fraction(1, 2)).members
    cert = cover_symmetry(act, B, Y, Fraction(1, 2))
    for iq in cert.inequalities:
        assert iq.holds
    assert cert.Y_covered.issubset(Y)


def test_cover_symmetry_affine_dilations():
    act = AffineFpAction(11)
    Y = generate_set(act, {"kind": "geometric_progression", "start": 1, "ratio": 2, "length": 6}, "points")
    alpha = Fraction(1, 3)
    sym = symmetry_set(act, Y, alpha).members
    B = ElementSet(g for g in sym if g[1] == 0)  # dilation part of the symmetry set
    cert = cover_symmetry(act, B, Y, alpha)
    for iq in cert.inequalities:
        assert iq.holds


def test_cover_symmetry_rejects_poor_elements():
    act = cyclic_translation(12)
    with pytest.raises(HypothesisError) as err:
        cover_symmetry(act, ElementSet([6]), PointSet(range(4)), Fraction(1, 2))
    assert "6" in str(err.value)


def test_petridis_identity_case():
    act = cyclic_translation(7)
    out = petridis_select(act, ElementSet([0]), PointSet([0, 2]), [ElementSet([0, 1])])
    assert out.B == ElementSet([0])
    (C, lhs, rhs, ok), = out.rows
    assert ok


def test_petridis_progressions():
    act = cyclic_translation(101)
    A = ElementSet(range(6))
    Y = PointSet(range(20))
    family = [ElementSet(range(k)) for k in (2, 3, 4)]
    out = petridis_select(act, A, Y, family)
    assert out.family == "exhaustive"
    for _, lhs, rhs, ok in out.rows:
        assert ok
    # minimizing subset of an interval acting on an interval is the full set
    assert out.ratio <= Fraction(len(image_set(act, A, Y)), len(A))


def test_petridis_seeded_affine_rows_recorded():
    act = AffineFpAction(7)
    rng = random.Random(3)
    elems = act.element_enum().members
    A = ElementSet(rng.sample(elems, 4))
    Y = PointSet(rng.sample(range(7), 4))
    family = [ElementSet(rng.sample(elems, 2)) for _ in range(3)]
    out = petridis_select(act, A, Y, family)
    assert len(out.rows) == 3  # failures, if any, are recorded not hidden


def test_stabilizer_product_bound_instances():
    from actcomb.covering import stabilizer_product_bound

    aff = AffineFpAction(7)
    H = ElementSet((a, 0) for a in range(1, 7))
    iq = stabilizer_product_bound(aff, H, H, 0)
    assert iq.lhs <= iq.rhs

    rng = random.Random(41)
    for act, A, Y in instance_stream(59, 12):
        B = ElementSet(rng.sample(A.members, max(1, len(A) - 1)))
        iq = stabilizer_product_bound(act, A, B, Y.first())
        assert iq.holds
