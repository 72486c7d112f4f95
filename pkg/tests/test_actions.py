"""Built-in actions: invariants, descriptors, and generators."""

import pytest

from actcomb import (
    AffineFpAction,
    CosetSpaceAction,
    DescriptorError,
    DiagonalPowerAction,
    ElementSet,
    LinearActionQ,
    LinearFpAction,
    PointSet,
    ProjectiveSL2Action,
    ClosureCapError,
    cyclic_translation,
    generate_set,
    generated_subgroup,
    image_set,
    make_action,
)
from actcomb.actions import (
    PermutationNaturalAction,
    SelfTranslationAction,
    carrier_cyclic,
    carrier_product,
    carrier_sl2,
    carrier_symmetric,
)
from fractions import Fraction

from oracles import oracle_mulclose


def test_make_action_roundtrip_descriptors():
    descs = [
        {"kind": "cyclic", "n": 10},
        {"kind": "integer"},
        {"kind": "affine", "p": 7},
        {"kind": "perm_natural", "n": 4},
        {"kind": "projective_sl2", "p": 5},
        {"kind": "linear_q", "n": 2},
        {"kind": "linear_fp", "n": 2, "p": 3},
        {"kind": "translation", "group": {"kind": "sl2", "p": 3}},
        {
            "kind": "coset",
            "group": {"kind": "product", "factors": [{"kind": "cyclic", "n": 6}, {"kind": "cyclic", "n": 4}]},
            "subgroup_gens": ["(1,0)"],
        },
        {"kind": "diagonal_power", "base": {"kind": "cyclic", "n": 7}, "n": 2, "distinct_only": True},
    ]
    for desc in descs:
        act = make_action(desc)
        e = act.identity
        assert act.mul(e, e) == e


def test_make_action_rejects_bad_descriptors():
    with pytest.raises(DescriptorError):
        make_action({"kind": "affine", "p": 9})  # composite modulus
    with pytest.raises(DescriptorError):
        make_action({"kind": "cyclic", "n": 0})
    with pytest.raises(DescriptorError):
        make_action({"kind": "nope"})
    act = LinearActionQ(2)
    with pytest.raises(DescriptorError):
        act.normalize_element(((1, 2), (2, 4)))  # singular


def test_affine_group_order_and_fixed_points():
    for p in (3, 5, 7, 11, 13):
        act = AffineFpAction(p)
        G = act.element_enum()
        assert len(G) == p * (p - 1)
        X = act.point_enum()
        for g in G:
            if g == (1, 0):
                continue
            assert sum(1 for x in X if act.act(g, x) == x) <= 1


def test_affine_transporter_pencil():
    act = AffineFpAction(5)
    t = act.transporter_enum(1, 3)
    assert t == ElementSet((a, (3 - a) % 5) for a in range(1, 5))
    assert len(t) == 4


def test_projective_sl2_orders():
    assert len(ProjectiveSL2Action(5).element_enum()) == 60
    assert len(ProjectiveSL2Action(3).element_enum()) == 12
    assert len(ProjectiveSL2Action(2).element_enum()) == 6


def test_projective_sl2_fixed_points_at_most_two():
    for p in (2, 3, 5, 7):
        act = ProjectiveSL2Action(p)
        X = act.point_enum()
        for g in act.element_enum():
            if g == act.identity:
                continue
            assert sum(1 for x in X if act.act(g, x) == x) <= 2


def test_projective_action_well_defined():
    act = ProjectiveSL2Action(5)
    # x -> -1/x as a det-1 matrix, normalized up to sign.
    g = act.normalize_element((0, 1, -1, 0))
    assert act.act(g, 0) == "inf"
    assert act.act(g, "inf") == 0
    assert act.act(g, 2) == (-pow(2, 3, 5)) % 5  # -1/2 = 2 mod 5


def test_coset_action_approximate_orbit_is_projection():
    carrier = carrier_product([carrier_cyclic(6), carrier_cyclic(4)])
    act = CosetSpaceAction(carrier, [(1, 0)])
    A = ElementSet([(0, 0), (1, 1), (2, 3), (4, 1)])
    base_point = act.coset_rep(carrier.identity)
    orbit = image_set(act, A, PointSet([base_point]))
    projected = PointSet(act.coset_rep(a) for a in A)
    assert orbit == projected


def test_coset_action_transporter():
    carrier = carrier_product([carrier_cyclic(6), carrier_cyclic(4)])
    act = CosetSpaceAction(carrier, [(1, 0)])
    pts = act.point_enum().members
    x, y = pts[0], pts[1]
    t = act.transporter_enum(x, y)
    assert t
    for g in t:
        assert act.act(g, x) == y


def test_sl2_carrier_orders():
    for p, order in ((2, 6), (3, 24), (5, 120), (7, 336)):
        assert len(carrier_sl2(p).elements) == order


def test_generated_subgroup_sl2f3_standard_generators():
    act = SelfTranslationAction(carrier_sl2(3))
    gens = ElementSet([(1, 1, 0, 1), (1, 0, 1, 1)])
    H = generated_subgroup(act, gens, cap=30)
    assert len(H) == 24
    assert H.raw() == frozenset(oracle_mulclose(act, gens))


def test_generated_subgroup_cap_violation():
    act = SelfTranslationAction(carrier_sl2(3))
    with pytest.raises(ClosureCapError):
        generated_subgroup(act, ElementSet([(1, 1, 0, 1), (1, 0, 1, 1)]), cap=10)


def test_diagonal_power_free_when_fixed_points_bounded():
    base = AffineFpAction(5)  # non-identity elements fix at most one point
    act = DiagonalPowerAction(base, 2, distinct_only=True)
    assert act.free
    X2 = act.point_enum()
    for g in base.element_enum():
        if g == base.identity:
            continue
        assert all(act.act(g, x) != x for x in X2)


def test_diagonal_power_space_closed():
    base = cyclic_translation(5)
    act = DiagonalPowerAction(base, 2, distinct_only=True)
    X2 = act.point_enum()
    assert len(X2) == 20
    for g in [1, 3]:
        for x in X2:
            assert act.act(g, x) in X2


def test_linear_fp_enumeration():
    act = LinearFpAction(2, 5)
    assert len(act.element_enum()) == 480  # (25-1)(25-5)
    assert len(act.point_enum()) == 25
    act1 = LinearFpAction(1, 11)
    assert len(act1.element_enum()) == 10


def test_linear_q_exactness():
    act = LinearActionQ(2)
    g = act.normalize_element(((1, 1), (0, 1)))
    gi = act.inv(g)
    assert act.mul(g, gi) == act.identity
    x = act.normalize_point((Fraction(1, 3), Fraction(2, 7)))
    assert act.act(act.identity, x) == x


def test_generate_set_kinds():
    act = cyclic_translation(101)
    ap = generate_set(act, {"kind": "arithmetic_progression", "start": 0, "step": 3, "length": 10}, "points")
    assert ap == PointSet(range(0, 30, 3))
    gp = generate_set(act, {"kind": "geometric_progression", "start": 1, "ratio": 2, "length": 5}, "points")
    assert gp == PointSet([1, 2, 4, 8, 16])
    r1 = generate_set(act, {"kind": "random", "size": 20, "seed": 7}, "points")
    r2 = generate_set(act, {"kind": "random", "size": 20, "seed": 7}, "points")
    assert r1 == r2 and len(r1) == 20
    u = generate_set(
        act,
        {"kind": "union", "of": [{"kind": "explicit", "values": [1, 2]}, {"kind": "explicit", "values": [2, 3]}]},
        "points",
    )
    assert u == PointSet([1, 2, 3])


def test_generate_set_subgroup_coset_and_perturb():
    act = AffineFpAction(11)
    dil = generate_set(act, {"kind": "subgroup_coset", "gens": ["(2,0)"]}, "elements")
    assert len(dil) == 10  # 2 generates F_11^*
    shifted = generate_set(act, {"kind": "subgroup_coset", "gens": ["(2,0)"], "rep": "(1,3)"}, "elements")
    assert len(shifted) == 10 and shifted != dil
    pert = generate_set(
        act,
        {"kind": "perturb", "base": {"kind": "subgroup_coset", "gens": ["(2,0)"]}, "remove": 2, "add": 2, "seed": 3},
        "elements",
    )
    assert len(pert) == 10
    assert len(pert.intersection(dil)) == 8


def test_generate_set_rejections():
    act = cyclic_translation(10)
    with pytest.raises(DescriptorError):
        generate_set(act, {"kind": "random", "size": 100, "seed": 1}, "points")
    with pytest.raises(DescriptorError):
        generate_set(act, {"kind": "explicit", "values": ["(1,2)"]}, "points")


def test_coset_action_nonabelian_ambient():
    s4 = carrier_symmetric(4)
    act = CosetSpaceAction(s4, [(1, 0, 2, 3)])  # swap the first two letters
    assert len(act.subgroup) == 2
    assert len(act.point_enum()) == 12
    # the action axioms hold on representatives
    e = act.identity
    pts = act.point_enum().members[:4]
    els = act.element_enum().members[:6]
    for g in els:
        for h in els:
            gh = act.mul(g, h)
            for x in pts:
                assert act.act(gh, x) == act.act(g, act.act(h, x))
    for x in pts:
        assert act.act(e, x) == x
    # transporters move cosets as claimed
    x, y = pts[0], pts[1]
    for g in act.transporter_enum(x, y):
        assert act.act(g, x) == y


def test_diagonal_power_transporter():
    base = cyclic_translation(10)
    act = DiagonalPowerAction(base, 2, distinct_only=True)
    t = act.transporter_enum((1, 3), (4, 6))
    assert t == ElementSet([3])
    assert act.transporter_enum((1, 3), (4, 7)) == ElementSet([])


def test_linear_q_transporter_dimension_one():
    from fractions import Fraction as F

    act = LinearActionQ(1)
    t = act.transporter_enum((F(2),), (F(3),))
    assert t == ElementSet([((F(3, 2),),)])
    assert act.transporter_enum((F(0),), (F(3),)) is None


def test_symmetrized_power_cap():
    from actcomb.actions import IntegerTranslationAction
    from actcomb import symmetrized_power

    z = IntegerTranslationAction()
    A = ElementSet(range(10))
    with pytest.raises(ClosureCapError):
        symmetrized_power(z, A, 6, cap=40)
