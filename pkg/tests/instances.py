"""Seeded random instances across the built-in action families."""

import random
from fractions import Fraction

from actcomb import (
    AffineFpAction,
    CosetSpaceAction,
    DiagonalPowerAction,
    ElementSet,
    LinearActionQ,
    PointSet,
    ProjectiveSL2Action,
    cyclic_translation,
)
from actcomb.actions import carrier_cyclic, carrier_product, carrier_symmetric


def _sample(rng, population, k):
    k = min(k, len(population))
    return rng.sample(list(population), k)


def cyclic_instance(rng):
    n = rng.choice([8, 12, 20, 30, 60])
    act = cyclic_translation(n)
    A = ElementSet(_sample(rng, range(n), rng.randint(2, 6)))
    Y = PointSet(_sample(rng, range(n), rng.randint(3, min(10, n))))
    return act, A, Y


def affine_instance(rng):
    p = rng.choice([5, 7, 11, 13])
    act = AffineFpAction(p)
    elems = act.element_enum().members
    A = ElementSet(_sample(rng, elems, rng.randint(2, 6)))
    Y = PointSet(_sample(rng, range(p), rng.randint(3, min(8, p))))
    return act, A, Y


def coset_instance(rng):
    carrier = carrier_product([carrier_cyclic(6), carrier_cyclic(4)])
    act = CosetSpaceAction(carrier, [(1, 0)])
    elems = act.element_enum().members
    pts = act.point_enum().members
    A = ElementSet(_sample(rng, elems, rng.randint(2, 5)))
    Y = PointSet(_sample(rng, pts, rng.randint(2, 4)))
    return act, A, Y


def projective_instance(rng):
    p = rng.choice([3, 5])
    act = ProjectiveSL2Action(p)
    elems = act.element_enum().members
    pts = act.point_enum().members
    A = ElementSet(_sample(rng, elems, rng.randint(2, 5)))
    Y = PointSet(_sample(rng, pts, rng.randint(3, min(5, len(pts)))))
    return act, A, Y


def linear_q_instance(rng):
    act = LinearActionQ(2)
    mats = []
    while len(mats) < rng.randint(2, 4):
        m = tuple(tuple(Fraction(rng.randint(-2, 2)) for _ in range(2)) for _ in range(2))
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 0:
            mats.append(m)
    A = ElementSet(mats)
    pts = set()
    while len(pts) < rng.randint(3, 5):
        pts.add((Fraction(rng.randint(-3, 3)), Fraction(rng.randint(-3, 3))))
    return act, A, PointSet(pts)


def diagonal_instance(rng):
    base = cyclic_translation(rng.choice([7, 10, 12]))
    act = DiagonalPowerAction(base, 2, distinct_only=True)
    n = base.point_enum() and len(base.point_enum())
    elems = base.element_enum().members
    A = ElementSet(_sample(rng, elems, rng.randint(2, 4)))
    pts = set()
    while len(pts) < rng.randint(3, 6):
        a, b = rng.sample(range(n), 2)
        pts.add((a, b))
    return act, A, PointSet(pts)


FAMILIES = [
    cyclic_instance,
    affine_instance,
    coset_instance,
    projective_instance,
    linear_q_instance,
    diagonal_instance,
]


def instance_stream(seed, count):
    """Deterministic stream cycling through all six action families."""
    rng = random.Random(seed)
    for i in range(count):
        yield FAMILIES[i % len(FAMILIES)](rng)


def rich_instance(rng, min_alpha=Fraction(1, 4)):
    """An (action, A, Y, alpha) with A inside Sym_alpha(Y), alpha measured.

    Built by intersecting a random candidate pool with the symmetry set
    of a structured Y, retrying deterministically until nonempty.
    """
    from actcomb.stats import measured_alpha, overlap

    while True:
        n = rng.choice([12, 20, 24])
        act = cyclic_translation(n)
        width = rng.randint(4, max(5, n // 2))
        Y = PointSet(range(width))
        pool = ElementSet(_sample(rng, range(n), rng.randint(3, 8)))
        good = ElementSet(
            g for g in pool if overlap(act, g, Y) >= min_alpha * len(Y)
        ).union(ElementSet([0]))
        if len(good) >= 2:
            return act, good, Y, measured_alpha(act, good, Y)


_RICH_ACTIONS = None


def rich_any(rng, min_alpha=Fraction(1, 4)):
    """Rich instances across cyclic, affine, and projective actions."""
    global _RICH_ACTIONS
    from actcomb.stats import measured_alpha, symmetry_set

    if _RICH_ACTIONS is None:
        _RICH_ACTIONS = [
            cyclic_translation(20),
            cyclic_translation(24),
            AffineFpAction(11),
            AffineFpAction(13),
            ProjectiveSL2Action(5),
        ]
    while True:
        act = rng.choice(_RICH_ACTIONS)
        pts = act.point_enum().members
        Y = PointSet(_sample(rng, pts, rng.randint(4, min(8, len(pts)))))
        sym = symmetry_set(act, Y, min_alpha).members
        if len(sym) < 2:
            continue
        A = ElementSet(_sample(rng, sym.members, rng.randint(2, min(6, len(sym)))))
        A = A.union(ElementSet([act.identity]))
        return act, A, Y, measured_alpha(act, A, Y)
