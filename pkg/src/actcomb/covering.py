"""Constructive covering machinery.

The covering certificates are built by the greedy maximal-disjoint-image
construction (scanning in canonical order) and carry every quantity
needed to re-verify the covering, disjointness, and size bounds from
scratch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .canon import canon_str, fraction_str, sort_key
from .core import (
    ElementSet,
    GroupAction,
    HypothesisError,
    PointSet,
    count_rAinvA,
    fixed_in,
    image_set,
    inverse_set,
    product_set,
    stabilizer_in,
)
from .stats import Inequality, overlap
from .core import CountMap


@dataclass(frozen=True)
class InjectionCertificate:
    """An explicit injection A1 x A2(Y) -> A2 A1^{-1} x A1(Y) witnessing
    |A1| |A2(Y)| <= |A2 A1^{-1}| |A1(Y)|."""

    kind: str = field(default="image-triangle", init=False)
    mapping: tuple = ()  # ((a, x), (u, v)) rows
    representatives: tuple = ()  # (x, a_x, y_x) rows
    domain_size: int = 0
    lhs: int = 0
    rhs: int = 0

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "mapping": [
                [[canon_str(a), canon_str(x)], [canon_str(u), canon_str(v)]]
                for (a, x), (u, v) in self.mapping
            ],
            "representatives": [
                [canon_str(x), canon_str(ax), canon_str(yx)] for x, ax, yx in self.representatives
            ],
            "domain_size": self.domain_size,
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


def ruzsa_triangle(action: GroupAction, A1: ElementSet, A2: ElementSet, Y: PointSet) -> InjectionCertificate:
    """Triangle inequality for image sets, by explicit injection.

    For each x in A2(Y) pick the canonically first (a_x, y_x) with
    a_x(y_x) = x, then map (a, x) to (a_x a^{-1}, a(y_x)).
    """
    if not A1 or not A2:
        raise HypothesisError("A1 and A2 must be nonempty")
    act, mul, inv = action.act, action.mul, action.inv
    reps: dict = {}
    for a in A2:
        for y in Y:
            x = act(a, y)
            if x not in reps:
                reps[x] = (a, y)
    image2 = PointSet(reps)
    codomain_left = product_set(action, A2, inverse_set(action, A1))
    image1 = image_set(action, A1, Y)
    mapping = []
    seen = set()
    for a in A1:
        ai = inv(a)
        for x in image2:
            ax, yx = reps[x]
            u, v = mul(ax, ai), act(a, yx)
            if u not in codomain_left or v not in image1:
                raise AssertionError("triangle image left its codomain; this should be impossible")
            if (u, v) in seen:
                raise AssertionError("triangle map collided; this should be impossible")
            seen.add((u, v))
            mapping.append(((a, x), (u, v)))
    lhs = len(A1) * len(image2)
    rhs = len(codomain_left) * len(image1)
    cert = InjectionCertificate(
        mapping=tuple(mapping),
        representatives=tuple(sorted(((x, a, y) for x, (a, y) in reps.items()), key=lambda r: sort_key(r[0]))),
        domain_size=lhs,
        lhs=lhs,
        rhs=rhs,
    )
    if lhs > rhs:
        raise AssertionError("triangle inequality failed; this should be impossible")
    return cert


@dataclass(frozen=True)
class GrowthComparison:
    """|pi(A)| |B ∩ H| <= |AB| for the quotient map by a subgroup H."""

    kind: str = field(default="quotient-growth", init=False)
    coset_count: int = 0
    meet_size: int = 0
    product_size: int = 0

    @property
    def holds(self) -> bool:
        return self.coset_count * self.meet_size <= self.product_size

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "coset_count": self.coset_count,
            "meet_size": self.meet_size,
            "product_size": self.product_size,
            "holds": self.holds,
        }


def growth_in_subgroup(action: GroupAction, H: ElementSet, A: ElementSet, B: ElementSet) -> GrowthComparison:
    """Growth transfers through a quotient: count distinct cosets aH, the
    meet |B ∩ H|, and compare with |AB|.  H must actually be a subgroup."""
    mul, inv = action.mul, action.inv
    ident = action.identity
    if ident not in H or any(inv(h) not in H for h in H):
        raise HypothesisError("H is not a subgroup (identity/inverse check failed)")
    for h1, h2 in itertools.product(H, H):
        if mul(h1, h2) not in H:
            raise HypothesisError("H is not a subgroup (closure check failed)")
    meet = sum(1 for b in B if b in H)
    if meet == 0:
        raise HypothesisError("B ∩ H is empty")
    hlist = list(H)
    reps = {min((mul(a, h) for h in hlist), key=sort_key) for a in A}
    prod = product_set(action, A, B)
    out = GrowthComparison(coset_count=len(reps), meet_size=meet, product_size=len(prod))
    if not out.holds:
        raise AssertionError("quotient growth inequality failed; this should be impossible")
    return out


def stabilizer_product_bound(action: GroupAction, A: ElementSet, B: ElementSet, x) -> Inequality:
    """Set-wise orbit-stabilizer bound: |A ∩ stab(x)| |B(x)| <= |BA|."""
    if not A or not B:
        raise HypothesisError("A and B must be nonempty")
    meet = len(stabilizer_in(action, A, x))
    orbit = len(image_set(action, B, PointSet([x])))
    prod = len(product_set(action, B, A))
    iq = Inequality("stabilizer-product", Fraction(meet * orbit), Fraction(prod))
    if not iq.holds:
        raise AssertionError("stabilizer product bound failed; this should be impossible")
    return iq


@dataclass(frozen=True)
class CoverCertificate:
    """Greedy covering data: Z with disjoint images covering Y (or Y'),
    plus both size-bound evaluations (max-stabilizer and fixed-point-sum)."""

    kind: str = "image-cover"
    Z: PointSet = None
    Y_covered: PointSet = None
    image_size: int = 0
    K: Optional[Fraction] = None
    alpha: Optional[Fraction] = None
    disjoint_total: int = 0
    inequalities: tuple = ()

    def payload(self) -> dict:
        out = {
            "kind": self.kind,
            "Z": [canon_str(z) for z in self.Z],
            "Y_covered": [canon_str(y) for y in self.Y_covered],
            "image_size": self.image_size,
            "disjoint_total": self.disjoint_total,
            "inequalities": [iq.payload() for iq in self.inequalities],
        }
        if self.K is not None:
            out["K"] = fraction_str(self.K)
        if self.alpha is not None:
            out["alpha"] = fraction_str(self.alpha)
        return out


def cover_by_image(action: GroupAction, A: ElementSet, Y: PointSet) -> CoverCertificate:
    """Greedy maximal Z in Y with pairwise disjoint images A(z).

    Certifies Y inside A^{-1}A(Z), the disjointness identity
    |A(Z)| = sum_z |A(z)|, and two upper bounds for |Z|: via the largest
    stabilizer meet of A^{-1}A and via the fixed-point sum.
    """
    if not A:
        raise HypothesisError("A must be nonempty")
    if not Y:
        raise HypothesisError("Y must be nonempty")
    act = action.act
    Z = []
    seen: set = set()
    disjoint_total = 0
    for y in Y:  # canonical order
        img = {act(a, y) for a in A}
        if seen.isdisjoint(img):
            Z.append(y)
            seen |= img
            disjoint_total += len(img)
    Zset = PointSet(Z)
    if len(image_set(action, A, Zset)) != disjoint_total:
        raise AssertionError("greedy images not disjoint; this should be impossible")
    diff = product_set(action, inverse_set(action, A), A)
    covered = image_set(action, diff, Zset)
    if not Y.issubset(covered):
        raise AssertionError("greedy cover missed a point; this should be impossible")
    AY = image_set(action, A, Y)
    K = Fraction(len(AY), len(Y))
    max_stab = max(len(stabilizer_in(action, diff, z)) for z in Zset)
    rmap = count_rAinvA(action, A)
    fix_sum = 0
    for g, r in rmap.items():
        if g == action.identity:
            continue
        fix_sum += len(fixed_in(action, g, Zset)) * r
    nZ, nA, nY = len(Zset), len(A), len(Y)
    ineqs = (
        Inequality("cover-bound-max-stab", Fraction(nZ), K * nY * max_stab / nA),
        Inequality(
            "cover-bound-fix-sum",
            Fraction(nZ),
            (K * nY / nA) * (1 + Fraction(fix_sum, nA * nZ)),
        ),
    )
    cert = CoverCertificate(
        kind="image-cover",
        Z=Zset,
        Y_covered=Y,
        image_size=len(AY),
        K=K,
        alpha=None,
        disjoint_total=disjoint_total,
        inequalities=ineqs,
    )
    for iq in ineqs:
        if not iq.holds:
            raise AssertionError(f"cover bound {iq.name} failed; this should be impossible")
    return cert


def cover_symmetry(action: GroupAction, B: ElementSet, Y: PointSet, alpha) -> CoverCertificate:
    """Covering for a set of rich transformations.

    Requires every b in B to have |Y ∩ bY| >= alpha|Y| (rejected with the
    offending element otherwise).  Builds the popular subset Y' of points
    moved into Y by at least alpha|B|/2 transformations, then a greedy
    maximal Z in Y' whose within-Y images are disjoint; certifies the
    coverage, the size floor for Y', and both |Z| bounds.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise HypothesisError(f"alpha must lie in (0, 1], got {alpha}")
    if not B:
        raise HypothesisError("B must be nonempty")
    if not Y:
        raise HypothesisError("Y must be nonempty")
    act = action.act
    thr = alpha * len(Y)
    for b in B:
        if overlap(action, b, Y) < thr:
            raise HypothesisError(f"element {canon_str(b)} has overlap below alpha|Y|")
    yset = Y.raw()
    weights = CountMap({y: sum(1 for b in B if act(b, y) in yset) for y in Y})
    pop_thr = alpha * len(B) / 2
    P = PointSet(y for y in Y if weights[y] >= pop_thr)
    mass = sum(weights[y] for y in P)
    total = weights.total()

    Z = []
    seen: set = set()
    disjoint_total = 0
    for y in P:
        img = {x for x in (act(b, y) for b in B) if x in yset}
        if img and seen.isdisjoint(img):
            Z.append(y)
            seen |= img
            disjoint_total += len(img)
    Zset = PointSet(Z)
    diff = product_set(action, inverse_set(action, B), B)
    covered = image_set(action, diff, Zset)
    if not P.issubset(covered):
        raise AssertionError("symmetry cover missed a point; this should be impossible")

    prod_BBinv = product_set(action, B, inverse_set(action, B))
    max_stab = max(len(stabilizer_in(action, diff, z)) for z in Zset) if Zset else 0
    rmap = count_rAinvA(action, B)
    stab_sum = 0
    for z in Zset:
        for g, r in rmap.items():
            if act(g, z) == z:
                stab_sum += r
    fix_sum = 0
    for g, r in rmap.items():
        if g == action.identity:
            continue
        fix_sum += len(fixed_in(action, g, Zset)) * r
    nB, nY, nZ, nP = len(B), len(Y), len(Zset), len(P)
    avg_form = (4 * nY / (alpha**2 * nB**2)) * Fraction(stab_sum, nZ)
    avg_form_fix = (4 * nY / (alpha**2 * nB)) * (1 + Fraction(fix_sum, nB * nZ))
    if avg_form != avg_form_fix:
        raise AssertionError("the two average-form evaluations disagree; this should be impossible")
    ineqs = (
        Inequality("popular-mass", alpha * nB * nY / 2, Fraction(mass)),
        Inequality("covered-floor", alpha * nB * nY / (2 * len(prod_BBinv)), Fraction(nP)),
        Inequality("cover-bound-max-stab", Fraction(nZ), 2 * nY * max_stab / (alpha * nB)),
        Inequality("cover-bound-average", Fraction(nZ), avg_form),
    )
    if len(PointSet(x for z in Zset for x in (act(b, z) for b in B) if x in yset)) != disjoint_total:
        raise AssertionError("within-Y images not disjoint; this should be impossible")
    cert = CoverCertificate(
        kind="symmetry-cover",
        Z=Zset,
        Y_covered=P,
        image_size=len(image_set(action, B, Y)),
        K=None,
        alpha=alpha,
        disjoint_total=disjoint_total,
        inequalities=ineqs,
    )
    for iq in ineqs:
        if not iq.holds:
            raise AssertionError(f"symmetry cover bound {iq.name} failed; this should be impossible")
    return cert


@dataclass(frozen=True)
class SubsetRatioSelection:
    """The subset of A minimizing |B(Y)|/|B| over a declared family, with a
    per-C verification table for |C B(Y)| <= |B(Y)| |C(Y)| / |B|."""

    kind: str = field(default="subset-image-ratio", init=False)
    B: ElementSet = None
    ratio: Fraction = Fraction(0)
    family: str = ""
    rows: tuple = ()  # (C descriptor, lhs, rhs, holds)

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "B": [canon_str(b) for b in self.B],
            "ratio": fraction_str(self.ratio),
            "family": self.family,
            "rows": [
                {"C": [canon_str(c) for c in C], "lhs": lhs, "rhs": fraction_str(rhs), "holds": ok}
                for C, lhs, rhs, ok in self.rows
            ],
        }


def petridis_select(
    action: GroupAction, A: ElementSet, Y: PointSet, C_family: list[ElementSet]
) -> SubsetRatioSelection:
    """Select a nonempty B in A minimizing |B(Y)|/|B| and tabulate the
    product-image inequality for each supplied C.

    The search family is every nonempty subset when |A| <= 12, otherwise
    all singletons, all canonical-order prefixes, and A itself.  Failing
    rows are recorded, never suppressed.
    """
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    members = A.members
    if len(members) <= 12:
        family_name = "exhaustive"
        candidates = []
        for r in range(1, len(members) + 1):
            candidates.extend(itertools.combinations(members, r))
    else:
        family_name = "singletons+prefixes"
        candidates = [(a,) for a in members]
        candidates += [members[: i + 1] for i in range(1, len(members))]
    best: Optional[tuple] = None
    best_ratio: Optional[Fraction] = None
    for cand in candidates:
        Bset = ElementSet(cand)
        ratio = Fraction(len(image_set(action, Bset, Y)), len(Bset))
        if best_ratio is None or ratio < best_ratio:
            best, best_ratio = Bset, ratio
    BY = image_set(action, best, Y)
    rows = []
    for C in C_family:
        if not C:
            raise HypothesisError("C must be nonempty")
        lhs = len(image_set(action, C, BY))
        rhs = Fraction(len(BY) * len(image_set(action, C, Y)), len(best))
        rows.append((C, lhs, rhs, Fraction(lhs) <= rhs))
    return SubsetRatioSelection(B=best, ratio=best_ratio, family=family_name, rows=tuple(rows))
