"""Symmetry sets, action energy, energy bounds, and the constructive
conversions between small image set, large energy, and symmetry-set
membership.

Thresholds like |Y ∩ gY| >= alpha*|Y| are exact rational comparisons;
no floating point is used anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .canon import canon_str, fraction_str, sort_key
from .core import (
    CanonSet,
    CapabilityError,
    CountMap,
    ElementSet,
    GroupAction,
    HypothesisError,
    PointSet,
    Relation,
    count_rAY,
    count_rAinvA,
    image_set,
    inverse_set,
)


def _check_alpha(alpha) -> Fraction:
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise HypothesisError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha


def overlap(action: GroupAction, g, Y: PointSet) -> int:
    """|Y ∩ gY|, exactly."""
    act = action.act
    return sum(1 for y in Y if act(g, y) in Y)


def measured_alpha(action: GroupAction, A: ElementSet, Y: PointSet) -> Fraction:
    """The largest alpha with A inside Sym_alpha(Y): min_a |Y ∩ aY| / |Y|.

    Raises when some element has empty overlap (no positive level works).
    """
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    worst = min(overlap(action, a, Y) for a in A)
    if worst == 0:
        raise HypothesisError("some element has empty overlap with Y; no positive alpha fits")
    return Fraction(worst, len(Y))


def overlap_map(action: GroupAction, gs, Y: PointSet) -> dict:
    """Overlaps for many candidates; uses the table kernels when available."""
    model = action.index_model() if len(gs) * len(Y) >= 2048 else None
    if model is not None and model.act_tab is not None:
        counts = model.overlap_counts(gs, Y)
        return dict(zip(list(gs), counts))
    act = action.act
    yset = Y.raw()
    out = {}
    for g in gs:
        out[g] = sum(1 for y in Y if act(g, y) in yset)
    return out


@dataclass(frozen=True)
class SymmetryReport:
    """The alpha-symmetry set of Y within a stated candidate universe."""

    kind: str = field(default="symmetry-set", init=False)
    alpha: Fraction = Fraction(1)
    members: ElementSet = None
    overlaps: CountMap = None
    candidate_universe: str = "full_enumeration"

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": fraction_str(self.alpha),
            "members": [canon_str(g) for g in self.members],
            "overlaps": {canon_str(g): c for g, c in self.overlaps.items()},
            "candidate_universe": self.candidate_universe,
        }


def transporter_universe(action: GroupAction, Y: PointSet) -> Optional[ElementSet]:
    """Union of all transporters between points of Y.

    Contains every g with |Y ∩ gY| >= 1, so it is a complete candidate
    universe for any symmetry level.
    """
    acc: set = set()
    for y in Y:
        for y2 in Y:
            t = action.transporter_enum(y, y2)
            if t is None:
                return None
            acc.update(t.raw())
    return ElementSet(acc)


def symmetry_set(
    action: GroupAction,
    Y: PointSet,
    alpha,
    candidates: Optional[ElementSet] = None,
) -> SymmetryReport:
    """All g with |Y ∩ gY| >= alpha*|Y| within the candidate universe.

    The universe is, in order of preference: the supplied candidates
    (closed under inversion and extended by the identity), the union of
    transporters between points of Y, or the full group enumeration.
    """
    alpha = _check_alpha(alpha)
    if not Y:
        raise HypothesisError("Y must be nonempty")
    if candidates is not None:
        universe = candidates.union(inverse_set(action, candidates), ElementSet([action.identity]))
        tag = "supplied"
    else:
        universe = transporter_universe(action, Y)
        tag = "transporter_accumulation"
        if universe is None:
            universe = action.element_enum()
            tag = "full_enumeration"
            if universe is None:
                raise CapabilityError(
                    "no candidates, no transporter enumeration and no element enumeration"
                )
    threshold = alpha * len(Y)
    ov = overlap_map(action, universe, Y)
    members = [g for g in universe if ov[g] >= threshold]
    # The identity always qualifies; with the transporter universe it is
    # present because trans(y, y) contains it for every y.
    return SymmetryReport(
        alpha=alpha,
        members=ElementSet(members),
        overlaps=CountMap({g: ov[g] for g in members}),
        candidate_universe=tag,
    )


def set_stabilizer_full(action: GroupAction, Y: PointSet) -> ElementSet:
    """The full set stabilizer (symmetry set at level one)."""
    return symmetry_set(action, Y, Fraction(1)).members


# ---------------------------------------------------------------------------
# action energy


@dataclass(frozen=True)
class EnergyReport:
    """Action energy evaluated three independent ways (all must agree)."""

    kind: str = field(default="action-energy", init=False)
    value: int = 0
    by_pairs: int = 0
    by_repr: int = 0
    by_fibers: int = 0

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "by_pairs": self.by_pairs,
            "by_repr": self.by_repr,
            "by_fibers": self.by_fibers,
        }


def action_energy(action: GroupAction, A: ElementSet, Y: PointSet) -> EnergyReport:
    """Number of quadruples a1(y1) = a2(y2), computed by pairwise image
    overlaps, by difference-representation counts, and by image fibers."""
    act, mul, inv = action.act, action.mul, action.inv

    images = {a: frozenset(act(a, y) for y in Y) for a in A}
    by_pairs = sum(len(images[a1] & images[a2]) for a1 in A for a2 in A)

    yset = Y.raw()
    rA: dict = {}
    for a1 in A:
        a1i = inv(a1)
        for a2 in A:
            g = mul(a1i, a2)
            rA[g] = rA.get(g, 0) + 1
    by_repr = 0
    for g, r in rA.items():
        ov = sum(1 for y in Y if act(g, y) in yset)
        by_repr += r * ov

    fibers = count_rAY(action, A, Y)
    by_fibers = sum(c * c for c in fibers.entries.values())

    if not (by_pairs == by_repr == by_fibers):
        raise AssertionError(
            f"energy evaluations disagree: pairs={by_pairs} repr={by_repr} fibers={by_fibers}"
        )
    return EnergyReport(value=by_fibers, by_pairs=by_pairs, by_repr=by_repr, by_fibers=by_fibers)


@dataclass(frozen=True)
class Inequality:
    """One certified inequality lhs <= rhs with exact rational sides."""

    name: str
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def payload(self) -> dict:
        return {
            "name": self.name,
            "lhs": fraction_str(Fraction(self.lhs)),
            "rhs": fraction_str(Fraction(self.rhs)),
            "holds": self.holds,
        }


@dataclass(frozen=True)
class EnergyBounds:
    """Lower and upper bounds around the measured action energy.

    ``sym_size`` counts the rich members of the difference set A^{-1}A
    (the only elements whose symmetry membership the bounds reference).
    """

    kind: str = field(default="energy-bounds", init=False)
    energy: int = 0
    alpha: Fraction = Fraction(1)
    sym_size: int = 0
    inequalities: tuple = ()

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "energy": self.energy,
            "alpha": fraction_str(self.alpha),
            "sym_size": self.sym_size,
            "inequalities": [iq.payload() for iq in self.inequalities],
        }


def energy_bounds(
    action: GroupAction,
    A: ElementSet,
    Y: PointSet,
    alpha,
) -> EnergyBounds:
    """Certified bounds: the image-set lower bound, the symmetry lower
    bound, and the split upper bounds (sum and pigeonholed max forms).

    Every term only involves symmetry membership of elements of A and of
    the difference set, so membership is decided by direct overlap
    counting and no enumeration capability is needed.
    """
    alpha = _check_alpha(alpha)
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    E = action_energy(action, A, Y).value
    rA = count_rAinvA(action, A)
    thr = alpha * len(Y)
    in_sym = {g: overlap(action, g, Y) >= thr for g in rA}
    sum_r_over_sym = sum(r for g, r in rA.items() if in_sym[g])
    inv_ = action.inv
    max_in_sym = max(
        sum(1 for a2 in A if in_sym[action.mul(inv_(a1), a2)]) for a1 in A
    )
    nA, nY = len(A), len(Y)
    a_in_sym = sum(1 for a in A if in_sym.get(a, overlap(action, a, Y) >= thr))
    ineqs = (
        Inequality("image-energy-lower", Fraction(nA**2 * nY**2), Fraction(len(image_set(action, A, Y)) * E)),
        Inequality("symmetry-energy-lower", alpha**2 * a_in_sym**2 * nY, Fraction(E)),
        Inequality("rich-mass-lower", alpha * nY * sum_r_over_sym, Fraction(E)),
        Inequality(
            "split-upper-sum",
            Fraction(E),
            Fraction((math.ceil(alpha * nY) - 1) * nA**2 + nY * sum_r_over_sym),
        ),
        Inequality(
            "split-upper-max",
            Fraction(E),
            Fraction((math.ceil(alpha * nY) - 1) * nA**2 + nA * nY * max_in_sym),
        ),
        Inequality("saturation-upper", Fraction(E), Fraction(nA**2 * nY)),
    )
    sym_size = sum(1 for v in in_sym.values() if v)
    return EnergyBounds(energy=E, alpha=alpha, sym_size=sym_size, inequalities=ineqs)


@dataclass(frozen=True)
class OrbitStabilizerWitness:
    """An element a0 of A maximizing |a0^{-1}A ∩ stab(x)|, with the
    certified product bound |a0^{-1}A ∩ stab(x)| * |A(x)| >= |A|."""

    kind: str = field(default="orbit-stabilizer-witness", init=False)
    anchor: object = None
    stab_overlap: int = 0
    orbit_size: int = 0
    set_size: int = 0

    @property
    def holds(self) -> bool:
        return self.stab_overlap * self.orbit_size >= self.set_size

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "anchor": canon_str(self.anchor),
            "stab_overlap": self.stab_overlap,
            "orbit_size": self.orbit_size,
            "set_size": self.set_size,
            "holds": self.holds,
        }


def orbit_stabilizer_witness(action: GroupAction, A: ElementSet, x) -> OrbitStabilizerWitness:
    if not A:
        raise HypothesisError("A must be nonempty")
    act, mul, inv = action.act, action.mul, action.inv
    best = None
    best_count = -1
    for a in A:  # canonical order; first maximum wins
        ai = inv(a)
        cnt = sum(1 for b in A if act(mul(ai, b), x) == x)
        if cnt > best_count:
            best, best_count = a, cnt
    orbit = image_set(action, A, PointSet([x]))
    w = OrbitStabilizerWitness(
        anchor=best, stab_overlap=best_count, orbit_size=len(orbit), set_size=len(A)
    )
    if not w.holds:
        raise AssertionError("orbit-stabilizer witness bound failed; this should be impossible")
    return w


# ---------------------------------------------------------------------------
# popularity and Cauchy-Schwarz pairs


@dataclass(frozen=True)
class PopularSubset:
    """Keys at least lambda times the mean, carrying >= (1-lambda) of the mass."""

    kind: str = field(default="popular-subset", init=False)
    lam: Fraction = Fraction(1, 2)
    keys: CanonSet = None
    mass: int = 0
    total: int = 0
    mean: Fraction = Fraction(0)

    @property
    def holds(self) -> bool:
        return self.mass >= (1 - self.lam) * self.total

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "lambda": fraction_str(self.lam),
            "keys": [canon_str(k) for k in self.keys],
            "mass": self.mass,
            "total": self.total,
            "mean": fraction_str(self.mean),
            "holds": self.holds,
        }


def popular_subset(f: CountMap, lam) -> PopularSubset:
    """The popularity principle, constructively: P = {x : f(x) >= lam*mean}."""
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise HypothesisError(f"lambda must lie in (0, 1), got {lam}")
    if len(f) == 0:
        raise HypothesisError("empty count map")
    total = f.total()
    mean = Fraction(total, f.support_size())
    keys = [k for k, v in f.items() if v >= lam * mean]
    mass = sum(f[k] for k in keys)
    out = PopularSubset(lam=lam, keys=CanonSet(keys), mass=mass, total=total, mean=mean)
    if not out.holds:
        raise AssertionError("popularity mass guarantee failed; this should be impossible")
    return out


@dataclass(frozen=True)
class IntersectionPairs:
    """All index pairs whose sets intersect in at least delta^2|T|/2 points;
    certified to number at least delta^2|S|^2/2."""

    kind: str = field(default="intersection-pairs", init=False)
    delta: Fraction = Fraction(1)
    pairs: Relation = None
    family_size: int = 0
    universe_size: int = 0
    pair_threshold: Fraction = Fraction(0)

    @property
    def holds(self) -> bool:
        return len(self.pairs) >= self.delta**2 * self.family_size**2 / 2

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "delta": fraction_str(self.delta),
            "pairs": [[canon_str(a), canon_str(b)] for a, b in self.pairs],
            "family_size": self.family_size,
            "universe_size": self.universe_size,
            "pair_threshold": fraction_str(Fraction(self.pair_threshold)),
            "holds": self.holds,
        }


def cs_intersection_pairs(family: dict, universe: CanonSet, delta) -> IntersectionPairs:
    """Cauchy-Schwarz pair selection over a family {s: T_s} of subsets of T.

    Requires sum |T_s| >= delta |S| |T|; returns every pair (s, s') with
    |T_s ∩ T_s'| >= delta^2 |T| / 2.
    """
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise HypothesisError(f"delta must lie in (0, 1], got {delta}")
    if not family:
        raise HypothesisError("empty family")
    sets = {s: frozenset(T) for s, T in family.items()}
    for s, T in sets.items():
        if not T <= universe.raw():
            raise HypothesisError(f"family member {canon_str(s)} is not a subset of the universe")
    total = sum(len(T) for T in sets.values())
    nS, nT = len(sets), len(universe)
    if total < delta * nS * nT:
        raise HypothesisError(
            f"family mass {total} below delta*|S|*|T| = {fraction_str(delta * nS * nT)}"
        )
    threshold = delta**2 * nT / 2
    keys = sorted(sets, key=sort_key)
    pairs = [
        (s, s2) for s in keys for s2 in keys if len(sets[s] & sets[s2]) >= threshold
    ]
    out = IntersectionPairs(
        delta=delta,
        pairs=Relation(pairs, sides=("element", "element")),
        family_size=nS,
        universe_size=nT,
        pair_threshold=threshold,
    )
    if not out.holds:
        raise AssertionError("intersection-pair count guarantee failed; this should be impossible")
    return out


def incidence_count(action: GroupAction, P, A: ElementSet) -> int:
    """Number of (pair, element) incidences: sum over (x,y) in P of |A ∩ trans(x, y)|."""
    act = action.act
    return sum(1 for (x, y) in P for g in A if act(g, x) == y)


def incidence_identity_check(action: GroupAction, A: ElementSet, Y: PointSet) -> tuple[int, int]:
    """Both sides of the transporter identity
    sum_g |Y ∩ gY| = sum_{y,y'} |A ∩ trans(y,y')| (must be equal)."""
    lhs = sum(overlap(action, g, Y) for g in A)
    rhs = incidence_count(action, [(y, y2) for y in Y for y2 in Y], A)
    return lhs, rhs


# ---------------------------------------------------------------------------
# conversions


@dataclass(frozen=True)
class ConversionCertificate:
    """Constructive conversion between energy, partial-image and symmetry
    forms of structure; every claimed inequality is exact."""

    kind: str = field(default="conversion", init=False)
    direction: str = ""
    alpha: Fraction = Fraction(0)
    params: dict = None
    relation: Optional[Relation] = None
    element_set: Optional[ElementSet] = None
    point_set: Optional[PointSet] = None
    anchor: object = None
    inequalities: tuple = ()

    def payload(self) -> dict:
        out = {
            "kind": self.kind,
            "direction": self.direction,
            "alpha": fraction_str(self.alpha),
            "params": {k: (fraction_str(v) if isinstance(v, Fraction) else v) for k, v in (self.params or {}).items()},
            "inequalities": [iq.payload() for iq in self.inequalities],
        }
        if self.relation is not None:
            out["relation"] = [[canon_str(a), canon_str(b)] for a, b in self.relation]
        if self.element_set is not None:
            out["element_set"] = [canon_str(g) for g in self.element_set]
        if self.point_set is not None:
            out["point_set"] = [canon_str(x) for x in self.point_set]
        if self.anchor is not None:
            out["anchor"] = canon_str(self.anchor)
        return out


def _require_energy_hypothesis(action, A, Y, alpha) -> int:
    E = action_energy(action, A, Y).value
    if E < 2 * alpha * len(A) ** 2 * len(Y):
        raise HypothesisError(
            f"energy {E} below 2*alpha*|A|^2*|Y| = {fraction_str(2 * alpha * len(A) ** 2 * len(Y))}"
        )
    return E


def energy_to_partial_image(action: GroupAction, A: ElementSet, Y: PointSet, alpha) -> ConversionCertificate:
    """From E(A,Y) >= 2 alpha |A|^2 |Y|, build the popular-image relation:
    |E| >= alpha|A||Y| and |A_E(Y)| <= alpha^{-2}|Y|."""
    alpha = _check_alpha(alpha)
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    energy = _require_energy_hypothesis(action, A, Y, alpha)
    fibers = count_rAY(action, A, Y)
    thr = alpha * len(A)
    P = PointSet(x for x, c in fibers.items() if c >= thr)
    act = action.act
    E = Relation(((a, y) for a in A for y in Y if act(a, y) in P), sides=("element", "point"))
    image = PointSet(act(a, y) for a, y in E)
    ineqs = (
        Inequality("relation-mass", alpha * len(A) * len(Y), Fraction(len(E))),
        Inequality("partial-image-size", Fraction(len(image)), len(Y) / alpha**2),
    )
    cert = ConversionCertificate(
        direction="energy-to-partial-image",
        alpha=alpha,
        params={"energy": energy},
        relation=E,
        point_set=P,
        inequalities=ineqs,
    )
    _assert_all(cert)
    return cert


def energy_to_symmetry(action: GroupAction, A: ElementSet, Y: PointSet, alpha) -> ConversionCertificate:
    """From E(A,Y) >= 2 alpha |A|^2 |Y|, find a0 with
    |a0^{-1}A ∩ Sym_alpha(Y)| >= alpha |A|."""
    alpha = _check_alpha(alpha)
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    energy = _require_energy_hypothesis(action, A, Y, alpha)
    mul, inv, act = action.mul, action.inv, action.act
    yset = Y.raw()
    thr = alpha * len(Y)
    best, best_cnt = None, -1
    for a in A:
        ai = inv(a)
        cnt = 0
        for b in A:
            g = mul(ai, b)
            if sum(1 for y in Y if act(g, y) in yset) >= thr:
                cnt += 1
        if cnt > best_cnt:
            best, best_cnt = a, cnt
    ineqs = (Inequality("translate-overlap", alpha * len(A), Fraction(best_cnt)),)
    cert = ConversionCertificate(
        direction="energy-to-symmetry",
        alpha=alpha,
        params={"energy": energy, "overlap_count": best_cnt},
        anchor=best,
        inequalities=ineqs,
    )
    _assert_all(cert)
    return cert


def partial_image_to_symmetry(
    action: GroupAction, A: ElementSet, Y: PointSet, E: Relation, K, rho
) -> ConversionCertificate:
    """From |A_E(Y)| <= K|Y| and |E| >= rho|A||Y|, build A' and Y' with
    A' inside the symmetry set of Y' at level rho/(2(K+1))."""
    K, rho = Fraction(K), Fraction(rho)
    if K < Fraction(0) or not 0 < rho <= 1:
        raise HypothesisError("need K >= 0 and rho in (0, 1]")
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    act = action.act
    for g, y in E:
        if g not in A or y not in Y:
            raise HypothesisError(f"relation pair ({canon_str(g)},{canon_str(y)}) outside A x Y")
    image = PointSet(act(g, y) for g, y in E)
    if len(image) > K * len(Y):
        raise HypothesisError(f"|A_E(Y)| = {len(image)} exceeds K|Y| = {fraction_str(K * len(Y))}")
    if len(E) < rho * len(A) * len(Y):
        raise HypothesisError(f"|E| = {len(E)} below rho|A||Y| = {fraction_str(rho * len(A) * len(Y))}")
    deg = E.degrees_left()
    thr = rho * len(Y) / 2
    A2 = ElementSet(a for a in A if deg[a] >= thr)
    Y2 = Y.union(image)
    alpha = rho / (2 * (K + 1))
    ineqs = [
        Inequality("dense-subset-size", rho * len(A) / 2, Fraction(len(A2))),
        Inequality("extended-set-size", Fraction(len(Y2)), (K + 1) * len(Y)),
    ]
    athr = alpha * len(Y2)
    for a in A2:
        ov = sum(1 for y in Y2 if act(a, y) in Y2)
        ineqs.append(Inequality(f"membership:{canon_str(a)}", athr, Fraction(ov)))
    cert = ConversionCertificate(
        direction="partial-image-to-symmetry",
        alpha=alpha,
        params={"K": K, "rho": rho},
        element_set=A2,
        point_set=Y2,
        inequalities=tuple(ineqs),
    )
    _assert_all(cert)
    return cert


def symmetry_to_partial_image(action: GroupAction, A: ElementSet, Y: PointSet, alpha) -> ConversionCertificate:
    """From A inside Sym_alpha(Y): the relation E = {(a,y) : a(y) in Y} has
    |E| >= alpha|A||Y| and its partial image stays inside Y."""
    alpha = _check_alpha(alpha)
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    act = action.act
    thr = alpha * len(Y)
    for a in A:
        if overlap(action, a, Y) < thr:
            raise HypothesisError(f"{canon_str(a)} has overlap below alpha|Y|")
    E = Relation(((a, y) for a in A for y in Y if act(a, y) in Y), sides=("element", "point"))
    image = PointSet(act(a, y) for a, y in E)
    ineqs = (
        Inequality("relation-mass", alpha * len(A) * len(Y), Fraction(len(E))),
        Inequality("image-containment", Fraction(len(image.difference(Y))), Fraction(0)),
    )
    cert = ConversionCertificate(
        direction="symmetry-to-partial-image",
        alpha=alpha,
        params={},
        relation=E,
        point_set=image,
        inequalities=ineqs,
    )
    _assert_all(cert)
    return cert


def _assert_all(cert: ConversionCertificate) -> None:
    for iq in cert.inequalities:
        if not iq.holds:
            raise AssertionError(f"{cert.direction}: inequality {iq.name} failed")
