"""Symmetry-set upper bounds and the SL2 application layer.

Every report compares a certified bound against the measured symmetry
set whenever the group is small enough to enumerate; a measured value
above its bound is a hard error, never a warning.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .actions import SelfTranslationAction, carrier_sl2, is_prime
from .canon import canon_str, fraction_str, sort_key
from .core import (
    DescriptorError,
    ElementSet,
    GroupAction,
    HypothesisError,
    PointSet,
    VerificationError,
    image_set,
    product_set,
    symmetrized_power,
)
from .bsg import check_almost_free
from .stats import overlap, symmetry_set
from .actions import generated_subgroup


def _falling(m: int, n: int) -> int:
    out = 1
    for i in range(n):
        out *= m - i
    return out


@dataclass(frozen=True)
class SymBoundReport:
    """An upper bound for a symmetry set with the measured size when available."""

    kind: str = field(default="symmetry-bound", init=False)
    variant: str = ""
    alpha: Fraction = Fraction(1)
    bound: Fraction = Fraction(0)
    measured: Optional[int] = None
    extras: dict = None

    @property
    def slack(self) -> Optional[Fraction]:
        if self.measured is None or self.bound == 0:
            return None
        return Fraction(self.measured) / self.bound

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "variant": self.variant,
            "alpha": fraction_str(self.alpha),
            "bound": fraction_str(self.bound),
            "measured": self.measured,
            "slack": None if self.slack is None else fraction_str(self.slack),
            "extras": {
                k: (fraction_str(v) if isinstance(v, Fraction) else v)
                for k, v in (self.extras or {}).items()
            },
        }


def _check_measured(report: SymBoundReport) -> SymBoundReport:
    if report.measured is not None and report.measured > report.bound:
        raise VerificationError(
            f"symmetry-bound-{report.variant}",
            f"measured {report.measured} exceeds bound {fraction_str(report.bound)}",
        )
    return report


def sym_bound_free(action: GroupAction, A: ElementSet, Y: PointSet, alpha) -> SymBoundReport:
    """Transporter-pigeonhole bound |A ∩ Sym_alpha(Y)| <= |Y| M / alpha with
    M the largest transporter meet of A over point pairs of Y; for free
    actions M = 1 and the bound reads |Y|/alpha."""
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise HypothesisError(f"alpha must lie in (0, 1], got {alpha}")
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    act = action.act
    yset = Y.raw()
    buckets: dict = {}
    for a in A:
        for y in Y:
            x = act(a, y)
            if x in yset:
                buckets[(y, x)] = buckets.get((y, x), 0) + 1
    M = max(buckets.values(), default=0)
    bound = Fraction(len(Y)) * M / alpha
    thr = alpha * len(Y)
    measured = sum(1 for a in A if overlap(action, a, Y) >= thr)
    extras = {"transporter_max": M}
    G, X = action.element_enum(), action.point_enum()
    if G is not None and X is not None:
        orbit = image_set(action, G, PointSet([X.first()]))
        if orbit == X:
            extras["transitive_bound"] = Fraction(len(Y) * len(G), 1) / (alpha * len(X))
    return _check_measured(
        SymBoundReport(variant="free", alpha=alpha, bound=bound, measured=measured, extras=extras)
    )


def sym_bound_almost_free(action: GroupAction, Y: PointSet, alpha, n: int) -> SymBoundReport:
    """Bound via the diagonal action on distinct n-tuples, for actions whose
    non-identity elements fix fewer than n points of Y.

    Reports the closed-form bound and the exact tuple-route bound, and
    verifies the tuple-level containment element by element when the
    group is enumerable.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise HypothesisError(f"alpha must lie in (0, 1], got {alpha}")
    if not isinstance(n, int) or n < 1:
        raise HypothesisError(f"n must be a positive integer, got {n!r}")
    if len(Y) <= (1 + 1 / alpha) * n:
        raise HypothesisError(
            f"|Y| = {len(Y)} must exceed (1 + 1/alpha) n = {fraction_str((1 + 1 / alpha) * n)}"
        )
    check_almost_free(action, Y, n)
    m = math.ceil(alpha * len(Y))
    if m < n:
        raise HypothesisError(f"ceil(alpha |Y|) = {m} below n = {n}; tuple route empty")
    bound_closed = (1 + Fraction(n) / (alpha * len(Y) - (1 + alpha) * n)) * Fraction(len(Y)) ** n / alpha**n
    tuple_rate = Fraction(_falling(m, n), _falling(len(Y), n))
    bound_tuple = Fraction(_falling(len(Y), n)) / tuple_rate
    epsilon = 1 - tuple_rate / alpha**n
    measured = None
    extras = {
        "n": n,
        "bound_closed": bound_closed,
        "bound_tuple": bound_tuple,
        "tuple_rate": tuple_rate,
        "epsilon": epsilon,
    }
    if action.element_enum() is not None:
        report = symmetry_set(action, Y, alpha)
        measured = len(report.members)
        # Tuple-level containment: |Y^(n) ∩ g Y^(n)| equals the falling
        # factorial of the point overlap, exactly.
        for g in report.members:
            ov = report.overlaps[g]
            if _falling(ov, n) < tuple_rate * _falling(len(Y), n):
                raise VerificationError(
                    "symmetry-bound-almost-free",
                    f"{canon_str(g)} fails the tuple-level containment",
                )
    bound = min(bound_closed, bound_tuple)
    return _check_measured(
        SymBoundReport(variant="almost-free", alpha=alpha, bound=bound, measured=measured, extras=extras)
    )


def _span_rank(action, vectors) -> int:
    """Rank of a list of point-vectors over the action's scalar field."""
    if hasattr(action, "p"):
        p = action.p
        rows = [list(v) for v in vectors]
        rank, col = 0, 0
        ncols = len(rows[0]) if rows else 0
        rows = [r[:] for r in rows]
        for col in range(ncols):
            piv = next((r for r in range(rank, len(rows)) if rows[r][col] % p), None)
            if piv is None:
                continue
            rows[rank], rows[piv] = rows[piv], rows[rank]
            inv = pow(rows[rank][col], p - 2, p)
            rows[rank] = [(x * inv) % p for x in rows[rank]]
            for r in range(len(rows)):
                if r != rank and rows[r][col] % p:
                    f = rows[r][col]
                    rows[r] = [(a - f * b) % p for a, b in zip(rows[r], rows[rank])]
            rank += 1
        return rank
    rows = [[Fraction(x) for x in v] for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pv = rows[rank][col]
        rows[rank] = [x / pv for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def sym_bound_linear(action: GroupAction, Y: PointSet, alpha, rho) -> SymBoundReport:
    """Bound for faithful linear actions on n-dimensional space, assuming Y
    puts at most rho|Y| points in any proper subspace.

    The subspace-concentration hypothesis is checked against every
    subspace spanned by at most n-1 points of Y (rejected with the
    witness when violated).  When the group is enumerable, the
    independent-tuple route is materialized and certified.
    """
    alpha, rho = Fraction(alpha), Fraction(rho)
    n = getattr(action, "n", None)
    if n is None:
        raise HypothesisError("linear bound needs a linear action with a dimension")
    if not Fraction(1, len(Y)) < rho < alpha <= 1:
        raise HypothesisError(
            f"need 1/|Y| < rho < alpha <= 1, got rho = {rho}, alpha = {alpha}, |Y| = {len(Y)}"
        )
    members = Y.members
    for r in range(0, n):
        for subset in itertools.combinations(members, r):
            count = sum(1 for y in members if _span_rank(action, list(subset) + [y]) == _span_rank(action, list(subset)))
            if count > rho * len(Y):
                witness = ",".join(canon_str(s) for s in subset) or "0"
                raise HypothesisError(
                    f"subspace spanned by [{witness}] holds {count} > rho|Y| points of Y"
                )
    alpha_star = (alpha - Fraction(1, len(Y))) * (alpha - rho) ** (n - 1)
    bound = Fraction(len(Y)) ** n / alpha_star
    tuples = [t for t in itertools.product(members, repeat=n) if _span_rank(action, list(t)) == n]
    extras = {"n": n, "rho": rho, "alpha_star": alpha_star, "independent_tuples": len(tuples)}
    measured = None
    if action.element_enum() is not None:
        report = symmetry_set(action, Y, alpha)
        measured = len(report.members)
        act = action.act
        yset = Y.raw()
        floor = alpha_star * len(Y) ** n
        total = 0
        for g in report.members:
            moved = {y for y in members if act(g, y) in yset}
            cnt = sum(1 for t in tuples if all(c in moved for c in t))
            if cnt < floor:
                raise VerificationError(
                    "symmetry-bound-linear",
                    f"{canon_str(g)} moves only {cnt} independent tuples into Y^n",
                )
            total += cnt
        if measured and alpha_star * len(Y) ** n * measured > Fraction(total):
            raise VerificationError("symmetry-bound-linear", "tuple incidence chain failed")
        extras["tuple_bound"] = Fraction(len(tuples)) / alpha_star
    return _check_measured(
        SymBoundReport(variant="linear", alpha=alpha, bound=bound, measured=measured, extras=extras)
    )


def affine_incidence_sym_bound(action, Y: PointSet, alpha) -> SymBoundReport:
    """Rich-line bound for the one-dimensional affine action:
    |Sym_alpha(Y)| <= |Y|^2 / (alpha - 2/|Y|)^2, valid once alpha|Y| > 2."""
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise HypothesisError(f"alpha must lie in (0, 1], got {alpha}")
    if not Y:
        raise HypothesisError("Y must be nonempty")
    if alpha * len(Y) <= 2:
        raise HypothesisError(f"alpha|Y| = {fraction_str(alpha * len(Y))} must exceed 2")
    bound = Fraction(len(Y)) ** 2 / (alpha - Fraction(2, len(Y))) ** 2
    measured = None
    if action is not None:
        report = symmetry_set(action, Y, alpha)
        measured = len(report.members)
    return _check_measured(
        SymBoundReport(variant="affine-incidence", alpha=alpha, bound=bound, measured=measured, extras={})
    )


# ---------------------------------------------------------------------------
# SL2 application layer


@dataclass(frozen=True)
class IncidenceScan:
    """Incidences between transformation curves and a point grid, with the
    rich transformations above the threshold and the popularity mass."""

    kind: str = field(default="moebius-incidence-scan", init=False)
    p: int = 0
    incidences: int = 0
    incidences_mobius: int = 0
    threshold: int = 0
    rich: ElementSet = None
    rich_mass: int = 0
    pop_lambda: Optional[Fraction] = None
    pop_holds: Optional[bool] = None

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "incidences": self.incidences,
            "incidences_mobius": self.incidences_mobius,
            "threshold": self.threshold,
            "rich": [canon_str(g) for g in self.rich],
            "rich_mass": self.rich_mass,
            "pop_lambda": None if self.pop_lambda is None else fraction_str(self.pop_lambda),
            "pop_holds": self.pop_holds,
        }


def sl2_incidence_scan(p: int, A: ElementSet, X: PointSet, Y: PointSet, threshold: int) -> IncidenceScan:
    """Count solutions of c x y - a x + d y - b = 0 over X x Y per matrix,
    cross-checked against the fractional-linear evaluation, and collect
    the transformations with at least ``threshold`` incident pairs."""
    if not is_prime(p):
        raise DescriptorError(f"p must be prime, got {p}")
    per_g: dict = {}
    mob_total = 0
    for g in A:
        a, b, c, d = (x % p for x in g)
        if (a * d - b * c) % p != 1:
            raise HypothesisError(f"matrix {canon_str(g)} does not have determinant 1 mod {p}")
        cnt = 0
        for x in X:
            for y in Y:
                if (c * x * y - a * x + d * y - b) % p == 0:
                    cnt += 1
        per_g[g] = cnt
        for x in X:
            den = (c * x + d) % p
            if den == 0:
                continue
            img = ((a * x + b) * pow(den, p - 2, p)) % p
            if img in Y:
                mob_total += 1
    total = sum(per_g.values())
    if total != mob_total:
        raise AssertionError("curve and fractional-linear counts disagree; this should be impossible")
    rich = ElementSet(g for g, c in per_g.items() if c >= threshold)
    rich_mass = sum(per_g[g] for g in rich)
    support = [c for c in per_g.values() if c > 0]
    pop_lambda = None
    pop_holds = None
    if support and threshold > 0:
        mean = Fraction(sum(support), len(support))
        lam = Fraction(threshold) / mean
        if 0 < lam < 1:
            pop_lambda = lam
            pop_holds = rich_mass >= (1 - lam) * total
            if not pop_holds:
                raise AssertionError("popularity mass guarantee failed; this should be impossible")
    return IncidenceScan(
        p=p,
        incidences=total,
        incidences_mobius=mob_total,
        threshold=threshold,
        rich=rich,
        rich_mass=rich_mass,
        pop_lambda=pop_lambda,
        pop_holds=pop_holds,
    )


@dataclass(frozen=True)
class GrowthReport:
    """Trichotomy for a subset of SL2(F_p): symmetrized cube is everything,
    or it grows by the fixed exponent, or the set generates a proper
    subgroup (reported with its order)."""

    kind: str = field(default="sl2-growth-trichotomy", init=False)
    p: int = 0
    set_size: int = 0
    cube_size: int = 0
    sym_cube_size: int = 0
    group_order: int = 0
    branch: str = ""
    subgroup_order: Optional[int] = None
    delta_denominator: int = 3024
    cube_relation_holds: bool = False

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "set_size": self.set_size,
            "cube_size": self.cube_size,
            "sym_cube_size": self.sym_cube_size,
            "group_order": self.group_order,
            "branch": self.branch,
            "subgroup_order": self.subgroup_order,
            "delta_denominator": self.delta_denominator,
            "cube_relation_holds": self.cube_relation_holds,
        }


def sl2_self_action(p: int) -> SelfTranslationAction:
    return SelfTranslationAction(carrier_sl2(p))


def sl2_growth_check(p: int, A: ElementSet) -> GrowthReport:
    """Check the growth trichotomy for A inside SL2(F_p), p in {2,3,5,7}.

    Either the symmetrized cube is the whole group, or it has size at
    least |A|^(1 + 1/3024) (checked by exact integer powers), or A
    generates a proper subgroup, reported with its order.  The cube
    relation (3|A^3|/|A|)^3 |A| >= |sym cube| is verified in all
    generating branches.
    """
    if p not in (2, 3, 5, 7):
        raise DescriptorError(f"p must be one of 2, 3, 5, 7, got {p}")
    if not A:
        raise HypothesisError("A must be nonempty")
    action = sl2_self_action(p)
    A = ElementSet(action.normalize_element(g) for g in A)
    G = action.element_enum()
    order = len(G)
    generated = generated_subgroup(action, A, cap=order)
    if len(generated) < order:
        return GrowthReport(
            p=p,
            set_size=len(A),
            cube_size=len(product_set(action, product_set(action, A, A), A)),
            sym_cube_size=len(symmetrized_power(action, A, 3)),
            group_order=order,
            branch="proper-subgroup",
            subgroup_order=len(generated),
            cube_relation_holds=True,
        )
    cube = product_set(action, product_set(action, A, A), A)
    sym3 = symmetrized_power(action, A, 3)
    lhs67 = (3 * Fraction(len(cube), len(A))) ** 3 * len(A)
    eq67 = Fraction(len(sym3)) <= lhs67
    if not eq67:
        raise VerificationError("sl2-growth", "cube relation failed on a generating set")
    if sym3 == G:
        branch = "full-cube"
    elif len(sym3) ** 3024 >= len(A) ** 3025:
        branch = "exponent-growth"
    else:
        branch = "violation"
        raise VerificationError(
            "sl2-growth",
            f"generating set of size {len(A)} with symmetrized cube {len(sym3)} "
            "fails both growth branches",
        )
    return GrowthReport(
        p=p,
        set_size=len(A),
        cube_size=len(cube),
        sym_cube_size=len(sym3),
        group_order=order,
        branch=branch,
        subgroup_order=None,
        cube_relation_holds=eq67,
    )


def sl2_generating_pairs_reduced(p: int) -> list:
    """Representatives of ordered element pairs of SL2(F_p) up to
    simultaneous conjugation (for exhaustive generator scans)."""
    action = sl2_self_action(p)
    model = action.index_model()
    n = model.n
    table = model.table
    inv = model.inv
    arange = np.arange(n)
    t1 = table[:, inv].T  # t1[k, i] = i * inv(k)  read as table[i, inv[k]]
    conj = table[arange[:, None], t1]  # conj[k, i] = k i k^{-1}
    reps = set()
    for i in range(n):
        ci = conj[:, i].astype(np.int64)
        for j in range(n):
            vals = ci * n + conj[:, j]
            reps.add(int(vals.min()))
    out = []
    for v in sorted(reps):
        out.append((model.elems[v // n], model.elems[v % n]))
    return out


@dataclass(frozen=True)
class ConcentrationScan:
    """The largest intersection of A with a coset of an enumerated proper
    subgroup."""

    kind: str = field(default="coset-concentration-scan", init=False)
    best_count: int = 0
    best_rep: object = None
    best_subgroup_order: int = 0
    best_subgroup: ElementSet = None
    subgroups_scanned: int = 0
    skipped_over_cap: int = 0

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "best_count": self.best_count,
            "best_rep": canon_str(self.best_rep),
            "best_subgroup_order": self.best_subgroup_order,
            "best_subgroup": [canon_str(g) for g in self.best_subgroup],
            "subgroups_scanned": self.subgroups_scanned,
            "skipped_over_cap": self.skipped_over_cap,
        }


def subgroup_concentration_scan(action: GroupAction, A: ElementSet, subgroup_cap: int) -> ConcentrationScan:
    """Scan proper subgroups (closures of one- and two-element generating
    sets, up to the size cap) for the coset holding the most of A."""
    G = action.element_enum()
    if G is None:
        raise HypothesisError("the group must be enumerable")
    members = G.members
    mul = action.mul
    seen: set = set()
    subgroups = []
    skipped = 0
    for gens in itertools.chain(
        ((g,) for g in members), itertools.combinations(members, 2)
    ):
        try:
            H = generated_subgroup(action, ElementSet(gens), cap=subgroup_cap)
        except Exception:
            skipped += 1
            continue
        if len(H) == len(G):
            continue
        key = H.raw()
        if key in seen:
            continue
        seen.add(key)
        subgroups.append(H)
    best = (-1, None, None)
    for H in sorted(subgroups, key=lambda h: sort_key(tuple(h.members))):
        buckets: dict = {}
        hlist = H.members
        for a in A:
            rep = min((mul(a, h) for h in hlist), key=sort_key)
            buckets[rep] = buckets.get(rep, 0) + 1
        for rep in sorted(buckets, key=sort_key):
            cnt = buckets[rep]
            if cnt > best[0]:
                best = (cnt, rep, H)
    if best[2] is None:
        raise HypothesisError("no proper subgroup under the cap")
    return ConcentrationScan(
        best_count=best[0],
        best_rep=best[1],
        best_subgroup_order=len(best[2]),
        best_subgroup=best[2],
        subgroups_scanned=len(subgroups),
        skipped_over_cap=skipped,
    )
