"""Constructive decomposition machinery for sets of rich transformations.

The pipeline iterates an approximate multiplicative closure of a
symmetry set, extracts a small-tripling set at the level where growth
stalls, pulls density information back to the original set, and covers
a large part of the space by images of the extracted set.  Every stage
emits a certificate whose inequalities are exact rational comparisons.

Logarithms never enter the arithmetic: dyadic mass floors are certified
with the integer bit-length of |A| in place of log|A| (the dyadic
pigeonhole argument guarantees exactly that form), and the natural-log
variants are evaluated against a declared rational upper bound on the
log and reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .canon import canon_str, fraction_str
from .core import (
    ClosureCapError,
    ElementSet,
    GroupAction,
    HypothesisError,
    PointSet,
    Relation,
    count_rAinvA,
    fixed_in,
    inverse_set,
    product_set,
    symmetrize,
    symmetrized_power,
)
from .covering import CoverCertificate, cover_symmetry
from .stats import overlap, symmetry_set


def ln_upper(n: int) -> Fraction:
    """A declared rational upper bound on ln(n) (float estimate plus margin)."""
    if n < 1:
        raise ValueError("n must be positive")
    return Fraction(math.ceil((math.log(n) + 1e-9) * 10**9), 10**9)


def _check_alpha(alpha) -> Fraction:
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise HypothesisError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha


def _overlap_masks(action: GroupAction, A: ElementSet, Y: PointSet) -> dict:
    """For each s in A the bitmask (over Y in canonical order) of Y ∩ sY."""
    index = {y: i for i, y in enumerate(Y.members)}
    act = action.act
    masks = {}
    for s in A:
        m = 0
        for y in Y.members:
            x = act(s, y)
            i = index.get(x)
            if i is not None:
                m |= 1 << i
        masks[s] = m
    return masks


@dataclass(frozen=True)
class ClosureCertificate:
    """A relation E over A x A (pairs (s, s'), product s^{-1} s') whose
    product set stays inside the symmetry set at the squared level.

    ``pairs`` is swap-symmetric, so the product set is inverse-closed.
    The uniform variant additionally pins every product's multiplicity
    to at least half the average.
    """

    kind: str = "symmetry-closure"
    base: ElementSet = None
    alpha: Fraction = Fraction(1)
    pairs: Relation = None
    product: ElementSet = None
    target_level: Fraction = Fraction(1)
    mass_floor: Fraction = Fraction(0)
    dyadic_level: Optional[int] = None
    min_multiplicity: Optional[int] = None
    uniform_floor: Optional[Fraction] = None
    mass_floor_bitlen: Optional[Fraction] = None
    mass_floor_natural: Optional[Fraction] = None
    natural_floor_holds: Optional[bool] = None

    def bipartite_pairs(self, action: GroupAction) -> list:
        """The pairs in (u, v) form with product u*v, u = s^{-1}."""
        inv = action.inv
        return [(inv(s), s2) for s, s2 in self.pairs]

    def multiplicities(self, action: GroupAction) -> dict:
        mul, inv = action.mul, action.inv
        r: dict = {}
        for s, s2 in self.pairs:
            x = mul(inv(s), s2)
            r[x] = r.get(x, 0) + 1
        return r

    def payload(self) -> dict:
        base_index = {g: i for i, g in enumerate(self.base.members)}
        out = {
            "kind": self.kind,
            "base": [canon_str(g) for g in self.base],
            "alpha": fraction_str(self.alpha),
            "pair_indices": [[base_index[s], base_index[s2]] for s, s2 in self.pairs],
            "product": [canon_str(g) for g in self.product],
            "target_level": fraction_str(self.target_level),
            "mass_floor": fraction_str(self.mass_floor),
        }
        if self.dyadic_level is not None:
            out.update(
                {
                    "dyadic_level": self.dyadic_level,
                    "min_multiplicity": self.min_multiplicity,
                    "uniform_floor": fraction_str(self.uniform_floor),
                    "mass_floor_bitlen": fraction_str(self.mass_floor_bitlen),
                    "mass_floor_natural": fraction_str(self.mass_floor_natural),
                    "natural_floor_holds": self.natural_floor_holds,
                }
            )
        return out


def _closure_pairs(action: GroupAction, A: ElementSet, Y: PointSet, alpha: Fraction):
    """Qualifying pairs for the approximate closure, via overlap bitmasks."""
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    masks = _overlap_masks(action, A, Y)
    thr_member = alpha * len(Y)
    for s in A:
        if masks[s].bit_count() < thr_member:
            raise HypothesisError(f"element {canon_str(s)} has overlap below alpha|Y|")
    thr_pair = alpha**2 * len(Y) / 2
    members = A.members
    pairs = []
    for s in members:
        ms = masks[s]
        for s2 in members:
            if (ms & masks[s2]).bit_count() >= thr_pair:
                pairs.append((s, s2))
    return pairs


def approximate_closure(action: GroupAction, A: ElementSet, Y: PointSet, alpha) -> ClosureCertificate:
    """Weak multiplicative closure of a subset of a symmetry set.

    Requires A inside Sym_alpha(Y).  Returns the swap-symmetric relation
    of heavily-intersecting pairs; its product set lies inside the
    symmetry set at level alpha^2/2 and the relation has at least
    alpha^2 |A|^2 / 2 pairs.
    """
    alpha = _check_alpha(alpha)
    pairs = _closure_pairs(action, A, Y, alpha)
    mul, inv = action.mul, action.inv
    product = ElementSet(mul(inv(s), s2) for s, s2 in pairs)
    cert = ClosureCertificate(
        kind="symmetry-closure",
        base=A,
        alpha=alpha,
        pairs=Relation(pairs, sides=("element", "element")),
        product=product,
        target_level=alpha**2 / 2,
        mass_floor=alpha**2 * len(A) ** 2 / 2,
    )
    _verify_closure_basics(action, cert, Y)
    return cert


def _verify_closure_basics(action: GroupAction, cert: ClosureCertificate, Y: PointSet) -> None:
    if len(cert.pairs) < cert.mass_floor:
        raise AssertionError("closure relation too small; this should be impossible")
    if not cert.pairs.is_swap_symmetric():
        raise AssertionError("closure relation is not swap-symmetric; this should be impossible")
    if inverse_set(action, cert.product) != cert.product:
        raise AssertionError("closure product set is not inverse-closed; this should be impossible")
    thr = cert.target_level * len(Y)
    for d in cert.product:
        if overlap(action, d, Y) < thr:
            raise AssertionError(
                f"product element {canon_str(d)} misses the target symmetry level; impossible"
            )


def uniform_approximate_closure(action: GroupAction, A: ElementSet, Y: PointSet, alpha) -> ClosureCertificate:
    """Approximate closure refined by dyadic pigeonholing so that every
    product has multiplicity at least |E| / (2 |product|)."""
    base = approximate_closure(action, A, Y, alpha)
    alpha = base.alpha
    mul, inv = action.mul, action.inv
    r = base.multiplicities(action)
    classes: dict = {}
    for (s, s2) in base.pairs:
        x = mul(inv(s), s2)
        j = r[x].bit_length() - 1
        classes.setdefault(j, []).append((s, s2))
    best_j = max(classes, key=lambda j: (len(classes[j]), -j))
    pairs = classes[best_j]
    product = ElementSet(mul(inv(s), s2) for s, s2 in pairs)
    n = len(A)
    bitlen = n.bit_length()
    mass_floor_bitlen = alpha**2 * n**2 / (2 * bitlen)
    mass_floor_natural = alpha**2 * n**2 / (2 + 2 * ln_upper(n))
    min_mult = min(r[x] for x in product)
    cert = ClosureCertificate(
        kind="uniform-symmetry-closure",
        base=A,
        alpha=alpha,
        pairs=Relation(pairs, sides=("element", "element")),
        product=product,
        target_level=base.target_level,
        mass_floor=base.mass_floor,
        dyadic_level=best_j,
        min_multiplicity=min_mult,
        uniform_floor=Fraction(len(pairs), 2 * len(product)),
        mass_floor_bitlen=mass_floor_bitlen,
        mass_floor_natural=mass_floor_natural,
        natural_floor_holds=len(pairs) >= mass_floor_natural,
    )
    if len(pairs) < mass_floor_bitlen:
        raise AssertionError("dyadic mass floor failed; this should be impossible")
    if min_mult * 2 * len(product) <= len(pairs):
        raise AssertionError("uniform multiplicity floor failed; this should be impossible")
    _verify_closure_level(action, cert, Y)
    return cert


def _verify_closure_level(action: GroupAction, cert: ClosureCertificate, Y: PointSet) -> None:
    if not cert.pairs.is_swap_symmetric():
        raise AssertionError("dyadic relation lost swap symmetry; this should be impossible")
    if inverse_set(action, cert.product) != cert.product:
        raise AssertionError("dyadic product set lost inverse closure; this should be impossible")
    thr = cert.target_level * len(Y)
    for d in cert.product:
        if overlap(action, d, Y) < thr:
            raise AssertionError("dyadic product element misses the symmetry level; impossible")


@dataclass(frozen=True)
class DensityTransfer:
    """An element a of A with |A ∩ aS| certified against the density of S
    in the closure product set."""

    kind: str = field(default="density-transfer", init=False)
    anchor: object = None
    meet: int = 0
    set_size: int = 0
    product_meet: int = 0
    product_size: int = 0
    floor_bitlen: Fraction = Fraction(0)
    floor_natural: Fraction = Fraction(0)
    natural_holds: bool = False

    @property
    def density(self) -> Fraction:
        return Fraction(self.meet, self.set_size)

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "anchor": canon_str(self.anchor),
            "meet": self.meet,
            "set_size": self.set_size,
            "product_meet": self.product_meet,
            "product_size": self.product_size,
            "floor_bitlen": fraction_str(self.floor_bitlen),
            "floor_natural": fraction_str(self.floor_natural),
            "natural_holds": self.natural_holds,
        }


def bring_structure_back(
    action: GroupAction, cert: ClosureCertificate, S: ElementSet
) -> DensityTransfer:
    """Transfer density in the closure product set back to the base set.

    Picks a in A maximizing |A ∩ aS| and certifies
    |A ∩ aS| / |A| >= (alpha^2 / (4 bitlen|A|)) * |D ∩ S| / |D| where D is
    the product set; the natural-log analog is evaluated and reported.
    """
    if cert.dyadic_level is None:
        raise HypothesisError("density transfer needs a uniform closure certificate")
    A = cert.base
    mul, inv = action.mul, action.inv
    aset = A.raw()
    best, best_meet = None, -1
    for a in A:
        meet = sum(1 for s in S if mul(a, s) in aset)
        if meet > best_meet:
            best, best_meet = a, meet
    r = cert.multiplicities(action)
    product_meet = sum(1 for x in cert.product if x in S)
    n, d = len(A), len(cert.product)
    bitlen = n.bit_length()
    floor_bitlen = (cert.alpha**2 / (4 * bitlen)) * Fraction(product_meet, d)
    floor_natural = (cert.alpha**2 / (4 * (1 + ln_upper(Fraction(1, cert.alpha) * n)))) * Fraction(
        product_meet, d
    )
    # Certified chain: sum_a |A ∩ aS| >= sum_{x in S∩D} r(x) >= |S∩D| |E| / (2|D|).
    total_meet = sum(sum(1 for s in S if mul(a, s) in aset) for a in A)
    rhs1 = sum(c for x, c in r.items() if x in S)
    if total_meet < rhs1:
        raise AssertionError("pair-count identity failed; this should be impossible")
    if rhs1 * 2 * d < product_meet * len(cert.pairs):
        raise AssertionError("uniform floor sum failed; this should be impossible")
    out = DensityTransfer(
        anchor=best,
        meet=best_meet,
        set_size=n,
        product_meet=product_meet,
        product_size=d,
        floor_bitlen=floor_bitlen,
        floor_natural=floor_natural,
        natural_holds=Fraction(best_meet, n) >= floor_natural,
    )
    if out.density < floor_bitlen:
        raise AssertionError("density transfer floor failed; this should be impossible")
    return out


@dataclass(frozen=True)
class TriplingCertificate:
    """An anchored subset S of a^{-1}A with its measured tripling ratio.

    The construction promises S nonempty and reports the ratios; it does
    not assert any absolute constant.
    """

    kind: str = field(default="small-tripling-extract", init=False)
    anchor: object = None
    S: ElementSet = None
    set_size: int = 0
    cube_size: int = 0
    side_size: int = 0
    alpha: Fraction = Fraction(0)
    K: Fraction = Fraction(0)

    @property
    def density_ratio(self) -> Fraction:
        return Fraction(self.set_size, self.side_size)

    @property
    def tripling_ratio(self) -> Fraction:
        return Fraction(self.cube_size, self.set_size)

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "anchor": canon_str(self.anchor),
            "S": [canon_str(s) for s in self.S],
            "set_size": self.set_size,
            "cube_size": self.cube_size,
            "side_size": self.side_size,
            "alpha": fraction_str(self.alpha),
            "K": fraction_str(self.K),
            "density_ratio": fraction_str(self.density_ratio),
            "tripling_ratio": fraction_str(self.tripling_ratio),
        }


def extract_small_tripling(
    action: GroupAction,
    A: ElementSet,
    B: ElementSet,
    pairs: list,
    alpha,
    K,
) -> TriplingCertificate:
    """Constructive small-tripling extraction from a dense partial product.

    ``pairs`` is a relation inside A x B (products u*v) with
    |E| >= alpha |A| |B| and |A *_E B| <= K sqrt(|A||B|) (both checked).
    Builds the popularity graph on E, anchors at the canonically first
    popular vertex of A, and keeps the popular vertices sharing at least
    |E|^2 / (8 |A| |B|^2) common partners with the anchor.
    """
    alpha, K = Fraction(alpha), Fraction(K)
    if not A or not B:
        raise HypothesisError("A and B must be nonempty")
    mul, inv = action.mul, action.inv
    pair_set = set(pairs)
    nE = len(pair_set)
    if nE < alpha * len(A) * len(B):
        raise HypothesisError(f"|E| = {nE} below alpha|A||B| = {fraction_str(alpha * len(A) * len(B))}")
    partial = ElementSet(mul(u, v) for u, v in pair_set)
    if len(partial) ** 2 > K**2 * len(A) * len(B):
        raise HypothesisError(
            f"|A*B over E| = {len(partial)} exceeds K sqrt(|A||B|) with K = {fraction_str(K)}"
        )
    bindex = {b: i for i, b in enumerate(B.members)}
    nbr: dict = {}
    for u, v in pair_set:
        nbr[u] = nbr.get(u, 0) | (1 << bindex[v])
    deg_thr = Fraction(nE, 2 * len(A))
    popular = [u for u in A if nbr.get(u, 0).bit_count() >= deg_thr]
    if not popular:
        raise AssertionError("popularity pigeonhole left no vertex; this should be impossible")
    anchor = popular[0]
    common_thr = Fraction(nE**2, 8 * len(A) * len(B) ** 2)
    anchor_nbr = nbr[anchor]
    anchor_inv = inv(anchor)
    chosen = {anchor}
    for u in popular:
        if (anchor_nbr & nbr[u]).bit_count() >= common_thr:
            chosen.add(u)
    S = ElementSet(mul(anchor_inv, u) for u in chosen)
    side = ElementSet(mul(anchor_inv, u) for u in A)
    if not S.issubset(side):
        raise AssertionError("extracted set left its anchor translate; this should be impossible")
    cube = product_set(action, product_set(action, S, S), S)
    return TriplingCertificate(
        anchor=anchor,
        S=S,
        set_size=len(S),
        cube_size=len(cube),
        side_size=len(A),
        alpha=alpha,
        K=K,
    )


def symmetry_tripling_extract(action: GroupAction, A: ElementSet, Y: PointSet, alpha, K) -> TriplingCertificate:
    """Small-tripling extraction for A inside Sym_alpha(Y) when the
    squared-level symmetry set has at most K|A| elements.

    Composes the approximate closure with the tripling extractor; the
    returned anchor g lies in A and gS is contained in A.
    """
    alpha, K = _check_alpha(alpha), Fraction(K)
    if K < 1:
        raise HypothesisError(f"K must be at least 1, got {K}")
    # Close the inverse set: its closure pairs read as (u, v) with u in A
    # and v in A^{-1}, so the extractor anchors inside A itself.
    cert = approximate_closure(action, inverse_set(action, A), Y, alpha)
    sym2 = symmetry_set(action, Y, cert.target_level)
    if len(sym2.members) > K * len(A):
        raise HypothesisError(
            f"|Sym at level alpha^2/2| = {len(sym2.members)} exceeds K|A| = {fraction_str(K * len(A))}"
        )
    pairs = cert.bipartite_pairs(action)
    ext = extract_small_tripling(
        action,
        A,
        inverse_set(action, A),
        pairs,
        alpha**2 / 2,
        Fraction(len(sym2.members), len(A)),
    )
    # gS ⊆ A with g the anchor.
    mul = action.mul
    for s in ext.S:
        if mul(ext.anchor, s) not in A:
            raise AssertionError("anchored translate left A; this should be impossible")
    return ext


@dataclass(frozen=True)
class ApproxGroupCertificate:
    """The symmetrized cube of A as an approximate group: a covering set X
    with (A_(3))^2 inside X * A_(3), plus the measured ratios."""

    kind: str = field(default="approximate-group-closure", init=False)
    base_size: int = 0
    closure: ElementSet = None
    cover: ElementSet = None
    tripling: Fraction = Fraction(0)
    closure_ratio: Fraction = Fraction(0)

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "base_size": self.base_size,
            "closure": [canon_str(g) for g in self.closure],
            "cover": [canon_str(g) for g in self.cover],
            "tripling": fraction_str(self.tripling),
            "closure_ratio": fraction_str(self.closure_ratio),
        }


def approx_group_close(action: GroupAction, A: ElementSet) -> ApproxGroupCertificate:
    """Close A to the symmetrized cube and cover its square greedily.

    The cover size is the measured approximate-group constant of A_(3);
    the tripling ratio |A^3|/|A| is reported alongside.
    """
    if not A:
        raise HypothesisError("A must be nonempty")
    closed = symmetrized_power(action, A, 3)
    if action.identity not in closed or inverse_set(action, closed) != closed:
        raise AssertionError("symmetrized cube is not symmetric; this should be impossible")
    square = product_set(action, closed, closed)
    mul, inv = action.mul, action.inv
    closed_set = closed.raw()
    uncovered = set(square.members)
    cover = []
    for w in square.members:  # canonical order
        if w in uncovered:
            cover.append(w)
            wi_base = [mul(w, h) for h in closed]
            uncovered.difference_update(wi_base)
    for w in square:
        if not any(mul(inv(x), w) in closed_set for x in cover):
            raise AssertionError("greedy cover missed a product; this should be impossible")
    cube = product_set(action, product_set(action, A, A), A)
    return ApproxGroupCertificate(
        base_size=len(A),
        closure=closed,
        cover=ElementSet(cover),
        tripling=Fraction(len(cube), len(A)),
        closure_ratio=Fraction(len(closed), len(A)),
    )


# ---------------------------------------------------------------------------
# the pipeline


@dataclass(frozen=True)
class BsgLevel:
    index: int
    alpha: Fraction
    closure: ClosureCertificate
    size: int
    next_size: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.next_size, self.size)


@dataclass(frozen=True)
class BsgTrace:
    """Full decomposition trace.

    ``sym_ratio_power`` is the exact rational |Sym(level alpha_J)| / |A|
    (or its certified upper bound); its J-th root plays the growth
    parameter, and all comparisons involving that root are done on J-th
    powers.  ``power_checked`` records whether the word-length
    memberships were verified against materialized power sets or skipped
    under the size cap.
    """

    kind: str = field(default="bsg-decomposition", init=False)
    alpha: Fraction = Fraction(0)
    J: int = 0
    sym_mode: str = "exact"
    sym_size_or_bound: Fraction = Fraction(0)
    sym_ratio_power: Fraction = Fraction(0)
    levels: tuple = ()
    j_star: int = 0
    g_star: object = None
    A_star: ElementSet = None
    tripling: TriplingCertificate = None
    walk: tuple = ()
    part2_element: object = None
    part2_meet_A: int = 0
    part2_meet_Ainv: int = 0
    part2_meet_base: int = 0
    part2_density_floor: Fraction = Fraction(0)
    part2_transfers: tuple = ()
    part3_rho: Fraction = Fraction(0)
    part3_cover: CoverCertificate = None
    part3_zbound_struct: Optional[Fraction] = None
    power_checked: tuple = ()
    free_mode: Optional[str] = None

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": fraction_str(self.alpha),
            "J": self.J,
            "sym_mode": self.sym_mode,
            "sym_size_or_bound": fraction_str(self.sym_size_or_bound),
            "sym_ratio_power": fraction_str(self.sym_ratio_power),
            "levels": [
                {
                    "index": lv.index,
                    "alpha": fraction_str(lv.alpha),
                    "size": lv.size,
                    "next_size": lv.next_size,
                    "closure": lv.closure.payload(),
                }
                for lv in self.levels
            ],
            "j_star": self.j_star,
            "g_star": canon_str(self.g_star),
            "A_star": [canon_str(g) for g in self.A_star],
            "tripling": self.tripling.payload(),
            "walk": [canon_str(g) for g in self.walk],
            "part2_element": canon_str(self.part2_element),
            "part2_meet_A": self.part2_meet_A,
            "part2_meet_Ainv": self.part2_meet_Ainv,
            "part2_meet_base": self.part2_meet_base,
            "part2_density_floor": fraction_str(self.part2_density_floor),
            "part2_transfers": [t.payload() for t in self.part2_transfers],
            "part3_rho": fraction_str(self.part3_rho),
            "part3_cover": self.part3_cover.payload(),
            "part3_zbound_struct": None
            if self.part3_zbound_struct is None
            else fraction_str(self.part3_zbound_struct),
            "power_checked": list(self.power_checked),
            "free_mode": self.free_mode,
        }


def alpha_sequence(alpha: Fraction, J: int) -> list[Fraction]:
    """alpha_0 = alpha, alpha_{j+1} = alpha_j^2 / 2 (so alpha_J = 2(alpha/2)^(2^J))."""
    out = [Fraction(alpha)]
    for _ in range(J):
        out.append(out[-1] ** 2 / 2)
    closed_form = 2 * (Fraction(alpha) / 2) ** (2**J)
    if out[-1] != closed_form:
        raise AssertionError("alpha recursion disagrees with closed form; impossible")
    return out


def bsg_pipeline(
    action: GroupAction,
    A: ElementSet,
    Y: PointSet,
    alpha,
    J: int,
    sym_mode: str = "exact",
    sym_bound=None,
    S: Optional[ElementSet] = None,
    power_cap: int = 200000,
    free_mode: Optional[str] = None,
) -> BsgTrace:
    """Run the full decomposition.

    sym_mode "exact" computes the symmetry set at the final level;
    "upper_bound" takes any certified upper bound on its size via
    ``sym_bound`` (the growth parameter is monotone in it, so the trace
    stays sound).  ``S`` is the structured set for the pull-back and
    covering parts; it defaults to the extracted set itself.
    """
    alpha = _check_alpha(alpha)
    if J < 1:
        raise HypothesisError(f"J must be at least 1, got {J}")
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    thr = alpha * len(Y)
    for a in A:
        if overlap(action, a, Y) < thr:
            raise HypothesisError(f"element {canon_str(a)} has overlap below alpha|Y|")
    alphas = alpha_sequence(alpha, J)
    sets = [symmetrize(action, A)]
    levels = []
    for j in range(J):
        cert = uniform_approximate_closure(action, sets[j], Y, alphas[j])
        sets.append(cert.product)
        levels.append(
            BsgLevel(index=j, alpha=alphas[j], closure=cert, size=len(sets[j]), next_size=len(sets[j + 1]))
        )

    power_checked = _verify_word_lengths(action, A, sets, power_cap)

    telescoped = Fraction(1)
    for lv in levels:
        telescoped *= lv.ratio
    if telescoped != Fraction(len(sets[J]), len(sets[0])):
        raise AssertionError("telescoping identity failed; this should be impossible")

    if sym_mode == "exact":
        sym = symmetry_set(action, Y, alphas[J])
        sym_value = Fraction(len(sym.members))
    elif sym_mode == "upper_bound":
        if sym_bound is None:
            raise HypothesisError("upper_bound mode needs sym_bound")
        sym_value = Fraction(sym_bound)
    else:
        raise HypothesisError(f"unknown sym_mode {sym_mode!r}")
    if len(sets[J]) > sym_value:
        raise HypothesisError(
            f"final level size {len(sets[J])} exceeds the declared symmetry bound {fraction_str(sym_value)}"
        )
    sym_ratio_power = sym_value / len(A)

    j_star = min(range(J), key=lambda j: (levels[j].ratio, j))
    min_ratio = levels[j_star].ratio
    if min_ratio**J > Fraction(len(sets[J]), len(sets[0])):
        raise AssertionError("pigeonholed level beats the telescoped growth; impossible")
    if min_ratio**J > sym_ratio_power:
        raise AssertionError("pigeonholed level beats the symmetry growth bound; impossible")

    cert_star = levels[j_star].closure
    Aj = sets[j_star]
    pairs = cert_star.bipartite_pairs(action)
    ext = extract_small_tripling(
        action,
        Aj,
        Aj,
        pairs,
        Fraction(len(cert_star.pairs), len(Aj) ** 2),
        levels[j_star].ratio,
    )
    mul, inv = action.mul, action.inv
    g_star = inv(ext.anchor)
    A_star = ext.S
    pulled = ElementSet(mul(ext.anchor, s) for s in A_star)
    if not pulled.issubset(Aj):
        raise AssertionError("extracted set left its level; this should be impossible")
    thr_J = alphas[J] * len(Y)
    for g in pulled:
        if overlap(action, g, Y) < thr_J:
            raise AssertionError("extracted element misses the final symmetry level; impossible")

    S_struct = S if S is not None else A_star
    B = A_star.intersection(S_struct)
    if not B:
        raise HypothesisError("S does not meet the extracted set")
    W = ElementSet(mul(ext.anchor, b) for b in B)

    # Walk density down the levels: at each level i pick a_i maximizing
    # |A_i ∩ a_i T| for the current target T, then translate the target.
    walk = []
    transfers = []
    target = W
    for i in range(j_star - 1, -1, -1):
        tr = bring_structure_back(action, levels[i].closure, target)
        walk.append(tr.anchor)
        transfers.append(tr)
        target = ElementSet(mul(tr.anchor, t) for t in target)
    walk.reverse()
    transfers.reverse()
    part2_element = action.identity
    for a in walk:
        part2_element = mul(part2_element, a)
    part2_element = mul(part2_element, ext.anchor)
    if ElementSet(mul(part2_element, b) for b in B) != target:
        raise AssertionError("walk composition disagrees with the target; impossible")

    # Certified chain: the density of the walked target in A_0 is at least
    # the product of the per-level transfer constants times |W|/|A_{j*}|.
    chain_const = Fraction(1)
    for i in range(j_star):
        chain_const *= alphas[i] ** 2 / (4 * len(sets[i]).bit_length())
    floor_total = chain_const * Fraction(len(W), len(Aj))
    meet_A0B = sum(1 for b in B if mul(part2_element, b) in sets[0])
    if Fraction(meet_A0B, len(sets[0])) < floor_total:
        raise AssertionError("chained density floor failed; this should be impossible")

    gS = ElementSet(mul(part2_element, s) for s in S_struct)
    meet_A = sum(1 for g in gS if g in A)
    Ainv = inverse_set(action, A)
    meet_Ainv = sum(1 for g in gS if g in Ainv)

    rho = Fraction(len(B), len(A_star))
    cover = cover_symmetry(action, W, Y, alphas[J])
    zb_struct = _struct_zbound(action, S_struct, cover.Z, Y, alphas[J])

    try:
        big_power = symmetrized_power(action, A, 2 ** (J + 1), cap=power_cap)
        if part2_element not in big_power:
            raise AssertionError("walked element escaped its word-length bound; impossible")
        power_checked = list(power_checked) + ["part2 element: verified"]
    except ClosureCapError:
        power_checked = list(power_checked) + [f"part2 element: skipped (cap {power_cap})"]

    return BsgTrace(
        alpha=alpha,
        J=J,
        sym_mode=sym_mode,
        sym_size_or_bound=sym_value,
        sym_ratio_power=sym_ratio_power,
        levels=tuple(levels),
        j_star=j_star,
        g_star=g_star,
        A_star=A_star,
        tripling=ext,
        walk=tuple(walk),
        part2_element=part2_element,
        part2_meet_A=meet_A,
        part2_meet_Ainv=meet_Ainv,
        part2_meet_base=meet_A0B,
        part2_density_floor=floor_total,
        part2_transfers=tuple(transfers),
        part3_rho=rho,
        part3_cover=cover,
        part3_zbound_struct=zb_struct,
        power_checked=tuple(power_checked),
        free_mode=free_mode,
    )


def _verify_word_lengths(action, A, sets, cap) -> list:
    """Check each level against the matching symmetrized power of A
    (skipping with a marker when the power set would exceed the cap)."""
    notes = []
    for j, Aj in enumerate(sets):
        try:
            power = symmetrized_power(action, A, 2**j, cap=cap)
        except ClosureCapError:
            notes.append(f"level {j}: skipped (cap {cap})")
            continue
        if not Aj.issubset(power):
            raise AssertionError(f"level {j} escaped its word-length bound; impossible")
        notes.append(f"level {j}: verified")
    return notes


def _struct_zbound(action, S: ElementSet, Z: PointSet, Y: PointSet, alpha: Fraction) -> Optional[Fraction]:
    """The covering bound's correction term evaluated with the structured
    set's own multiplicities (both variants of the final bound are thus
    available to compare)."""
    if not Z:
        return None
    r = count_rAinvA(action, S)
    fix_sum = 0
    for g, c in r.items():
        if g == action.identity:
            continue
        fix_sum += len(fixed_in(action, g, Z)) * c
    return Fraction(len(Y), len(S)) * (1 + Fraction(fix_sum, len(S) * len(Z)))


def check_freeness(action: GroupAction, Y: Optional[PointSet] = None, cap: int = 200000) -> None:
    """Verify the action is free: exhaustively when enumerable, otherwise
    by the declared structural flag."""
    G = action.element_enum()
    X = action.point_enum() if Y is None else Y
    if G is not None and X is not None and len(G) * len(X) <= cap:
        act = action.act
        for g in G:
            if g == action.identity:
                continue
            for x in X:
                if act(g, x) == x:
                    raise HypothesisError(f"action is not free: {canon_str(g)} fixes {canon_str(x)}")
        return
    if not action.free:
        raise HypothesisError("action is not declared free and cannot be checked exhaustively")


def check_almost_free(action: GroupAction, Y: PointSet, n: int, cap: int = 2000000) -> None:
    """Verify |fix(g) ∩ Y| < n for every non-identity g (exhaustively when
    enumerable, otherwise by the declared fixed-point bound)."""
    G = action.element_enum()
    if G is not None and len(G) * len(Y) <= cap:
        act = action.act
        for g in G:
            if g == action.identity:
                continue
            fixed = sum(1 for y in Y if act(g, y) == y)
            if fixed >= n:
                raise HypothesisError(
                    f"{canon_str(g)} fixes {fixed} >= {n} points of Y; almost-freeness fails"
                )
        return
    if action.max_fixed is None or action.max_fixed >= n:
        raise HypothesisError("no usable fixed-point bound for this action")


def bsg_free(action: GroupAction, A: ElementSet, Y: PointSet, alpha, J: int, S=None) -> BsgTrace:
    """Pipeline specialization for free actions: the symmetry size at the
    final level is replaced by the certified bound |Y|/alpha_J, and the
    covering bound carries no stabilizer factor."""
    alpha = _check_alpha(alpha)
    check_freeness(action)
    alphas = alpha_sequence(alpha, J)
    bound = Fraction(len(Y)) / alphas[J]
    trace = bsg_pipeline(
        action, A, Y, alpha, J, sym_mode="upper_bound", sym_bound=bound, S=S, free_mode="free"
    )
    # Trivial stabilizers force the max-stabilizer covering bound down to
    # exactly 2|Y| / (alpha_J |B|).
    B = trace.A_star.intersection(S if S is not None else trace.A_star)
    iq = next(i for i in trace.part3_cover.inequalities if i.name == "cover-bound-max-stab")
    if iq.rhs != 2 * Fraction(len(Y)) / (alphas[J] * len(B)):
        raise AssertionError("free-action covering bound kept a stabilizer factor; impossible")
    return trace


def bsg_almost_free(action: GroupAction, A: ElementSet, Y: PointSet, alpha, J: int, n: int, S=None) -> BsgTrace:
    """Pipeline specialization when every non-identity element fixes fewer
    than n points of Y; the final-level symmetry size is replaced by the
    almost-free bound, which must be applicable at that level."""
    alpha = _check_alpha(alpha)
    check_almost_free(action, Y, n)
    alphas = alpha_sequence(alpha, J)
    aJ = alphas[J]
    if len(Y) <= (1 + 1 / aJ) * n:
        raise HypothesisError(
            f"|Y| = {len(Y)} too small for the almost-free bound at level {fraction_str(aJ)}"
        )
    bound = (1 + Fraction(n) / (aJ * len(Y) - (1 + aJ) * n)) * Fraction(len(Y)) ** n / aJ**n
    trace = bsg_pipeline(
        action, A, Y, alpha, J, sym_mode="upper_bound", sym_bound=bound, S=S, free_mode=f"almost-free({n})"
    )
    # The structured-set correction term stays below its fixed-point cap
    # n|S|/|Z| (each fix(g) meets Z in fewer than n points).
    if trace.part3_zbound_struct is not None:
        S_struct = S if S is not None else trace.A_star
        cap_form = Fraction(len(Y), len(S_struct)) * (
            1 + Fraction(n * len(S_struct), len(trace.part3_cover.Z))
        )
        if trace.part3_zbound_struct > cap_form:
            raise AssertionError("almost-free correction exceeded its cap; impossible")
    return trace
