"""Abstract finite group actions and the primitive set operations.

Everything here is exact: sets are deduplicated collections of canonical
values in encoding order, and all counts are arbitrary-width integers.
All containers are immutable after construction and safe to share
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .canon import Canon, canon_str, sort_key


class ActcombError(Exception):
    """Base error for this package."""


class HypothesisError(ActcombError):
    """A stated hypothesis of an operation does not hold for the inputs."""


class DescriptorError(ActcombError):
    """Invalid action or generator descriptor."""


class CapabilityError(ActcombError):
    """The action lacks an enumeration capability the operation needs."""


class ClosureCapError(ActcombError):
    """A generated closure exceeded its size cap."""


class VerificationError(ActcombError):
    """A certificate failed independent re-verification."""

    def __init__(self, claim: str, detail: str):
        super().__init__(f"{claim}: {detail}")
        self.claim = claim
        self.detail = detail


class CanonSet:
    """Immutable deduplicated set of canonical values in encoding order."""

    __slots__ = ("members", "_set")

    def __init__(self, values: Iterable[Canon] = ()):
        uniq = set(values)
        self.members: tuple = tuple(sorted(uniq, key=sort_key))
        self._set = frozenset(uniq)

    def __iter__(self) -> Iterator[Canon]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, value) -> bool:
        return value in self._set

    def __eq__(self, other) -> bool:
        return isinstance(other, CanonSet) and self._set == other._set

    def __hash__(self) -> int:
        return hash(self._set)

    def __repr__(self) -> str:
        inner = ",".join(canon_str(v) for v in self.members[:8])
        if len(self.members) > 8:
            inner += ",..."
        return f"{{{inner}}}"

    def first(self) -> Canon:
        if not self.members:
            raise ValueError("empty set")
        return self.members[0]

    def union(self, *others: "CanonSet") -> "CanonSet":
        s = set(self._set)
        for o in others:
            s.update(o._set)
        return CanonSet(s)

    def intersection(self, other: "CanonSet") -> "CanonSet":
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        return CanonSet(v for v in small._set if v in big._set)

    def difference(self, other: "CanonSet") -> "CanonSet":
        return CanonSet(v for v in self._set if v not in other._set)

    def issubset(self, other: "CanonSet") -> bool:
        return self._set <= other._set

    def raw(self) -> frozenset:
        return self._set


ElementSet = CanonSet
PointSet = CanonSet


class Relation:
    """Finite deduplicated set of ordered pairs (element/element or element/point)."""

    __slots__ = ("pairs", "_set", "sides")

    def __init__(self, pairs: Iterable[tuple], sides: tuple[str, str] = ("element", "point")):
        uniq = set(pairs)
        self.pairs: tuple = tuple(sorted(uniq, key=lambda p: (sort_key(p[0]), sort_key(p[1]))))
        self._set = frozenset(uniq)
        self.sides = sides

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        return pair in self._set

    def __eq__(self, other) -> bool:
        return isinstance(other, Relation) and self._set == other._set

    def __hash__(self) -> int:
        return hash(self._set)

    def swapped(self) -> "Relation":
        return Relation(((b, a) for a, b in self._set), sides=(self.sides[1], self.sides[0]))

    def is_swap_symmetric(self) -> bool:
        return all((b, a) in self._set for a, b in self._set)

    def left_set(self) -> CanonSet:
        return CanonSet(a for a, _ in self._set)

    def right_set(self) -> CanonSet:
        return CanonSet(b for _, b in self._set)

    def degrees_left(self) -> "CountMap":
        counts: dict = {}
        for a, _ in self._set:
            counts[a] = counts.get(a, 0) + 1
        return CountMap(counts)


class CountMap:
    """Multiplicity function from canonical keys to positive integer counts."""

    __slots__ = ("entries",)

    def __init__(self, entries: dict):
        clean = {k: int(v) for k, v in entries.items() if v}
        if any(v < 0 for v in clean.values()):
            raise ValueError("counts must be nonnegative")
        self.entries = dict(sorted(clean.items(), key=lambda kv: sort_key(kv[0])))

    def __getitem__(self, key) -> int:
        return self.entries.get(key, 0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, CountMap) and self.entries == other.entries

    def items(self):
        return self.entries.items()

    def keys(self) -> CanonSet:
        return CanonSet(self.entries)

    def total(self) -> int:
        return sum(self.entries.values())

    def support_size(self) -> int:
        return len(self.entries)


class GroupAction:
    """A group acting on a space: arithmetic, the action map, capabilities.

    Subclasses must provide ``identity``, ``mul``, ``inv`` and ``act`` and
    may provide the optional capabilities ``element_enum`` (full
    enumeration of G), ``point_enum`` (full enumeration of X) and
    ``transporter_enum(x, y)`` (all g with g(x) = y).  ``free`` marks a
    structurally free action; ``max_fixed`` bounds |fix(g)| for g != e
    when known.
    """

    name: str = "action"
    free: bool = False
    max_fixed: Optional[int] = None

    @property
    def identity(self) -> Canon:
        raise NotImplementedError

    def mul(self, g: Canon, h: Canon) -> Canon:
        raise NotImplementedError

    def inv(self, g: Canon) -> Canon:
        raise NotImplementedError

    def act(self, g: Canon, x: Canon) -> Canon:
        raise NotImplementedError

    def element_enum(self) -> Optional[ElementSet]:
        return None

    def point_enum(self) -> Optional[PointSet]:
        return None

    def transporter_enum(self, x: Canon, y: Canon) -> Optional[ElementSet]:
        return None

    def parse_element(self, text: str) -> Canon:
        from .canon import parse_canon

        return parse_canon(text)

    def parse_point(self, text: str) -> Canon:
        from .canon import parse_canon

        return parse_canon(text)

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"

    # Cached index model for the fast counting kernels; None when the
    # action is too large or not enumerable.
    _index_model = None
    _index_model_built = False

    def index_model(self):
        if not self._index_model_built:
            from .kernels.model import build_index_model

            self._index_model = build_index_model(self)
            self._index_model_built = True
        return self._index_model


def image_set(action: GroupAction, A: ElementSet, Y: PointSet) -> PointSet:
    """Image set {g(y) : g in A, y in Y}."""
    act = action.act
    return PointSet(act(g, y) for g in A for y in Y)


def partial_image_set(action: GroupAction, E: Relation) -> PointSet:
    """Image set restricted to the pairs of E."""
    act = action.act
    return PointSet(act(g, y) for g, y in E)


def product_set(action: GroupAction, A: ElementSet, B: ElementSet) -> ElementSet:
    """Product set AB = {ab : a in A, b in B}."""
    if len(A) * len(B) >= 512:  # table build only pays off for big products
        model = action.index_model()
        if model is not None:
            return model.product_set(A, B)
    mul = action.mul
    return ElementSet(mul(a, b) for a in A for b in B)


def inverse_set(action: GroupAction, A: ElementSet) -> ElementSet:
    inv = action.inv
    return ElementSet(inv(a) for a in A)


def symmetrize(action: GroupAction, A: ElementSet) -> ElementSet:
    """A together with its inverses and the identity."""
    return A.union(inverse_set(action, A), ElementSet([action.identity]))


def symmetrized_power(action: GroupAction, A: ElementSet, k: int, cap: Optional[int] = None) -> ElementSet:
    """k-fold product of the symmetrization of A.

    Stops early at a multiplicative fixpoint (all higher powers agree).
    Raises ClosureCapError if an intermediate set exceeds ``cap``.
    """
    if k < 1:
        raise HypothesisError(f"power must be >= 1, got {k}")
    base = symmetrize(action, A)
    power = base
    for _ in range(k - 1):
        nxt = product_set(action, power, base)
        if cap is not None and len(nxt) > cap:
            raise ClosureCapError(f"symmetrized power exceeded cap {cap}")
        if len(nxt) == len(power):
            break
        power = nxt
    return power


def transporter_in(action: GroupAction, A: ElementSet, x: Canon, y: Canon) -> ElementSet:
    """A intersected with the transporter {g : g(x) = y}."""
    act = action.act
    return ElementSet(g for g in A if act(g, x) == y)


def stabilizer_in(action: GroupAction, A: ElementSet, x: Canon) -> ElementSet:
    return transporter_in(action, A, x, x)


def set_stabilizer_in(action: GroupAction, A: ElementSet, Y: PointSet) -> ElementSet:
    """Elements of A mapping Y onto itself as a set."""
    act = action.act
    out = []
    for g in A:
        if all(act(g, y) in Y for y in Y) and image_set(action, ElementSet([g]), Y) == Y:
            out.append(g)
    return ElementSet(out)


def fixed_in(action: GroupAction, g: Canon, Y: PointSet) -> PointSet:
    act = action.act
    return PointSet(y for y in Y if act(g, y) == y)


def count_rE(action: GroupAction, E: Relation) -> CountMap:
    """Multiplicity of each image point over the pairs of E; mass |E|."""
    act = action.act
    counts: dict = {}
    for g, y in E:
        x = act(g, y)
        counts[x] = counts.get(x, 0) + 1
    return CountMap(counts)


def count_rAY(action: GroupAction, A: ElementSet, Y: PointSet) -> CountMap:
    """Multiplicity of each image point over A x Y; mass |A||Y|."""
    act = action.act
    counts: dict = {}
    for g in A:
        for y in Y:
            x = act(g, y)
            counts[x] = counts.get(x, 0) + 1
    return CountMap(counts)


def count_rAinvA(action: GroupAction, A: ElementSet) -> CountMap:
    """g -> |A intersect Ag|, i.e. the number of pairs with a1^{-1} a2 = g; mass |A|^2."""
    mul, inv = action.mul, action.inv
    counts: dict = {}
    for a1 in A:
        a1i = inv(a1)
        for a2 in A:
            g = mul(a1i, a2)
            counts[g] = counts.get(g, 0) + 1
    return CountMap(counts)


def count_map(action: GroupAction, kind: str, **kw) -> CountMap:
    """Dispatcher over the three multiplicity counts (CLI surface)."""
    if kind == "rE":
        return count_rE(action, kw["E"])
    if kind == "rAY":
        return count_rAY(action, kw["A"], kw["Y"])
    if kind == "rAinvA":
        return count_rAinvA(action, kw["A"])
    raise DescriptorError(f"unknown count kind {kind!r}")


@dataclass(frozen=True)
class ExactImageCertificate:
    """Witness for the exact case |A(Y)| = |Y|: A^{-1}A stabilizes Y and
    Y splits into orbits of the generated subgroup."""

    kind: str = field(default="exact-image", init=False)
    set_size: int = 0
    image_size: int = 0
    diff_set_size: int = 0
    subgroup_order: int = 0
    orbit_count: int = 0
    orbit_sizes: tuple = ()

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "set_size": self.set_size,
            "image_size": self.image_size,
            "diff_set_size": self.diff_set_size,
            "subgroup_order": self.subgroup_order,
            "orbit_count": self.orbit_count,
            "orbit_sizes": list(self.orbit_sizes),
        }


def exact_image_case(action: GroupAction, A: ElementSet, Y: PointSet, cap: int = 100000) -> ExactImageCertificate:
    """Check the exact case: if |A(Y)| = |Y| then A^{-1}A lies in the
    set stabilizer of Y and Y is a union of orbits of <A^{-1}A>."""
    if not A or not Y:
        raise HypothesisError("A and Y must be nonempty")
    img = image_set(action, A, Y)
    if len(img) != len(Y):
        raise HypothesisError(f"|A(Y)|={len(img)} != |Y|={len(Y)}")
    diff = product_set(action, inverse_set(action, A), A)
    if image_set(action, diff, Y) != Y:
        raise VerificationError("exact-image", "A^{-1}A(Y) != Y")
    if set_stabilizer_in(action, diff, Y) != diff:
        raise VerificationError("exact-image", "A^{-1}A is not inside the set stabilizer of Y")
    from .actions import generated_subgroup

    H = generated_subgroup(action, diff, cap=cap)
    remaining = set(Y.raw())
    sizes = []
    while remaining:
        y = min(remaining, key=sort_key)
        orbit = image_set(action, H, PointSet([y]))
        if not orbit.issubset(Y):
            raise VerificationError("exact-image", f"orbit of {canon_str(y)} leaves Y")
        remaining -= orbit.raw()
        sizes.append(len(orbit))
    return ExactImageCertificate(
        set_size=len(A),
        image_size=len(img),
        diff_set_size=len(diff),
        subgroup_order=len(H),
        orbit_count=len(sizes),
        orbit_sizes=tuple(sorted(sizes)),
    )
