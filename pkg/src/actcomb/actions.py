"""Concrete built-in actions and deterministic structured-set generators.

Groups are carried either natively (cyclic residues, affine pairs,
matrices) or through a :class:`GroupCarrier` for translation and coset
actions over explicit finite groups.  All element and point values are
canonical (see :mod:`actcomb.canon`); construction validates and
normalizes inputs, so downstream code may compare by equality.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterable, Optional

from .canon import Canon, canon_str, parse_canon, sort_key
from .core import (
    CanonSet,
    CapabilityError,
    ClosureCapError,
    DescriptorError,
    ElementSet,
    GroupAction,
    HypothesisError,
    PointSet,
)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _require_prime(p) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise DescriptorError(f"modulus must be prime, got {p!r}")
    return p


# ---------------------------------------------------------------------------
# group carriers


class GroupCarrier:
    """A finite (or infinite) group given by callables and optional enumeration."""

    def __init__(self, name, identity, mul, inv, elements=None, descriptor=None, normalize=None):
        self.name = name
        self.identity = identity
        self.mul = mul
        self.inv = inv
        self.elements: Optional[ElementSet] = elements
        self._descriptor = descriptor or {"kind": name}
        self.normalize = normalize or (lambda v: v)

    def descriptor(self) -> dict:
        return self._descriptor


def carrier_cyclic(n: int) -> GroupCarrier:
    if not isinstance(n, int) or n < 1:
        raise DescriptorError(f"cyclic order must be positive, got {n!r}")

    def norm(v):
        if not isinstance(v, int):
            raise DescriptorError(f"cyclic element must be an integer, got {v!r}")
        return v % n

    return GroupCarrier(
        name=f"Z/{n}",
        identity=0,
        mul=lambda a, b: (a + b) % n,
        inv=lambda a: (-a) % n,
        elements=ElementSet(range(n)),
        descriptor={"kind": "cyclic", "n": n},
        normalize=norm,
    )


def _perm_mul(g: tuple, h: tuple) -> tuple:
    return tuple(g[h[i]] for i in range(len(g)))


def _perm_inv(g: tuple) -> tuple:
    out = [0] * len(g)
    for i, gi in enumerate(g):
        out[gi] = i
    return tuple(out)


def carrier_symmetric(n: int) -> GroupCarrier:
    if not isinstance(n, int) or not 1 <= n <= 7:
        raise DescriptorError(f"symmetric group degree must be in 1..7, got {n!r}")
    elements = ElementSet(itertools.permutations(range(n)))

    def norm(v):
        v = tuple(v) if not isinstance(v, tuple) else v
        if sorted(v) != list(range(n)):
            raise DescriptorError(f"not a permutation of 0..{n-1}: {v!r}")
        return v

    return GroupCarrier(
        name=f"S{n}",
        identity=tuple(range(n)),
        mul=_perm_mul,
        inv=_perm_inv,
        elements=elements,
        descriptor={"kind": "perm", "n": n},
        normalize=norm,
    )


def carrier_product(factors: list[GroupCarrier]) -> GroupCarrier:
    if len(factors) < 2:
        raise DescriptorError("product needs at least two factors")
    idents = tuple(c.identity for c in factors)

    def mul(a, b):
        return tuple(c.mul(x, y) for c, x, y in zip(factors, a, b))

    def inv(a):
        return tuple(c.inv(x) for c, x in zip(factors, a))

    def norm(v):
        v = tuple(v) if not isinstance(v, tuple) else v
        if len(v) != len(factors):
            raise DescriptorError(f"product element needs {len(factors)} components: {v!r}")
        return tuple(c.normalize(x) for c, x in zip(factors, v))

    elements = None
    if all(c.elements is not None for c in factors):
        elements = ElementSet(itertools.product(*[c.elements for c in factors]))
    return GroupCarrier(
        name="x".join(c.name for c in factors),
        identity=idents,
        mul=mul,
        inv=inv,
        elements=elements,
        descriptor={"kind": "product", "factors": [c.descriptor() for c in factors]},
        normalize=norm,
    )


def _sl2_elems(p: int) -> list:
    out = []
    for a in range(p):
        for b in range(p):
            for c in range(p):
                for d in range(p):
                    if (a * d - b * c) % p == 1:
                        out.append((a, b, c, d))
    return out


def carrier_sl2(p: int) -> GroupCarrier:
    _require_prime(p)
    if p > 13:
        raise DescriptorError(f"sl2 carrier enumerates the group; p <= 13 required, got {p}")

    def mul(g, h):
        a, b, c, d = g
        e, f, i, j = h
        return ((a * e + b * i) % p, (a * f + b * j) % p, (c * e + d * i) % p, (c * f + d * j) % p)

    def inv(g):
        a, b, c, d = g
        return (d % p, (-b) % p, (-c) % p, a % p)

    def norm(v):
        v = tuple(v) if not isinstance(v, tuple) else v
        if len(v) != 4 or not all(isinstance(x, int) for x in v):
            raise DescriptorError(f"sl2 element must be a 4-tuple of integers: {v!r}")
        v = tuple(x % p for x in v)
        if (v[0] * v[3] - v[1] * v[2]) % p != 1:
            raise DescriptorError(f"matrix has determinant != 1 mod {p}: {v!r}")
        return v

    return GroupCarrier(
        name=f"SL2(F{p})",
        identity=(1, 0, 0, 1),
        mul=mul,
        inv=inv,
        elements=ElementSet(_sl2_elems(p)),
        descriptor={"kind": "sl2", "p": p},
        normalize=norm,
    )


def carrier_affine(p: int) -> GroupCarrier:
    _require_prime(p)

    def mul(g, h):
        a, b = g
        c, d = h
        return ((a * c) % p, (a * d + b) % p)

    def inv(g):
        a, b = g
        ai = pow(a, p - 2, p)
        return (ai, (-ai * b) % p)

    def norm(v):
        v = tuple(v) if not isinstance(v, tuple) else v
        if len(v) != 2 or not all(isinstance(x, int) for x in v):
            raise DescriptorError(f"affine element must be an (a,b) pair: {v!r}")
        a, b = v[0] % p, v[1] % p
        if a == 0:
            raise DescriptorError(f"affine scale must be nonzero mod {p}: {v!r}")
        return (a, b)

    return GroupCarrier(
        name=f"Aff(1,F{p})",
        identity=(1, 0),
        mul=mul,
        inv=inv,
        elements=ElementSet((a, b) for a in range(1, p) for b in range(p)),
        descriptor={"kind": "affine_group", "p": p},
        normalize=norm,
    )


def make_carrier(desc: dict) -> GroupCarrier:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise DescriptorError(f"group descriptor must be a dict with 'kind': {desc!r}")
    kind = desc["kind"]
    if kind == "cyclic":
        return carrier_cyclic(desc.get("n"))
    if kind == "perm":
        return carrier_symmetric(desc.get("n"))
    if kind == "product":
        return carrier_product([make_carrier(d) for d in desc.get("factors", [])])
    if kind == "sl2":
        return carrier_sl2(desc.get("p"))
    if kind == "affine_group":
        return carrier_affine(desc.get("p"))
    raise DescriptorError(f"unknown group kind {kind!r}")


# ---------------------------------------------------------------------------
# actions


class SelfTranslationAction(GroupAction):
    """A group acting on itself by left translation (always free)."""

    free = True
    max_fixed = 0

    def __init__(self, carrier: GroupCarrier):
        self.carrier = carrier
        self.name = f"{carrier.name} translation"

    @property
    def identity(self):
        return self.carrier.identity

    def mul(self, g, h):
        return self.carrier.mul(g, h)

    def inv(self, g):
        return self.carrier.inv(g)

    def act(self, g, x):
        return self.carrier.mul(g, x)

    def element_enum(self):
        return self.carrier.elements

    def point_enum(self):
        return self.carrier.elements

    def transporter_enum(self, x, y):
        return ElementSet([self.carrier.mul(y, self.carrier.inv(x))])

    def normalize_element(self, v):
        return self.carrier.normalize(v)

    normalize_point = normalize_element

    def descriptor(self):
        return {"kind": "translation", "group": self.carrier.descriptor()}


def cyclic_translation(n: int) -> SelfTranslationAction:
    return SelfTranslationAction(carrier_cyclic(n))


class IntegerTranslationAction(GroupAction):
    """The integers acting on themselves by translation (not enumerable)."""

    free = True
    max_fixed = 0
    name = "Z translation"

    @property
    def identity(self):
        return 0

    def mul(self, g, h):
        return g + h

    def inv(self, g):
        return -g

    def act(self, g, x):
        return g + x

    def transporter_enum(self, x, y):
        return ElementSet([y - x])

    def normalize_element(self, v):
        if not isinstance(v, int):
            raise DescriptorError(f"integer translation element must be an int: {v!r}")
        return v

    normalize_point = normalize_element

    def descriptor(self):
        return {"kind": "integer"}


class AffineFpAction(GroupAction):
    """x -> a x + b over F_p; elements are (a, b) with a nonzero."""

    free = False
    max_fixed = 1

    def __init__(self, p: int):
        self.p = _require_prime(p)
        self.carrier = carrier_affine(p)
        self.name = f"Aff(1,F{p}) on F{p}"

    @property
    def identity(self):
        return (1, 0)

    def mul(self, g, h):
        return self.carrier.mul(g, h)

    def inv(self, g):
        return self.carrier.inv(g)

    def act(self, g, x):
        return (g[0] * x + g[1]) % self.p

    def element_enum(self):
        return self.carrier.elements

    def point_enum(self):
        return PointSet(range(self.p))

    def transporter_enum(self, x, y):
        p = self.p
        return ElementSet((a, (y - a * x) % p) for a in range(1, p))

    def normalize_element(self, v):
        return self.carrier.normalize(v)

    def normalize_point(self, v):
        if not isinstance(v, int):
            raise DescriptorError(f"point must be an integer mod {self.p}: {v!r}")
        return v % self.p

    def descriptor(self):
        return {"kind": "affine", "p": self.p}


class CosetSpaceAction(GroupAction):
    """Left multiplication on the coset space G/H with canonical representatives."""

    free = False

    def __init__(self, carrier: GroupCarrier, subgroup_gens: Iterable[Canon]):
        if carrier.elements is None:
            raise DescriptorError("coset action needs an enumerable ambient group")
        self.carrier = carrier
        gens = ElementSet(carrier.normalize(g) for g in subgroup_gens)
        self.subgroup = _closure(carrier.mul, carrier.inv, carrier.identity, gens, cap=len(carrier.elements))
        self._rep_cache: dict = {}
        reps = {self.coset_rep(g) for g in carrier.elements}
        self._points = PointSet(reps)
        self.name = f"{carrier.name}/H({len(self.subgroup)})"

    def coset_rep(self, g):
        r = self._rep_cache.get(g)
        if r is None:
            mul = self.carrier.mul
            coset = [mul(g, h) for h in self.subgroup]
            r = min(coset, key=sort_key)
            for c in coset:
                self._rep_cache[c] = r
        return r

    @property
    def identity(self):
        return self.carrier.identity

    def mul(self, g, h):
        return self.carrier.mul(g, h)

    def inv(self, g):
        return self.carrier.inv(g)

    def act(self, g, x):
        return self.coset_rep(self.carrier.mul(g, x))

    def element_enum(self):
        return self.carrier.elements

    def point_enum(self):
        return self._points

    def transporter_enum(self, x, y):
        mul, inv = self.carrier.mul, self.carrier.inv
        xi = inv(x)
        return ElementSet(mul(mul(y, h), xi) for h in self.subgroup)

    def normalize_element(self, v):
        return self.carrier.normalize(v)

    def normalize_point(self, v):
        return self.coset_rep(self.carrier.normalize(v))

    def descriptor(self):
        return {
            "kind": "coset",
            "group": self.carrier.descriptor(),
            "subgroup_gens": [canon_str(g) for g in self.subgroup],
        }


class PermutationNaturalAction(GroupAction):
    """The full symmetric group on n letters acting on {0..n-1}."""

    free = False

    def __init__(self, n: int):
        self.n = n
        self.carrier = carrier_symmetric(n)
        self.max_fixed = max(n - 2, 0)
        self.name = f"S{n} natural"

    @property
    def identity(self):
        return self.carrier.identity

    def mul(self, g, h):
        return _perm_mul(g, h)

    def inv(self, g):
        return _perm_inv(g)

    def act(self, g, x):
        return g[x]

    def element_enum(self):
        return self.carrier.elements

    def point_enum(self):
        return PointSet(range(self.n))

    def transporter_enum(self, x, y):
        return ElementSet(g for g in self.carrier.elements if g[x] == y)

    def normalize_element(self, v):
        return self.carrier.normalize(v)

    def normalize_point(self, v):
        if not isinstance(v, int) or not 0 <= v < self.n:
            raise DescriptorError(f"point must be in 0..{self.n-1}: {v!r}")
        return v

    def descriptor(self):
        return {"kind": "perm_natural", "n": self.n}


INF = "inf"


class ProjectiveSL2Action(GroupAction):
    """PSL_2(F_p) acting on the projective line F_p plus the point at infinity.

    Matrices are stored as det-1 quadruples normalized up to sign (first
    nonzero entry in 1..(p-1)/2 for odd p), so equality is canonical.
    """

    free = False

    def __init__(self, p: int):
        self.p = _require_prime(p)
        if p > 13:
            raise DescriptorError(f"projective action enumerates PSL2; p <= 13 required, got {p}")
        self.max_fixed = 2
        self.name = f"PSL2(F{p}) on P1"
        self._elements = ElementSet(self._normalize_sign(m) for m in _sl2_elems(p))
        self._points = PointSet(list(range(p)) + [INF])
        self._trans_cache: dict = {}

    def _normalize_sign(self, m: tuple) -> tuple:
        p = self.p
        if p == 2:
            return m
        for v in m:
            if v:
                if v > (p - 1) // 2:
                    return tuple((-x) % p for x in m)
                return m
        raise DescriptorError("zero matrix")

    @property
    def identity(self):
        return (1, 0, 0, 1)

    def mul(self, g, h):
        p = self.p
        a, b, c, d = g
        e, f, i, j = h
        return self._normalize_sign(
            ((a * e + b * i) % p, (a * f + b * j) % p, (c * e + d * i) % p, (c * f + d * j) % p)
        )

    def inv(self, g):
        p = self.p
        a, b, c, d = g
        return self._normalize_sign((d % p, (-b) % p, (-c) % p, a % p))

    def act(self, g, x):
        p = self.p
        a, b, c, d = g
        if x == INF:
            if c == 0:
                return INF
            return (a * pow(c, p - 2, p)) % p
        den = (c * x + d) % p
        if den == 0:
            return INF
        return ((a * x + b) * pow(den, p - 2, p)) % p

    def element_enum(self):
        return self._elements

    def point_enum(self):
        return self._points

    def transporter_enum(self, x, y):
        key = (x, y)
        t = self._trans_cache.get(key)
        if t is None:
            t = ElementSet(g for g in self._elements if self.act(g, x) == y)
            self._trans_cache[key] = t
        return t

    def normalize_element(self, v):
        v = tuple(v) if not isinstance(v, tuple) else v
        if len(v) != 4 or not all(isinstance(x, int) for x in v):
            raise DescriptorError(f"projective element must be a 4-tuple: {v!r}")
        v = tuple(x % self.p for x in v)
        if (v[0] * v[3] - v[1] * v[2]) % self.p != 1:
            raise DescriptorError(f"matrix has determinant != 1 mod {self.p}: {v!r}")
        return self._normalize_sign(v)

    def normalize_point(self, v):
        if v == INF:
            return INF
        if not isinstance(v, int):
            raise DescriptorError(f"point must be an integer or 'inf': {v!r}")
        return v % self.p

    def descriptor(self):
        return {"kind": "projective_sl2", "p": self.p}


def _mat_mul_q(g, h):
    n = len(g)
    return tuple(tuple(sum(g[i][k] * h[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def _mat_inv_q(g):
    """Exact inverse by Gauss-Jordan elimination over the rationals."""
    n = len(g)
    aug = [[Fraction(g[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise DescriptorError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(aug[i][n:]) for i in range(n))


class LinearActionQ(GroupAction):
    """Invertible rational matrices acting on rational column vectors (exact)."""

    free = False

    def __init__(self, n: int):
        if not isinstance(n, int) or n < 1:
            raise DescriptorError(f"dimension must be a positive integer: {n!r}")
        self.n = n
        self.name = f"GL{n}(Q) on Q^{n}"

    @property
    def identity(self):
        n = self.n
        return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))

    def mul(self, g, h):
        return _mat_mul_q(g, h)

    def inv(self, g):
        return _mat_inv_q(g)

    def act(self, g, x):
        return tuple(sum(row[j] * x[j] for j in range(self.n)) for row in g)

    def transporter_enum(self, x, y):
        if self.n == 1 and x[0] != 0:
            return ElementSet([((Fraction(y[0]) / Fraction(x[0]),),)])
        return None

    def normalize_element(self, v):
        n = self.n
        try:
            m = tuple(tuple(Fraction(x) for x in row) for row in v)
        except (TypeError, ValueError) as exc:
            raise DescriptorError(f"bad rational matrix: {v!r}") from exc
        if len(m) != n or any(len(r) != n for r in m):
            raise DescriptorError(f"matrix must be {n}x{n}: {v!r}")
        _mat_inv_q(m)  # raises on singular
        return m

    def normalize_point(self, v):
        try:
            w = tuple(Fraction(x) for x in v)
        except (TypeError, ValueError) as exc:
            raise DescriptorError(f"bad rational vector: {v!r}") from exc
        if len(w) != self.n:
            raise DescriptorError(f"vector must have {self.n} components: {v!r}")
        return w

    def descriptor(self):
        return {"kind": "linear_q", "n": self.n}


class LinearFpAction(GroupAction):
    """GL_n(F_p) acting on F_p^n (enumerable for small n, p)."""

    free = False

    def __init__(self, n: int, p: int):
        self.p = _require_prime(p)
        if not isinstance(n, int) or n < 1:
            raise DescriptorError(f"dimension must be a positive integer: {n!r}")
        if p**(n * n) > 600000:
            raise DescriptorError(f"GL_{n}(F_{p}) too large to enumerate")
        self.n = n
        self.name = f"GL{n}(F{p}) on F{p}^{n}"
        invertible = []
        for flat in itertools.product(range(p), repeat=n * n):
            m = self._reshape(flat)
            if self._det(m) % p != 0:
                invertible.append(m)
        self._elements = ElementSet(invertible)
        self._points = PointSet(itertools.product(range(p), repeat=n))

    def _reshape(self, flat):
        n = self.n
        return tuple(tuple(flat[i * n + j] for j in range(n)) for i in range(n))

    def _det(self, m):
        n = self.n
        if n == 1:
            return m[0][0]
        if n == 2:
            return m[0][0] * m[1][1] - m[0][1] * m[1][0]
        total = 0
        for perm in itertools.permutations(range(n)):
            sign = 1
            for i in range(n):
                for j in range(i + 1, n):
                    if perm[i] > perm[j]:
                        sign = -sign
            prod = 1
            for i in range(n):
                prod *= m[i][perm[i]]
            total += sign * prod
        return total

    @property
    def identity(self):
        n = self.n
        return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))

    def mul(self, g, h):
        n, p = self.n, self.p
        return tuple(tuple(sum(g[i][k] * h[k][j] for k in range(n)) % p for j in range(n)) for i in range(n))

    def inv(self, g):
        p = self.p
        q = tuple(tuple(Fraction(x) for x in row) for row in g)
        # Fraction inverse then reduce: denominators are invertible mod p.
        qi = _mat_inv_q(q)
        out = []
        for row in qi:
            r = []
            for x in row:
                r.append(x.numerator * pow(x.denominator, p - 2, p) % p)
            out.append(tuple(r))
        return tuple(out)

    def act(self, g, x):
        n, p = self.n, self.p
        return tuple(sum(g[i][j] * x[j] for j in range(n)) % p for i in range(n))

    def element_enum(self):
        return self._elements

    def point_enum(self):
        return self._points

    def transporter_enum(self, x, y):
        return ElementSet(g for g in self._elements if self.act(g, x) == y)

    def normalize_element(self, v):
        n, p = self.n, self.p
        m = tuple(tuple(int(x) % p for x in row) for row in v)
        if len(m) != n or any(len(r) != n for r in m):
            raise DescriptorError(f"matrix must be {n}x{n}: {v!r}")
        if self._det(m) % p == 0:
            raise DescriptorError(f"matrix is singular mod {p}: {v!r}")
        return m

    def normalize_point(self, v):
        p = self.p
        w = tuple(int(x) % p for x in v)
        if len(w) != self.n:
            raise DescriptorError(f"vector must have {self.n} components: {v!r}")
        return w

    def descriptor(self):
        return {"kind": "linear_fp", "n": self.n, "p": self.p}


class DiagonalPowerAction(GroupAction):
    """The same group acting componentwise on n-tuples of points.

    With ``distinct_only`` the space is the set of tuples with pairwise
    distinct components, which is closed under the action; if every
    non-identity element of the base fixes fewer than n points, the
    diagonal action on distinct tuples is free.
    """

    def __init__(self, base: GroupAction, n: int, distinct_only: bool = True):
        if not isinstance(n, int) or n < 1:
            raise DescriptorError(f"power must be a positive integer: {n!r}")
        self.base = base
        self.n = n
        self.distinct_only = distinct_only
        self.name = f"{base.name}^({n})" if distinct_only else f"{base.name}^{n}"
        if distinct_only and base.max_fixed is not None and base.max_fixed < n:
            self.free = True
            self.max_fixed = 0
        else:
            self.free = False
            self.max_fixed = None

    @property
    def identity(self):
        return self.base.identity

    def mul(self, g, h):
        return self.base.mul(g, h)

    def inv(self, g):
        return self.base.inv(g)

    def act(self, g, x):
        act = self.base.act
        return tuple(act(g, xi) for xi in x)

    def element_enum(self):
        return self.base.element_enum()

    def point_enum(self):
        base_pts = self.base.point_enum()
        if base_pts is None or len(base_pts) ** self.n > 200000:
            return None
        tuples = itertools.product(*[base_pts.members for _ in range(self.n)])
        if self.distinct_only:
            tuples = (t for t in tuples if len(set(t)) == self.n)
        return PointSet(tuples)

    def transporter_enum(self, x, y):
        first = self.base.transporter_enum(x[0], y[0])
        if first is None:
            return None
        act = self.base.act
        return ElementSet(
            g for g in first if all(act(g, xi) == yi for xi, yi in zip(x[1:], y[1:]))
        )

    def normalize_element(self, v):
        norm = getattr(self.base, "normalize_element", lambda w: w)
        return norm(v)

    def normalize_point(self, v):
        v = tuple(v) if not isinstance(v, tuple) else v
        if len(v) != self.n:
            raise DescriptorError(f"tuple point must have {self.n} components: {v!r}")
        norm = getattr(self.base, "normalize_point", lambda w: w)
        out = tuple(norm(x) for x in v)
        if self.distinct_only and len(set(out)) != self.n:
            raise DescriptorError(f"components must be pairwise distinct: {v!r}")
        return out

    def descriptor(self):
        return {
            "kind": "diagonal_power",
            "base": self.base.descriptor(),
            "n": self.n,
            "distinct_only": self.distinct_only,
        }


def make_action(desc: dict) -> GroupAction:
    """Build an action from a descriptor (the CLI config schema)."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise DescriptorError(f"action descriptor must be a dict with 'kind': {desc!r}")
    kind = desc["kind"]
    if kind == "cyclic":
        return cyclic_translation(desc.get("n"))
    if kind == "integer":
        return IntegerTranslationAction()
    if kind == "translation":
        return SelfTranslationAction(make_carrier(desc.get("group")))
    if kind == "affine":
        return AffineFpAction(desc.get("p"))
    if kind == "coset":
        return CosetSpaceAction(
            make_carrier(desc.get("group")),
            [parse_canon(g) if isinstance(g, str) else g for g in desc.get("subgroup_gens", [])],
        )
    if kind == "perm_natural":
        return PermutationNaturalAction(desc.get("n"))
    if kind == "projective_sl2":
        return ProjectiveSL2Action(desc.get("p"))
    if kind == "linear_q":
        return LinearActionQ(desc.get("n"))
    if kind == "linear_fp":
        return LinearFpAction(desc.get("n"), desc.get("p"))
    if kind == "diagonal_power":
        return DiagonalPowerAction(
            make_action(desc.get("base")), desc.get("n"), desc.get("distinct_only", True)
        )
    raise DescriptorError(f"unknown action kind {kind!r}")


# ---------------------------------------------------------------------------
# closures and generators


def _closure(mul, inv, identity, gens: CanonSet, cap: int) -> CanonSet:
    els = {identity}
    gen_sym = set(gens)
    gen_sym.update(inv(g) for g in gens)
    els.update(gen_sym)
    if len(els) > cap:
        raise ClosureCapError(f"closure exceeded cap {cap}")
    frontier = list(els)
    while frontier:
        fresh = []
        for a in frontier:
            for g in gen_sym:
                c = mul(a, g)
                if c not in els:
                    els.add(c)
                    if len(els) > cap:
                        raise ClosureCapError(f"closure exceeded cap {cap}")
                    fresh.append(c)
        frontier = fresh
    return CanonSet(els)


def generated_subgroup(action: GroupAction, gens: ElementSet, cap: int) -> ElementSet:
    """Closure of the generators under product and inverse, or a loud
    failure when the closure would exceed ``cap``."""
    if cap < 1:
        raise HypothesisError("cap must be positive")
    model = action.index_model()
    if model is not None:
        closed, ok = model.closure(gens, cap)
        if not ok:
            raise ClosureCapError(f"closure exceeded cap {cap}")
        return closed
    return _closure(action.mul, action.inv, action.identity, gens, cap)


def _normalize_target(action: GroupAction, values, target: str) -> CanonSet:
    if target == "elements":
        norm = getattr(action, "normalize_element", lambda v: v)
    elif target == "points":
        norm = getattr(action, "normalize_point", lambda v: v)
    else:
        raise DescriptorError(f"target must be 'elements' or 'points': {target!r}")
    return CanonSet(norm(v) for v in values)


def generate_set(action: GroupAction, spec: dict, target: str = "points") -> CanonSet:
    """Deterministic structured-set generator (experiment inputs).

    Kinds: explicit, interval, arithmetic_progression,
    geometric_progression, subgroup_coset, random, union, perturb.
    Randomized kinds require an integer seed.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DescriptorError(f"set spec must be a dict with 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "explicit":
        values = [parse_canon(v) if isinstance(v, str) else v for v in spec["values"]]
        return _normalize_target(action, values, target)
    if kind == "interval":
        start, length = spec["start"], spec["length"]
        _check_length(length)
        return _normalize_target(action, range(start, start + length), target)
    if kind == "arithmetic_progression":
        start, step, length = spec["start"], spec["step"], spec["length"]
        _check_length(length)
        return _normalize_target(action, (start + i * step for i in range(length)), target)
    if kind == "geometric_progression":
        start, ratio, length = spec["start"], spec["ratio"], spec["length"]
        _check_length(length)
        vals = []
        v = start
        for _ in range(length):
            vals.append(v)
            v = v * ratio
        return _normalize_target(action, vals, target)
    if kind == "subgroup_coset":
        gens = [parse_canon(g) if isinstance(g, str) else g for g in spec["gens"]]
        H = generated_subgroup(action, _normalize_target(action, gens, "elements"), cap=spec.get("cap", 100000))
        rep = spec.get("rep")
        if rep is None:
            return H
        rep = action.normalize_element(parse_canon(rep) if isinstance(rep, str) else rep)
        return CanonSet(action.mul(rep, h) for h in H)
    if kind == "random":
        universe = action.element_enum() if target == "elements" else action.point_enum()
        if universe is None:
            raise CapabilityError(f"random {target} need an enumerable universe")
        size, seed = spec["size"], spec["seed"]
        if size > len(universe):
            raise DescriptorError(f"requested {size} of {len(universe)} available")
        rng = random.Random(seed)
        return CanonSet(rng.sample(universe.members, size))
    if kind == "union":
        parts = [generate_set(action, sub, target) for sub in spec["of"]]
        return CanonSet(v for part in parts for v in part)
    if kind == "perturb":
        base = generate_set(action, spec["base"], target)
        return perturb_set(action, base, spec.get("remove", 0), spec.get("add", 0), spec["seed"], target)
    raise DescriptorError(f"unknown set kind {kind!r}")


def _check_length(length):
    if not isinstance(length, int) or length < 0:
        raise DescriptorError(f"length must be a nonnegative integer: {length!r}")


def perturb_set(action: GroupAction, base: CanonSet, remove: int, add: int, seed: int, target: str) -> CanonSet:
    """Remove ``remove`` random members and add ``add`` random non-members."""
    rng = random.Random(seed)
    kept = set(base.members)
    if remove:
        if remove > len(kept):
            raise DescriptorError(f"cannot remove {remove} from a set of {len(kept)}")
        for v in rng.sample(base.members, remove):
            kept.discard(v)
    if add:
        universe = action.element_enum() if target == "elements" else action.point_enum()
        if universe is None:
            raise CapabilityError("perturbation needs an enumerable universe to add from")
        outside = [v for v in universe if v not in base]
        if add > len(outside):
            raise DescriptorError(f"cannot add {add} fresh values, only {len(outside)} exist")
        kept.update(rng.sample(outside, add))
    return CanonSet(kept)
