"""Independent re-verification of report certificates.

Verification trusts nothing in a stored result beyond the sets
themselves: named semantic checks re-derive memberships, disjointness,
injectivity, and every inequality from the scenario inputs, and a full
recomputation pass then requires the stored payload to match the
deterministic re-run field for field.  Any single-field mutation of a
certificate is therefore rejected.
"""

from __future__ import annotations

from fractions import Fraction

from .actions import make_action
from .canon import parse_canon, parse_fraction
from .core import (
    ElementSet,
    GroupAction,
    PointSet,
    VerificationError,
    image_set,
    inverse_set,
    product_set,
)
from .report import REPORT_SCHEMA, REGISTRY, build_sets
from .stats import overlap


def _elts(action: GroupAction, values) -> ElementSet:
    return ElementSet(action.normalize_element(parse_canon(v)) for v in values)


def _pts(action: GroupAction, values) -> PointSet:
    return PointSet(action.normalize_point(parse_canon(v)) for v in values)


def _check_inequalities(claim: str, payload: dict) -> None:
    for iq in payload.get("inequalities", []):
        lhs, rhs = parse_fraction(iq["lhs"]), parse_fraction(iq["rhs"])
        if not iq.get("holds", False) or lhs > rhs:
            raise VerificationError(claim, f"inequality {iq['name']} fails: {iq['lhs']} > {iq['rhs']}")


def _verify_cover(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    kind = payload["kind"]
    Z = _pts(action, payload["Z"])
    covered = _pts(action, payload["Y_covered"])
    B = sets[params["A" if kind == "image-cover" else "B"]]
    diff = product_set(action, inverse_set(action, B), B)
    pulled = image_set(action, diff, Z)
    for y in covered:
        if y not in pulled:
            raise VerificationError(f"{kind}:coverage", f"point {y!r} not covered by pulled-back images of Z")
    if kind == "image-cover":
        total = sum(len(image_set(action, B, PointSet([z]))) for z in Z)
        whole = len(image_set(action, B, Z))
    else:
        Y = sets[params["Y"]]
        total = sum(
            len(PointSet(x for x in (action.act(b, z) for b in B) if x in Y)) for z in Z
        )
        whole = len(PointSet(x for z in Z for x in (action.act(b, z) for b in B) if x in Y))
    if total != whole or total != payload["disjoint_total"]:
        raise VerificationError(f"{kind}:disjointness", "greedy images are not disjoint as stored")
    _check_inequalities(f"{kind}:bounds", payload)


def _verify_triangle(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    A1, A2, Y = sets[params["A1"]], sets[params["A2"]], sets[params["Y"]]
    image2 = image_set(action, A2, Y)
    mapping = payload["mapping"]
    if len(mapping) != len(A1) * len(image2):
        raise VerificationError("image-triangle:domain", "mapping does not cover the domain")
    codomain_left = product_set(action, A2, inverse_set(action, A1))
    image1 = image_set(action, A1, Y)
    seen = set()
    for (astr, xstr), (ustr, vstr) in mapping:
        u = action.normalize_element(parse_canon(ustr))
        v = action.normalize_point(parse_canon(vstr))
        if u not in codomain_left or v not in image1:
            raise VerificationError("image-triangle:codomain", f"image ({ustr},{vstr}) leaves the codomain")
        if (u, v) in seen:
            raise VerificationError("image-triangle:injectivity", f"image ({ustr},{vstr}) repeats")
        seen.add((u, v))
    if payload["lhs"] > payload["rhs"]:
        raise VerificationError("image-triangle:inequality", "size inequality fails")


def _verify_symmetry_set(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    Y = sets[params["Y"]]
    alpha = parse_fraction(payload["alpha"])
    thr = alpha * len(Y)
    members = _elts(action, payload["members"])
    for g in members:
        ov = overlap(action, g, Y)
        if ov < thr:
            raise VerificationError("symmetry-set:threshold", f"member {g!r} has overlap {ov} below alpha|Y|")
        key = next((k for k in payload["overlaps"] if _same(action, k, g)), None)
        if key is None or payload["overlaps"][key] != ov:
            raise VerificationError("symmetry-set:overlap", f"stored overlap for {g!r} is wrong")
    if inverse_set(action, members) != members or action.identity not in members:
        raise VerificationError("symmetry-set:closure", "members not inverse-closed or missing identity")


def _same(action, text, g) -> bool:
    try:
        return action.normalize_element(parse_canon(text)) == g
    except Exception:
        return False


def _verify_energy(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    if not (payload["value"] == payload["by_pairs"] == payload["by_repr"] == payload["by_fibers"]):
        raise VerificationError("action-energy:agreement", "the three evaluations disagree")


def _verify_closure(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    base = _elts(action, payload["base"])
    members = base.members
    Y = sets[params["Y"]]
    pairs = [(members[i], members[j]) for i, j in payload["pair_indices"]]
    pair_set = set(pairs)
    for s, s2 in pairs:
        if (s2, s) not in pair_set:
            raise VerificationError("closure:symmetry", "relation is not swap-symmetric")
    mul, inv = action.mul, action.inv
    product = ElementSet(mul(inv(s), s2) for s, s2 in pairs)
    if product != _elts(action, payload["product"]):
        raise VerificationError("closure:product", "stored product set does not match the relation")
    thr = parse_fraction(payload["target_level"]) * len(Y)
    for d in product:
        if overlap(action, d, Y) < thr:
            raise VerificationError("closure:level", f"product element {d!r} misses the target level")
    if Fraction(len(pairs)) < parse_fraction(payload["mass_floor"]):
        raise VerificationError("closure:mass", "relation below its mass floor")
    if "min_multiplicity" in payload:
        r: dict = {}
        for s, s2 in pairs:
            x = mul(inv(s), s2)
            r[x] = r.get(x, 0) + 1
        if min(r.values()) != payload["min_multiplicity"]:
            raise VerificationError("closure:uniformity", "stored minimum multiplicity is wrong")
        if min(r.values()) * 2 * len(product) <= len(pairs):
            raise VerificationError("closure:uniformity", "multiplicity floor fails")
        if Fraction(len(pairs)) < parse_fraction(payload["mass_floor_bitlen"]):
            raise VerificationError("closure:mass", "relation below the dyadic mass floor")


def _verify_bsg(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    Y = sets[params["Y"]]
    alpha = parse_fraction(payload["alpha"])
    alphas = [alpha]
    for _ in range(payload["J"]):
        alphas.append(alphas[-1] ** 2 / 2)
    prev = None
    for lv in payload["levels"]:
        if parse_fraction(lv["alpha"]) != alphas[lv["index"]]:
            raise VerificationError("bsg:alpha-recursion", f"level {lv['index']} alpha mismatch")
        _verify_closure(action, sets, params, lv["closure"])
        if prev is not None and lv["size"] != prev:
            raise VerificationError("bsg:level-chain", "level sizes do not chain")
        prev = lv["next_size"]
    telescoped = Fraction(1)
    for lv in payload["levels"]:
        telescoped *= Fraction(lv["next_size"], lv["size"])
    first, last = payload["levels"][0], payload["levels"][-1]
    if telescoped != Fraction(last["next_size"], first["size"]):
        raise VerificationError("bsg:telescoping", "telescoping identity fails")
    ratios = [Fraction(lv["next_size"], lv["size"]) for lv in payload["levels"]]
    j_star = payload["j_star"]
    if ratios[j_star] != min(ratios) or any(r <= ratios[j_star] for r in ratios[:j_star]):
        raise VerificationError("bsg:pigeonhole", "chosen level is not the first growth minimum")
    if min(ratios) ** payload["J"] > parse_fraction(payload["sym_ratio_power"]):
        raise VerificationError("bsg:growth-parameter", "pigeonholed growth beats the symmetry ratio")
    A_star = _elts(action, payload["A_star"])
    g_star = action.normalize_element(parse_canon(payload["g_star"]))
    thr = alphas[-1] * len(Y)
    for s in A_star:
        pulled = action.mul(action.inv(g_star), s)
        if overlap(action, pulled, Y) < thr:
            raise VerificationError("bsg:extracted-level", f"pulled element {s!r} misses the final level")
    trip = payload["tripling"]
    S = _elts(action, trip["S"])
    cube = product_set(action, product_set(action, S, S), S)
    if len(cube) != trip["cube_size"] or len(S) != trip["set_size"]:
        raise VerificationError("bsg:tripling", "stored tripling sizes are wrong")
    cover_params = dict(params)
    cover_params["B"] = "__bsg_cover_base"
    anchor = action.inv(g_star)
    sets = dict(sets)
    sets["__bsg_cover_base"] = ElementSet(
        action.mul(anchor, b) for b in A_star.intersection(_struct_set(action, sets, params, payload))
    )
    _verify_cover(action, sets, cover_params, payload["part3_cover"])


def _struct_set(action, sets, params, payload):
    if "S" in params:
        return sets[params["S"]]
    return _elts(action, payload["A_star"])


def _verify_sym_bound(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    if payload["measured"] is not None:
        bound = parse_fraction(payload["bound"])
        if payload["measured"] > bound:
            raise VerificationError("symmetry-bound", f"measured {payload['measured']} exceeds the bound")


def _verify_growth(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    from .bounds import sl2_growth_check

    again = sl2_growth_check(payload["p"], sets[params["A"]]).payload()
    if again != payload:
        raise VerificationError("sl2-growth:recompute", "stored trichotomy does not match recomputation")


def _verify_exact_image(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    A, Y = sets[params["A"]], sets[params["Y"]]
    if len(image_set(action, A, Y)) != len(Y) or payload["image_size"] != len(Y):
        raise VerificationError("exact-image:size", "image is larger than Y")
    diff = product_set(action, inverse_set(action, A), A)
    if image_set(action, diff, Y) != Y:
        raise VerificationError("exact-image:stabilization", "difference set moves Y")
    if sum(payload["orbit_sizes"]) != len(Y) or payload["orbit_count"] != len(payload["orbit_sizes"]):
        raise VerificationError("exact-image:orbits", "orbit sizes do not partition Y")


def _verify_quotient_growth(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    A, B = sets[params["A"]], sets[params["B"]]
    prod = product_set(action, A, B)
    if payload["product_size"] != len(prod):
        raise VerificationError("quotient-growth:product", "stored product size is wrong")
    if payload["coset_count"] * payload["meet_size"] > len(prod):
        raise VerificationError("quotient-growth:inequality", "growth inequality fails")


def _verify_orbit_witness(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    A = sets[params["A"]]
    x = action.normalize_point(parse_canon(params["x"]))
    anchor = action.normalize_element(parse_canon(payload["anchor"]))
    ai = action.inv(anchor)
    meet = sum(1 for b in A if action.act(action.mul(ai, b), x) == x)
    orbit = len(image_set(action, A, PointSet([x])))
    if meet != payload["stab_overlap"] or orbit != payload["orbit_size"]:
        raise VerificationError("orbit-stabilizer-witness:recount", "stored counts are wrong")
    if meet * orbit < len(A):
        raise VerificationError("orbit-stabilizer-witness:bound", "product bound fails")


def _verify_popular(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    lam = parse_fraction(payload["lambda"])
    if Fraction(payload["mass"]) < (1 - lam) * payload["total"]:
        raise VerificationError("popular-subset:mass", "mass guarantee fails")


def _verify_pairs(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    delta = parse_fraction(payload["delta"])
    if Fraction(len(payload["pairs"])) < delta**2 * payload["family_size"] ** 2 / 2:
        raise VerificationError("intersection-pairs:count", "pair count below the guarantee")


def _verify_tripling(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    A = sets[params["A"]]
    anchor = action.normalize_element(parse_canon(payload["anchor"]))
    S = _elts(action, payload["S"])
    for s in S:
        if action.mul(anchor, s) not in A:
            raise VerificationError("small-tripling-extract:anchoring", f"{s!r} leaves the anchor translate")
    cube = product_set(action, product_set(action, S, S), S)
    if len(cube) != payload["cube_size"] or len(S) != payload["set_size"]:
        raise VerificationError("small-tripling-extract:sizes", "stored sizes are wrong")


def _verify_approx_group(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    closure = _elts(action, payload["closure"])
    cover = _elts(action, payload["cover"])
    if action.identity not in closure or inverse_set(action, closure) != closure:
        raise VerificationError("approximate-group-closure:symmetry", "closure is not symmetric")
    closed = closure.raw()
    inv = action.inv
    for w in product_set(action, closure, closure):
        if not any(action.mul(inv(x), w) in closed for x in cover):
            raise VerificationError("approximate-group-closure:cover", f"product {w!r} is uncovered")


def _verify_subset_ratio(action: GroupAction, sets: dict, params: dict, payload: dict) -> None:
    Y = sets[params["Y"]]
    B = _elts(action, payload["B"])
    ratio = Fraction(len(image_set(action, B, Y)), len(B))
    if ratio != parse_fraction(payload["ratio"]):
        raise VerificationError("subset-image-ratio:ratio", "stored ratio is wrong")
    BY = image_set(action, B, Y)
    for row in payload["rows"]:
        C = _elts(action, row["C"])
        lhs = len(image_set(action, C, BY))
        rhs = Fraction(len(BY) * len(image_set(action, C, Y)), len(B))
        if lhs != row["lhs"] or rhs != parse_fraction(row["rhs"]) or row["holds"] != (lhs <= rhs):
            raise VerificationError("subset-image-ratio:row", "stored verification row is wrong")


SEMANTIC = {
    "image-cover": _verify_cover,
    "symmetry-cover": _verify_cover,
    "image-triangle": _verify_triangle,
    "symmetry-set": _verify_symmetry_set,
    "action-energy": _verify_energy,
    "symmetry-closure": _verify_closure,
    "uniform-symmetry-closure": _verify_closure,
    "bsg-decomposition": _verify_bsg,
    "symmetry-bound": _verify_sym_bound,
    "sl2-growth-trichotomy": _verify_growth,
    "exact-image": _verify_exact_image,
    "quotient-growth": _verify_quotient_growth,
    "orbit-stabilizer-witness": _verify_orbit_witness,
    "popular-subset": _verify_popular,
    "intersection-pairs": _verify_pairs,
    "small-tripling-extract": _verify_tripling,
    "approximate-group-closure": _verify_approx_group,
    "subset-image-ratio": _verify_subset_ratio,
}


def verify_report(report: dict, integrity: bool = True, reference: dict = None) -> list[str]:
    """Re-verify every certificate; returns the list of named checks run.

    Semantic checks re-derive memberships, disjointness, injectivity and
    inequalities from the scenario inputs.  With ``integrity`` the whole
    payload must additionally match a deterministic recomputation
    (``reference`` may supply one computed earlier for the same
    scenario).  Raises VerificationError naming the claim and offending
    element on the first failure.
    """
    if report.get("schema") != REPORT_SCHEMA:
        raise VerificationError("report:schema", f"unexpected schema {report.get('schema')!r}")
    doc = report["scenario"]
    action = make_action(doc["action"])
    sets = build_sets(action, doc, doc.get("seed_override"))
    stored_sets = report.get("sets", {})
    from .canon import canon_str

    for name, s in sets.items():
        if stored_sets.get(name) != [canon_str(v) for v in s]:
            raise VerificationError("report:sets", f"stored set {name!r} does not match its generator")
    checks = []
    for i, entry in enumerate(report.get("results", [])):
        op, params, payload = entry["op"], entry["params"], entry["result"]
        kind = payload.get("kind", "?")
        fn = SEMANTIC.get(kind)
        try:
            if fn is not None:
                fn(action, sets, params, payload)
                checks.append(f"{i}:{kind}:semantic")
            _check_inequalities(f"{kind}:stored-inequalities", payload)
        except VerificationError:
            raise
        except Exception as exc:
            # Tampering can produce structurally broken payloads; those are
            # rejections, not crashes.
            raise VerificationError(f"{kind}:malformed", f"{type(exc).__name__}: {exc}") from exc
        if integrity:
            if reference is not None:
                expected = reference["results"][i]
                if expected != entry:
                    path = _first_diff(expected, entry)
                    raise VerificationError(f"{kind}:integrity", f"stored field {path} differs from recomputation")
            else:
                if op not in REGISTRY:
                    raise VerificationError(f"{kind}:integrity", f"unknown operation {op!r}")
                try:
                    recomputed = REGISTRY[op].run(action, sets, params)
                except Exception as exc:
                    raise VerificationError(
                        f"{kind}:integrity", f"recomputation with the stored parameters failed: {exc}"
                    ) from exc
                if recomputed != payload:
                    path = _first_diff(recomputed, payload)
                    raise VerificationError(f"{kind}:integrity", f"stored field {path} differs from recomputation")
            checks.append(f"{i}:{kind}:integrity")
    return checks


def _first_diff(a, b, path="result"):
    if type(a) is not type(b):
        return path
    if isinstance(a, dict):
        for k in sorted(set(a) | set(b), key=str):
            if k not in a or k not in b:
                return f"{path}.{k}"
            if a[k] != b[k]:
                return _first_diff(a[k], b[k], f"{path}.{k}")
        return path
    if isinstance(a, list):
        if len(a) != len(b):
            return f"{path}[len]"
        for i, (x, y) in enumerate(zip(a, b)):
            if x != y:
                return _first_diff(x, y, f"{path}[{i}]")
        return path
    return path
