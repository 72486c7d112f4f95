"""Scenario schema, operation registry, and report serialization.

A scenario names an action, a collection of generated sets, and a list
of operations.  Reports echo the scenario and carry one certificate
payload per operation; payloads are JSON with canonical-encoding
strings for elements/points and "num/den" strings for rationals, so a
re-run reproduces the report byte for byte (timings live outside the
deterministic part).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from . import bounds, bsg, covering, stats
from .actions import generate_set, generated_subgroup, make_action
from .canon import canon_str, parse_canon, parse_fraction
from .core import (
    CanonSet,
    DescriptorError,
    ElementSet,
    GroupAction,
    PointSet,
    Relation,
    count_map,
    exact_image_case,
    image_set,
    inverse_set,
    partial_image_set,
    product_set,
    symmetrized_power,
)

SCENARIO_SCHEMA = "actcomb-scenario/1"
REPORT_SCHEMA = "actcomb-report/1"


def _setref(sets: dict, params: dict, key: str) -> CanonSet:
    name = params.get(key)
    if not isinstance(name, str) or name not in sets:
        raise DescriptorError(f"operation parameter {key!r} must name a defined set, got {name!r}")
    return sets[name]


def _frac(params: dict, key: str, default=None) -> Fraction:
    if key not in params:
        if default is None:
            raise DescriptorError(f"missing rational parameter {key!r}")
        return Fraction(default)
    return parse_fraction(params[key])


def _int(params: dict, key: str, default=None) -> int:
    v = params.get(key, default)
    if not isinstance(v, int):
        raise DescriptorError(f"parameter {key!r} must be an integer, got {v!r}")
    return v


def _relation(action: GroupAction, sets: dict, params: dict, A: CanonSet, Y: CanonSet) -> Relation:
    spec = params.get("E", "full")
    if spec == "full":
        return Relation(((a, y) for a in A for y in Y), sides=("element", "point"))
    if isinstance(spec, list):
        pairs = []
        for entry in spec:
            g = action.normalize_element(parse_canon(entry[0]))
            y = action.normalize_point(parse_canon(entry[1]))
            pairs.append((g, y))
        return Relation(pairs, sides=("element", "point"))
    raise DescriptorError(f"relation parameter must be 'full' or a pair list, got {spec!r}")


def _simple(kind: str, **fields) -> dict:
    out = {"kind": kind}
    out.update(fields)
    return out


def _set_payload(kind: str, s: CanonSet) -> dict:
    return _simple(kind, members=[canon_str(v) for v in s])


@dataclass(frozen=True)
class OpDef:
    run: Callable
    explain: str


def _run_image_set(action, sets, params):
    out = image_set(action, _setref(sets, params, "A"), _setref(sets, params, "Y"))
    return _set_payload("point-set", out)


def _run_partial_image_set(action, sets, params):
    A, Y = _setref(sets, params, "A"), _setref(sets, params, "Y")
    E = _relation(action, sets, params, A, Y)
    return _set_payload("point-set", partial_image_set(action, E))


def _run_product_set(action, sets, params):
    out = product_set(action, _setref(sets, params, "A"), _setref(sets, params, "B"))
    return _set_payload("element-set", out)


def _run_symmetrized_power(action, sets, params):
    out = symmetrized_power(action, _setref(sets, params, "A"), _int(params, "k"))
    return _set_payload("element-set", out)


def _run_generated_subgroup(action, sets, params):
    out = generated_subgroup(action, _setref(sets, params, "gens"), cap=_int(params, "cap", 100000))
    return _set_payload("element-set", out)


def _run_count_map(action, sets, params):
    kind = params.get("count")
    kw = {}
    if kind == "rE":
        A, Y = _setref(sets, params, "A"), _setref(sets, params, "Y")
        kw["E"] = _relation(action, sets, params, A, Y)
    elif kind == "rAY":
        kw["A"], kw["Y"] = _setref(sets, params, "A"), _setref(sets, params, "Y")
    elif kind == "rAinvA":
        kw["A"] = _setref(sets, params, "A")
    else:
        raise DescriptorError(f"count must be rE, rAY or rAinvA, got {kind!r}")
    cm = count_map(action, kind, **kw)
    return _simple("count-map", counts={canon_str(k): v for k, v in cm.items()}, total=cm.total())


def _run_symmetry_set(action, sets, params):
    cands = sets[params["candidates"]] if "candidates" in params else None
    return stats.symmetry_set(action, _setref(sets, params, "Y"), _frac(params, "alpha"), cands).payload()


def _run_action_energy(action, sets, params):
    return stats.action_energy(action, _setref(sets, params, "A"), _setref(sets, params, "Y")).payload()


def _run_energy_bounds(action, sets, params):
    return stats.energy_bounds(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_orbit_stabilizer(action, sets, params):
    x = action.normalize_point(parse_canon(params["x"]))
    return stats.orbit_stabilizer_witness(action, _setref(sets, params, "A"), x).payload()


def _run_incidence_identity(action, sets, params):
    A, Y = _setref(sets, params, "A"), _setref(sets, params, "Y")
    lhs, rhs = stats.incidence_identity_check(action, A, Y)
    if lhs != rhs:
        raise AssertionError("transporter identity failed; this should be impossible")
    return _simple("incidence-identity", overlap_sum=lhs, transporter_sum=rhs)


def _run_exact_image(action, sets, params):
    return exact_image_case(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), cap=_int(params, "cap", 100000)
    ).payload()


def _run_popular_subset(action, sets, params):
    cm = count_map(action, "rAY", A=_setref(sets, params, "A"), Y=_setref(sets, params, "Y"))
    return stats.popular_subset(cm, _frac(params, "lambda")).payload()


def _run_cs_pairs(action, sets, params):
    A, Y = _setref(sets, params, "A"), _setref(sets, params, "Y")
    family = {s: PointSet(x for x in (action.act(s, y) for y in Y) if x in Y) for s in A}
    return stats.cs_intersection_pairs(family, Y, _frac(params, "delta")).payload()


def _run_ruzsa_triangle(action, sets, params):
    return covering.ruzsa_triangle(
        action, _setref(sets, params, "A1"), _setref(sets, params, "A2"), _setref(sets, params, "Y")
    ).payload()


def _run_growth_in_subgroup(action, sets, params):
    return covering.growth_in_subgroup(
        action, _setref(sets, params, "H"), _setref(sets, params, "A"), _setref(sets, params, "B")
    ).payload()


def _run_cover_by_image(action, sets, params):
    return covering.cover_by_image(action, _setref(sets, params, "A"), _setref(sets, params, "Y")).payload()


def _run_cover_symmetry(action, sets, params):
    return covering.cover_symmetry(
        action, _setref(sets, params, "B"), _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_petridis(action, sets, params):
    family = [sets[name] for name in params.get("C_family", [])]
    return covering.petridis_select(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), family
    ).payload()


def _run_energy_to_partial_image(action, sets, params):
    return stats.energy_to_partial_image(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_energy_to_symmetry(action, sets, params):
    return stats.energy_to_symmetry(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_partial_image_to_symmetry(action, sets, params):
    A, Y = _setref(sets, params, "A"), _setref(sets, params, "Y")
    E = _relation(action, sets, params, A, Y)
    return stats.partial_image_to_symmetry(
        action, A, Y, E, _frac(params, "K"), _frac(params, "rho")
    ).payload()


def _run_symmetry_to_partial_image(action, sets, params):
    return stats.symmetry_to_partial_image(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_approximate_closure(action, sets, params):
    return bsg.approximate_closure(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_uniform_closure(action, sets, params):
    return bsg.uniform_approximate_closure(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_tripling_extract(action, sets, params):
    return bsg.symmetry_tripling_extract(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha"), _frac(params, "K")
    ).payload()


def _run_approx_group_close(action, sets, params):
    return bsg.approx_group_close(action, _setref(sets, params, "A")).payload()


def _run_bsg(action, sets, params):
    S = sets[params["S"]] if "S" in params else None
    mode = params.get("sym_mode", "exact")
    bound = parse_fraction(params["sym_bound"]) if "sym_bound" in params else None
    return bsg.bsg_pipeline(
        action,
        _setref(sets, params, "A"),
        _setref(sets, params, "Y"),
        _frac(params, "alpha"),
        _int(params, "J"),
        sym_mode=mode,
        sym_bound=bound,
        S=S,
    ).payload()


def _run_bsg_free(action, sets, params):
    S = sets[params["S"]] if "S" in params else None
    return bsg.bsg_free(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha"), _int(params, "J"), S=S
    ).payload()


def _run_bsg_almost_free(action, sets, params):
    S = sets[params["S"]] if "S" in params else None
    return bsg.bsg_almost_free(
        action,
        _setref(sets, params, "A"),
        _setref(sets, params, "Y"),
        _frac(params, "alpha"),
        _int(params, "J"),
        _int(params, "n"),
        S=S,
    ).payload()


def _run_sym_bound_free(action, sets, params):
    return bounds.sym_bound_free(
        action, _setref(sets, params, "A"), _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_sym_bound_almost_free(action, sets, params):
    return bounds.sym_bound_almost_free(
        action, _setref(sets, params, "Y"), _frac(params, "alpha"), _int(params, "n")
    ).payload()


def _run_sym_bound_linear(action, sets, params):
    return bounds.sym_bound_linear(
        action, _setref(sets, params, "Y"), _frac(params, "alpha"), _frac(params, "rho")
    ).payload()


def _run_affine_incidence(action, sets, params):
    return bounds.affine_incidence_sym_bound(
        action, _setref(sets, params, "Y"), _frac(params, "alpha")
    ).payload()


def _run_sl2_incidence(action, sets, params):
    return bounds.sl2_incidence_scan(
        _int(params, "p"),
        _setref(sets, params, "A"),
        _setref(sets, params, "X"),
        _setref(sets, params, "Y"),
        _int(params, "threshold"),
    ).payload()


def _run_sl2_growth(action, sets, params):
    return bounds.sl2_growth_check(_int(params, "p"), _setref(sets, params, "A")).payload()


def _run_concentration(action, sets, params):
    return bounds.subgroup_concentration_scan(
        action, _setref(sets, params, "A"), _int(params, "subgroup_cap", 10000)
    ).payload()


REGISTRY: dict[str, OpDef] = {
    "image_set": OpDef(_run_image_set, "All points g(y) with g in A and y in Y, deduplicated."),
    "partial_image_set": OpDef(_run_partial_image_set, "Image points over the pairs of a relation E inside A x Y."),
    "product_set": OpDef(_run_product_set, "The product set AB inside the group."),
    "symmetrized_power": OpDef(_run_symmetrized_power, "The k-fold product of A together with its inverses and the identity."),
    "generated_subgroup": OpDef(_run_generated_subgroup, "Closure of the generators under product and inverse, with a size cap."),
    "count_map": OpDef(_run_count_map, "Exact multiplicity counts: image fibers or difference representations."),
    "symmetry_set": OpDef(_run_symmetry_set, "All transformations moving at least an alpha fraction of Y back into Y."),
    "action_energy": OpDef(_run_action_energy, "The number of quadruples a1(y1) = a2(y2), computed three independent ways."),
    "energy_bounds": OpDef(_run_energy_bounds, "Certified lower and upper bounds around the measured action energy."),
    "orbit_stabilizer_witness": OpDef(_run_orbit_stabilizer, "An anchor a with |a^{-1}A ∩ stab(x)| |A(x)| >= |A|."),
    "incidence_identity": OpDef(_run_incidence_identity, "Overlap sums equal transporter-meet sums over Y x Y (exact identity)."),
    "exact_image_case": OpDef(_run_exact_image, "When |A(Y)| = |Y|: A^{-1}A stabilizes Y, which splits into orbits."),
    "popular_subset": OpDef(_run_popular_subset, "Keys above lambda times the mean carry at least a (1-lambda) share of the mass."),
    "cs_intersection_pairs": OpDef(_run_cs_pairs, "Pairs of overlap sets with large intersection, at least delta^2|S|^2/2 of them."),
    "ruzsa_triangle": OpDef(_run_ruzsa_triangle, "Explicit injection proving |A1||A2(Y)| <= |A2 A1^{-1}||A1(Y)|."),
    "growth_in_subgroup": OpDef(_run_growth_in_subgroup, "Quotient growth: |pi(A)| |B ∩ H| <= |AB|."),
    "cover_by_image": OpDef(_run_cover_by_image, "Greedy disjoint-image covering of Y by pulled-back images of Z."),
    "cover_symmetry": OpDef(_run_cover_symmetry, "Covering of the popular part of Y by images of a rich-transformation set."),
    "petridis_select": OpDef(_run_petridis, "Subset of A minimizing |B(Y)|/|B| with the product-image inequality table."),
    "energy_to_partial_image": OpDef(_run_energy_to_partial_image, "Large energy yields a dense relation with a small partial image."),
    "energy_to_symmetry": OpDef(_run_energy_to_symmetry, "Large energy puts a translate of much of A inside a symmetry set."),
    "partial_image_to_symmetry": OpDef(_run_partial_image_to_symmetry, "A dense relation with small image yields symmetry-set structure."),
    "symmetry_to_partial_image": OpDef(_run_symmetry_to_partial_image, "Symmetry membership yields a dense relation with image inside Y."),
    "approximate_closure": OpDef(_run_approximate_closure, "Heavy-overlap pair products stay in the squared-level symmetry set."),
    "uniform_approximate_closure": OpDef(_run_uniform_closure, "Approximate closure with a dyadically pinned multiplicity floor."),
    "symmetry_tripling_extract": OpDef(_run_tripling_extract, "Extract an anchored small-tripling subset from a rich-transformation set."),
    "approx_group_close": OpDef(_run_approx_group_close, "Symmetrized cube with a greedy translate cover of its square."),
    "bsg_pipeline": OpDef(_run_bsg, "Full decomposition: iterate closures, extract small tripling, pull back density, cover."),
    "bsg_free": OpDef(_run_bsg_free, "Decomposition for free actions, using the |Y|/alpha symmetry bound."),
    "bsg_almost_free": OpDef(_run_bsg_almost_free, "Decomposition under a fixed-point bound, using the tuple-power symmetry bound."),
    "sym_bound_free": OpDef(_run_sym_bound_free, "Transporter-pigeonhole symmetry bound |Y| M / alpha."),
    "sym_bound_almost_free": OpDef(_run_sym_bound_almost_free, "Symmetry bound via the free diagonal action on distinct tuples."),
    "sym_bound_linear": OpDef(_run_sym_bound_linear, "Symmetry bound for faithful linear actions without subspace concentration."),
    "affine_incidence_sym_bound": OpDef(_run_affine_incidence, "Rich-line symmetry bound |Y|^2/(alpha - 2/|Y|)^2."),
    "sl2_incidence_scan": OpDef(_run_sl2_incidence, "Curve/fractional-linear incidence counts and rich transformations."),
    "sl2_growth_check": OpDef(_run_sl2_growth, "Growth trichotomy for subsets of SL2(F_p) at tiny p."),
    "subgroup_concentration_scan": OpDef(_run_concentration, "Largest coset intersection over enumerated proper subgroups."),
}


def validate_scenario(doc: dict) -> None:
    if not isinstance(doc, dict):
        raise DescriptorError("scenario must be a JSON object")
    if doc.get("schema") != SCENARIO_SCHEMA:
        raise DescriptorError(f"scenario schema must be {SCENARIO_SCHEMA!r}, got {doc.get('schema')!r}")
    if "action" not in doc:
        raise DescriptorError("scenario needs an 'action' descriptor")
    sets = doc.get("sets", {})
    if not isinstance(sets, dict):
        raise DescriptorError("'sets' must be an object")
    for name, entry in sets.items():
        if not isinstance(entry, dict) or "spec" not in entry:
            raise DescriptorError(f"set {name!r} needs a 'spec'")
        if entry.get("target", "points") not in ("points", "elements"):
            raise DescriptorError(f"set {name!r} target must be 'points' or 'elements'")
        _require_seeds(entry["spec"], name)
    ops = doc.get("operations", [])
    if not isinstance(ops, list):
        raise DescriptorError("'operations' must be a list")
    for i, op in enumerate(ops):
        if not isinstance(op, dict) or "op" not in op:
            raise DescriptorError(f"operation {i} needs an 'op' name")
        if op["op"] not in REGISTRY:
            raise DescriptorError(f"unknown operation {op['op']!r}")


def _require_seeds(spec, name):
    if isinstance(spec, dict):
        if spec.get("kind") in ("random", "perturb") and not isinstance(spec.get("seed"), int):
            raise DescriptorError(f"randomized generator in set {name!r} needs an integer seed")
        for v in spec.values():
            _require_seeds(v, name)
    elif isinstance(spec, list):
        for v in spec:
            _require_seeds(v, name)


def build_sets(action: GroupAction, doc: dict, seed_override: Optional[int] = None) -> dict:
    out: dict = {}
    for name, entry in doc.get("sets", {}).items():
        spec = entry["spec"]
        if seed_override is not None:
            spec = _override_seeds(spec, seed_override)
        out[name] = generate_set(action, spec, entry.get("target", "points"))
    return out


def _override_seeds(spec, seed):
    if isinstance(spec, dict):
        out = {k: _override_seeds(v, seed) for k, v in spec.items()}
        if out.get("kind") in ("random", "perturb"):
            out["seed"] = seed
        return out
    if isinstance(spec, list):
        return [_override_seeds(v, seed) for v in spec]
    return spec


def run_scenario(doc: dict, seed_override: Optional[int] = None) -> dict:
    """Execute a validated scenario and return the report document
    (without timings; the CLI adds those)."""
    validate_scenario(doc)
    action = make_action(doc["action"])
    sets = build_sets(action, doc, seed_override)
    results = []
    for entry in doc.get("operations", []):
        op = entry["op"]
        params = {k: v for k, v in entry.items() if k != "op"}
        payload = REGISTRY[op].run(action, sets, params)
        results.append({"op": op, "params": params, "result": payload})
    echo = dict(doc)
    if seed_override is not None:
        echo["seed_override"] = seed_override
    return {
        "schema": REPORT_SCHEMA,
        "scenario": echo,
        "sets": {name: [canon_str(v) for v in s] for name, s in sets.items()},
        "results": results,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"
