"""Index models: dense integer tables for small enumerable actions.

A model maps the elements (and, when the space is small, the points) of
an action to contiguous indices in canonical order and materializes the
multiplication and action tables the counting kernels run on.  Models
are memoized by action descriptor, so repeated construction of the same
action reuses the tables.
"""

from __future__ import annotations

import json
from typing import Optional

import numpy as np

from . import act_histogram, closure_indices, overlap_counts, pair_histogram, product_indices

# The caps bound every int64 kernel count well below overflow (all
# multiplicities are at most |G|^2 <= 1300^2); anything larger stays on
# the arbitrary-width pure-Python paths.
GROUP_CAP = 1300  # table memory is |G|^2 int32
ACT_CAP = 4_000_000  # |G| * |X| entries

_memo: dict = {}


class IndexModel:
    def __init__(self, action):
        from ..canon import sort_key
        from ..core import CanonSet

        elems = action.element_enum()
        self.elems = list(elems)
        n = len(self.elems)
        self.n = n
        self.eindex = {g: i for i, g in enumerate(self.elems)}
        table = np.empty((n, n), dtype=np.int32)
        mul = action.mul
        eindex = self.eindex
        for i, g in enumerate(self.elems):
            row = table[i]
            for j, h in enumerate(self.elems):
                row[j] = eindex[mul(g, h)]
        self.table = table
        inv = np.empty(n, dtype=np.int32)
        ainv = action.inv
        for i, g in enumerate(self.elems):
            inv[i] = eindex[ainv(g)]
        self.inv = inv
        self.identity = eindex[action.identity]

        self.points: Optional[list] = None
        self.pindex: Optional[dict] = None
        self.act_tab: Optional[np.ndarray] = None
        pts = action.point_enum()
        if pts is not None and n * len(pts) <= ACT_CAP:
            self.points = list(pts)
            self.pindex = {p: i for i, p in enumerate(self.points)}
            m = len(self.points)
            act_tab = np.empty((n, m), dtype=np.int32)
            act = action.act
            pindex = self.pindex
            for i, g in enumerate(self.elems):
                row = act_tab[i]
                for j, p in enumerate(self.points):
                    row[j] = pindex[act(g, p)]
            self.act_tab = act_tab
        self._canonset = CanonSet
        self._sort_key = sort_key

    # --- index conversions ---------------------------------------------

    def e_indices(self, A) -> np.ndarray:
        return np.fromiter((self.eindex[g] for g in A), dtype=np.int32, count=len(A))

    def p_indices(self, Y) -> np.ndarray:
        return np.fromiter((self.pindex[y] for y in Y), dtype=np.int32, count=len(Y))

    def e_set(self, idx):
        return self._canonset(self.elems[i] for i in idx)

    # --- kernel-backed operations ---------------------------------------

    def product_set(self, A, B):
        idx = product_indices(self.table, self.e_indices(A), self.e_indices(B))
        return self.e_set(idx)

    def closure(self, gens, cap):
        idx, ok = closure_indices(self.table, self.inv, self.e_indices(gens), self.identity, int(cap))
        return self.e_set(idx), bool(ok)

    def overlap_counts(self, cands, Y):
        if self.act_tab is None:
            return None
        counts = overlap_counts(self.act_tab, self.e_indices(cands), self.p_indices(Y), len(self.points))
        return [int(c) for c in counts]

    def image_histogram(self, A, Y):
        """CountMap data for r_{A(Y)} as a dict point -> count."""
        if self.act_tab is None:
            return None
        hist = act_histogram(self.act_tab, self.e_indices(A), self.p_indices(Y), len(self.points))
        return {self.points[i]: int(hist[i]) for i in np.flatnonzero(hist)}

    def pair_counts(self, A):
        """Dict g -> |A intersect Ag| over the whole group."""
        hist = pair_histogram(self.table, self.inv, self.e_indices(A))
        return {self.elems[i]: int(hist[i]) for i in np.flatnonzero(hist)}


def build_index_model(action) -> Optional[IndexModel]:
    elems = action.element_enum()
    if elems is None or len(elems) > GROUP_CAP:
        return None
    try:
        key = json.dumps(action.descriptor(), sort_keys=True)
    except NotImplementedError:
        key = None
    if key is not None and key in _memo:
        return _memo[key]
    model = IndexModel(action)
    if key is not None:
        _memo[key] = model
    return model
