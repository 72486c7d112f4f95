"""Reference kernels (numpy).  Semantics shared with the compiled backend.

All functions take int32 index arrays plus precomputed tables:
``table[i, j]`` is the index of the product of elements i and j, and
``act_tab[i, p]`` is the index of the image of point p under element i.
"""

import numpy as np


def product_indices(table, a_idx, b_idx):
    """Sorted unique indices of {a*b : a in a_idx, b in b_idx}."""
    if len(a_idx) == 0 or len(b_idx) == 0:
        return np.empty(0, dtype=np.int32)
    prods = table[np.ix_(a_idx, b_idx)]
    return np.unique(prods).astype(np.int32)


def closure_indices(table, inv, gen_idx, identity, cap):
    """Closure of the generators under product and inverse.

    Returns (sorted indices, True) or (partial, False) once the closure
    exceeds ``cap``.
    """
    n = table.shape[0]
    seen = np.zeros(n, dtype=bool)
    gens = np.unique(np.concatenate([gen_idx, inv[gen_idx], [identity]])).astype(np.int32)
    seen[gens] = True
    frontier = gens
    count = int(seen.sum())
    while len(frontier):
        prods = np.unique(table[np.ix_(frontier, gens)])
        fresh = prods[~seen[prods]]
        seen[fresh] = True
        count += len(fresh)
        if count > cap:
            return np.flatnonzero(seen).astype(np.int32), False
        frontier = fresh.astype(np.int32)
    return np.flatnonzero(seen).astype(np.int32), True


def overlap_counts(act_tab, cand_idx, y_idx, n_points):
    """For each candidate g: |Y intersect gY|."""
    if len(cand_idx) == 0 or len(y_idx) == 0:
        return np.zeros(len(cand_idx), dtype=np.int64)
    ymask = np.zeros(n_points, dtype=bool)
    ymask[y_idx] = True
    images = act_tab[np.ix_(cand_idx, y_idx)]
    return ymask[images].sum(axis=1).astype(np.int64)


def act_histogram(act_tab, a_idx, y_idx, n_points):
    """Histogram over points of the images a(y), (a, y) in A x Y."""
    if len(a_idx) == 0 or len(y_idx) == 0:
        return np.zeros(n_points, dtype=np.int64)
    images = act_tab[np.ix_(a_idx, y_idx)].ravel()
    return np.bincount(images, minlength=n_points).astype(np.int64)


def pair_histogram(table, inv, a_idx):
    """Histogram over the group of the products a1^{-1} a2, a1, a2 in A."""
    n = table.shape[0]
    if len(a_idx) == 0:
        return np.zeros(n, dtype=np.int64)
    prods = table[np.ix_(inv[a_idx], a_idx)].ravel()
    return np.bincount(prods, minlength=n).astype(np.int64)
