# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernels; see _purekern.py for the reference semantics."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def product_indices(cnp.int32_t[:, :] table, cnp.int32_t[:] a_idx, cnp.int32_t[:] b_idx):
    cdef Py_ssize_t na = a_idx.shape[0], nb = b_idx.shape[0], n = table.shape[0]
    cdef Py_ssize_t i, j
    cdef cnp.ndarray hit_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[:] hit = hit_arr
    for i in range(na):
        for j in range(nb):
            hit[table[a_idx[i], b_idx[j]]] = 1
    return np.flatnonzero(hit_arr).astype(np.int32)


def closure_indices(cnp.int32_t[:, :] table, cnp.int32_t[:] inv, cnp.int32_t[:] gen_idx,
                    int identity, long cap):
    cdef Py_ssize_t n = table.shape[0]
    cdef cnp.ndarray seen_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[:] seen = seen_arr
    cdef list gens = []
    cdef Py_ssize_t i, j
    cdef long count = 0
    cdef int g
    for i in range(gen_idx.shape[0]):
        for g in (gen_idx[i], inv[gen_idx[i]]):
            if not seen[g]:
                seen[g] = 1
                gens.append(g)
                count += 1
    if not seen[identity]:
        seen[identity] = 1
        gens.append(identity)
        count += 1
    cdef list frontier = list(gens)
    cdef list fresh
    cdef int a, p
    while frontier:
        fresh = []
        for i in range(len(frontier)):
            a = frontier[i]
            for j in range(len(gens)):
                p = table[a, gens[j]]
                if not seen[p]:
                    seen[p] = 1
                    fresh.append(p)
                    count += 1
                    if count > cap:
                        return np.flatnonzero(seen_arr).astype(np.int32), False
        frontier = fresh
    return np.flatnonzero(seen_arr).astype(np.int32), True


def overlap_counts(cnp.int32_t[:, :] act_tab, cnp.int32_t[:] cand_idx, cnp.int32_t[:] y_idx,
                   int n_points):
    cdef Py_ssize_t nc = cand_idx.shape[0], ny = y_idx.shape[0]
    cdef cnp.ndarray out_arr = np.zeros(nc, dtype=np.int64)
    cdef cnp.int64_t[:] out = out_arr
    cdef cnp.ndarray ymask_arr = np.zeros(n_points, dtype=np.uint8)
    cdef cnp.uint8_t[:] ymask = ymask_arr
    cdef Py_ssize_t i, j
    cdef long c
    for j in range(ny):
        ymask[y_idx[j]] = 1
    for i in range(nc):
        c = 0
        for j in range(ny):
            c += ymask[act_tab[cand_idx[i], y_idx[j]]]
        out[i] = c
    return out_arr


def act_histogram(cnp.int32_t[:, :] act_tab, cnp.int32_t[:] a_idx, cnp.int32_t[:] y_idx,
                  int n_points):
    cdef Py_ssize_t na = a_idx.shape[0], ny = y_idx.shape[0]
    cdef cnp.ndarray out_arr = np.zeros(n_points, dtype=np.int64)
    cdef cnp.int64_t[:] out = out_arr
    cdef Py_ssize_t i, j
    for i in range(na):
        for j in range(ny):
            out[act_tab[a_idx[i], y_idx[j]]] += 1
    return out_arr


def pair_histogram(cnp.int32_t[:, :] table, cnp.int32_t[:] inv, cnp.int32_t[:] a_idx):
    cdef Py_ssize_t na = a_idx.shape[0], n = table.shape[0]
    cdef cnp.ndarray out_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[:] out = out_arr
    cdef Py_ssize_t i, j
    for i in range(na):
        for j in range(na):
            out[table[inv[a_idx[i]], a_idx[j]]] += 1
    return out_arr
