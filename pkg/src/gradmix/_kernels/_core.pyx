# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for regrouping: nearest-centroid assignment and
per-cluster mean distances. Mirrors ``fallback`` exactly; see its docstring
for the shared semantics."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()


def assign_points(double[:, ::1] points, double[:, ::1] centroids):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t k = centroids.shape[0]
    labels_arr = np.empty(n, dtype=np.int64)
    sqdists_arr = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef double[::1] sqdists = sqdists_arr
    cdef Py_ssize_t i, j, c, best_c
    cdef double best, dist, diff
    for i in range(n):
        best = INFINITY
        best_c = 0
        for c in range(k):
            dist = 0.0
            for j in range(d):
                diff = points[i, j] - centroids[c, j]
                dist += diff * diff
            if dist < best:  # strict: ties keep the lowest index
                best = dist
                best_c = c
        labels[i] = best_c
        sqdists[i] = best
    return labels_arr, sqdists_arr


def cluster_mean_distances(double[:, ::1] points, cnp.int64_t[::1] labels,
                           Py_ssize_t k, cnp.int64_t[::1] sample_idx):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t s = sample_idx.shape[0]
    sums_arr = np.zeros((s, k), dtype=np.float64)
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef double[:, ::1] sums = sums_arr
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef Py_ssize_t a, b, j, c, idx
    cdef double dist, diff
    cdef cnp.int64_t cnt
    for b in range(n):
        counts[labels[b]] += 1
    for a in range(s):
        idx = sample_idx[a]
        for b in range(n):
            if b == idx:
                continue
            dist = 0.0
            for j in range(d):
                diff = points[idx, j] - points[b, j]
                dist += diff * diff
            sums[a, labels[b]] += sqrt(dist)
    means_arr = np.empty((s, k), dtype=np.float64)
    cdef double[:, ::1] means = means_arr
    for a in range(s):
        idx = sample_idx[a]
        for c in range(k):
            cnt = counts[c]
            if c == labels[idx]:
                cnt -= 1
                if cnt == 0:
                    means[a, c] = 0.0  # singleton own cluster
                    continue
            if cnt == 0:
                means[a, c] = INFINITY  # empty foreign cluster
            else:
                means[a, c] = sums[a, c] / cnt
    return means_arr
