# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: exact squared Euclidean distance transform and the
two-queue search loop.

Behavioral twin of ``semcost.kernels.pure``: identical tie-breaking
(key, then larger g, then row-major index), identical neighbor order, and
identical floating-point expression order, so results are bit-equal across
backends.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, isfinite, sqrt
from libc.stdlib cimport free, malloc, realloc

cnp.import_array()

cdef double BIG = 1e20


cdef void _dt1d(double* f, Py_ssize_t n, double* d, Py_ssize_t* v, double* z) noexcept:
    cdef Py_ssize_t q, k = 0
    cdef double s, fq
    v[0] = 0
    z[0] = -BIG
    z[1] = BIG
    for q in range(1, n):
        fq = f[q] + <double> (q * q)
        s = (fq - (f[v[k]] + <double> (v[k] * v[k]))) / <double> (2 * q - 2 * v[k])
        while s <= z[k]:
            k -= 1
            s = (fq - (f[v[k]] + <double> (v[k] * v[k]))) / <double> (2 * q - 2 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = BIG
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = <double> ((q - v[k]) * (q - v[k])) + f[v[k]]


def edt_squared(const cnp.uint8_t[:, ::1] mask):
    """Exact squared Euclidean distance (in cells) to the nearest 1-cell."""
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    cdef Py_ssize_t m = h if h > w else w
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double* f = <double*> malloc(m * sizeof(double))
    cdef double* d = <double*> malloc(m * sizeof(double))
    cdef double* z = <double*> malloc((m + 1) * sizeof(double))
    cdef Py_ssize_t* v = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t))
    if f == NULL or d == NULL or z == NULL or v == NULL:
        free(f); free(d); free(z); free(v)
        raise MemoryError()
    cdef Py_ssize_t r, c
    try:
        for c in range(w):
            for r in range(h):
                f[r] = 0.0 if mask[r, c] else BIG
            _dt1d(f, h, d, v, z)
            for r in range(h):
                out[r, c] = d[r]
        for r in range(h):
            for c in range(w):
                f[c] = out[r, c]
            _dt1d(f, w, d, v, z)
            for c in range(w):
                out[r, c] = d[c]
    finally:
        free(f); free(d); free(z); free(v)
    return out_arr


# --- binary heap on parallel arrays ----------------------------------------

cdef struct Heap:
    double* key
    double* g
    int* idx
    Py_ssize_t size
    Py_ssize_t cap


cdef inline bint _lt(double ka, double ga, int ia, double kb, double gb, int ib) noexcept:
    if ka != kb:
        return ka < kb
    if ga != gb:
        return ga > gb  # larger g first on equal keys
    return ia < ib


cdef int _heap_init(Heap* hp, Py_ssize_t cap) except -1:
    hp.key = <double*> malloc(cap * sizeof(double))
    hp.g = <double*> malloc(cap * sizeof(double))
    hp.idx = <int*> malloc(cap * sizeof(int))
    if hp.key == NULL or hp.g == NULL or hp.idx == NULL:
        raise MemoryError()
    hp.size = 0
    hp.cap = cap
    return 0


cdef void _heap_free(Heap* hp) noexcept:
    free(hp.key); free(hp.g); free(hp.idx)


cdef int _heap_push(Heap* hp, double key, double g, int idx) except -1:
    cdef Py_ssize_t i, parent
    cdef double tk, tg
    cdef int ti
    if hp.size == hp.cap:
        hp.cap *= 2
        hp.key = <double*> realloc(hp.key, hp.cap * sizeof(double))
        hp.g = <double*> realloc(hp.g, hp.cap * sizeof(double))
        hp.idx = <int*> realloc(hp.idx, hp.cap * sizeof(int))
        if hp.key == NULL or hp.g == NULL or hp.idx == NULL:
            raise MemoryError()
    i = hp.size
    hp.size += 1
    hp.key[i] = key
    hp.g[i] = g
    hp.idx[i] = idx
    while i > 0:
        parent = (i - 1) >> 1
        if _lt(hp.key[i], hp.g[i], hp.idx[i], hp.key[parent], hp.g[parent], hp.idx[parent]):
            tk = hp.key[i]; hp.key[i] = hp.key[parent]; hp.key[parent] = tk
            tg = hp.g[i]; hp.g[i] = hp.g[parent]; hp.g[parent] = tg
            ti = hp.idx[i]; hp.idx[i] = hp.idx[parent]; hp.idx[parent] = ti
            i = parent
        else:
            break
    return 0


cdef void _heap_pop(Heap* hp) noexcept:
    cdef Py_ssize_t i = 0, child, right, last
    cdef double tk, tg
    cdef int ti
    hp.size -= 1
    last = hp.size
    if last == 0:
        return
    hp.key[0] = hp.key[last]
    hp.g[0] = hp.g[last]
    hp.idx[0] = hp.idx[last]
    while True:
        child = 2 * i + 1
        if child >= last:
            break
        right = child + 1
        if right < last and _lt(hp.key[right], hp.g[right], hp.idx[right],
                                hp.key[child], hp.g[child], hp.idx[child]):
            child = right
        if _lt(hp.key[child], hp.g[child], hp.idx[child], hp.key[i], hp.g[i], hp.idx[i]):
            tk = hp.key[i]; hp.key[i] = hp.key[child]; hp.key[child] = tk
            tg = hp.g[i]; hp.g[i] = hp.g[child]; hp.g[child] = tg
            ti = hp.idx[i]; hp.idx[i] = hp.idx[child]; hp.idx[child] = ti
            i = child
        else:
            break


cdef bint _peek_valid(Heap* hp, double* g, unsigned char* canc, unsigned char* cinad,
                      bint skip_inad, double* out_key, int* out_idx) noexcept:
    cdef int idx
    while hp.size > 0:
        idx = hp.idx[0]
        if hp.g[0] != g[idx] or canc[idx] or (skip_inad and cinad[idx]):
            _heap_pop(hp)
            continue
        out_key[0] = hp.key[0]
        out_idx[0] = idx
        return True
    return False


def mha_search(const cnp.uint8_t[:, ::1] occ, const double[:, ::1] pot,
               Py_ssize_t start_idx, Py_ssize_t goal_idx,
               double w1, double w2, double gamma, int connectivity):
    """Two-queue search; see kernels.pure.mha_search for the contract."""
    cdef Py_ssize_t h = occ.shape[0]
    cdef Py_ssize_t w = occ.shape[1]
    cdef Py_ssize_t n = h * w
    cdef int n_moves
    cdef long dr[8]
    cdef long dc[8]
    cdef double step[8]
    cdef double SQRT2 = sqrt(2.0)
    if connectivity == 8:
        n_moves = 8
        dr[0] = -1; dc[0] = -1; step[0] = SQRT2
        dr[1] = -1; dc[1] = 0;  step[1] = 1.0
        dr[2] = -1; dc[2] = 1;  step[2] = SQRT2
        dr[3] = 0;  dc[3] = -1; step[3] = 1.0
        dr[4] = 0;  dc[4] = 1;  step[4] = 1.0
        dr[5] = 1;  dc[5] = -1; step[5] = SQRT2
        dr[6] = 1;  dc[6] = 0;  step[6] = 1.0
        dr[7] = 1;  dc[7] = 1;  step[7] = SQRT2
    else:
        n_moves = 4
        dr[0] = -1; dc[0] = 0; step[0] = 1.0
        dr[1] = 0;  dc[1] = -1; step[1] = 1.0
        dr[2] = 0;  dc[2] = 1;  step[2] = 1.0
        dr[3] = 1;  dc[3] = 0;  step[3] = 1.0

    g_arr = np.full(n, np.inf, dtype=np.float64)
    parents_arr = np.full(n, -1, dtype=np.int32)
    closed_anc_arr = np.zeros(n, dtype=np.uint8)
    closed_inad_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] g = g_arr
    cdef cnp.int32_t[::1] parents = parents_arr
    cdef unsigned char[::1] canc = closed_anc_arr
    cdef unsigned char[::1] cinad = closed_inad_arr

    cdef Heap open0, open1
    _heap_init(&open0, 1024)
    cdef bint open1_ready = False
    cdef long exp_anchor = 0, exp_informed = 0
    cdef Py_ssize_t grow = goal_idx // w, gcol = goal_idx % w
    cdef Py_ssize_t srow = start_idx // w, scol = start_idx % w
    cdef long dr0 = srow - grow, dc0 = scol - gcol
    cdef double key0, key1, sel_key, gu, cand, h0v
    cdef int top0, top1, u, i
    cdef Py_ssize_t ur, uc, vr, vc, v
    cdef bint informed, have0, have1

    try:
        _heap_init(&open1, 1024)
        open1_ready = True
        g[start_idx] = 0.0
        _heap_push(&open0, w1 * sqrt(<double> (dr0 * dr0 + dc0 * dc0)), 0.0, <int> start_idx)
        _heap_push(&open1, w1 * pot[srow, scol], 0.0, <int> start_idx)

        while True:
            have0 = _peek_valid(&open0, &g[0], &canc[0], &cinad[0], False, &key0, &top0)
            if not have0:
                break
            have1 = _peek_valid(&open1, &g[0], &canc[0], &cinad[0], True, &key1, &top1)
            if have1 and key1 <= w2 * key0:
                sel_key = key1
                u = top1
                _heap_pop(&open1)
                cinad[u] = 1
                informed = True
            else:
                sel_key = key0
                u = top0
                _heap_pop(&open0)
                canc[u] = 1
                informed = False
            if g[goal_idx] <= sel_key:
                break
            if informed:
                exp_informed += 1
            else:
                exp_anchor += 1
            gu = g[u]
            ur = u // w
            uc = u % w
            for i in range(n_moves):
                vr = ur + dr[i]
                vc = uc + dc[i]
                if vr < 0 or vr >= h or vc < 0 or vc >= w:
                    continue
                v = vr * w + vc
                if occ[vr, vc]:
                    continue
                cand = gu + step[i] + gamma * pot[vr, vc]
                if cand < g[v]:
                    g[v] = cand
                    parents[v] = <cnp.int32_t> u
                    h0v = sqrt(<double> ((vr - grow) * (vr - grow) + (vc - gcol) * (vc - gcol)))
                    _heap_push(&open0, cand + w1 * h0v, cand, <int> v)
                    _heap_push(&open1, cand + w1 * pot[vr, vc], cand, <int> v)
    finally:
        _heap_free(&open0)
        if open1_ready:
            _heap_free(&open1)

    cdef double g_goal = g[goal_idx]
    return (isfinite(g_goal) != 0, g_goal, parents_arr, exp_anchor, exp_informed)
