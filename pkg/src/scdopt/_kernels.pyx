# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_kernels_py`` operation for operation."""

import numpy as np
from libc.stdint cimport uint64_t
from libc.math cimport INFINITY

cdef double FLOW_EPS = 1e-12
cdef double RELAX_EPS = 1e-9
STATUS_OK = 0
STATUS_INFEASIBLE = 1


cdef inline uint64_t _next(uint64_t* state) nogil:
    cdef uint64_t z
    state[0] += <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _random(uint64_t* state) nogil:
    return <double>(_next(state) >> 11) * (1.0 / 9007199254740992.0)


cdef inline Py_ssize_t _randbelow(uint64_t* state, Py_ssize_t n) nogil:
    return <Py_ssize_t>(_random(state) * n)


def transport_ssp(supply, demand, cost, double tol=1e-9):
    cdef double[::1] sup = np.ascontiguousarray(supply, dtype=float)
    cdef double[::1] dem = np.ascontiguousarray(demand, dtype=float)
    cdef double[:, ::1] c = np.ascontiguousarray(cost, dtype=float)
    cdef Py_ssize_t m = sup.shape[0], n = dem.shape[0]
    flow_arr = np.zeros((m, n), dtype=float)
    cdef double[:, ::1] F = flow_arr
    cdef double ssum = 0.0, dsum = 0.0
    cdef Py_ssize_t i, j, jj, it, best, src, steps
    for i in range(m):
        ssum += sup[i]
    for j in range(n):
        dsum += dem[j]
    if ssum < dsum - tol:
        return flow_arr, float("inf"), STATUS_INFEASIBLE

    rs_arr = np.array(sup, dtype=float)
    rd_arr = np.array(dem, dtype=float)
    ds_arr = np.empty(m, dtype=float)
    dt_arr = np.empty(n, dtype=float)
    ps_arr = np.empty(m, dtype=np.intp)
    pt_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] rs = rs_arr, rd = rd_arr, ds = ds_arr, dt = dt_arr
    cdef Py_ssize_t[::1] ps = ps_arr, pt = pt_arr
    cdef double nd, bott, total, short
    cdef bint changed, target_left

    while True:
        target_left = False
        for j in range(n):
            if rd[j] > FLOW_EPS:
                target_left = True
                break
        if not target_left:
            break

        for i in range(m):
            ds[i] = 0.0 if rs[i] > FLOW_EPS else INFINITY
            ps[i] = -1
        for j in range(n):
            dt[j] = INFINITY
            pt[j] = -1
        for it in range(m + n + 1):
            changed = False
            for j in range(n):
                for i in range(m):
                    if ds[i] < INFINITY:
                        nd = ds[i] + c[i, j]
                        if nd < dt[j] - RELAX_EPS:
                            dt[j] = nd
                            pt[j] = i
                            changed = True
            for i in range(m):
                for j in range(n):
                    if F[i, j] > FLOW_EPS and dt[j] < INFINITY:
                        nd = dt[j] - c[i, j]
                        if nd < ds[i] - RELAX_EPS:
                            ds[i] = nd
                            ps[i] = j
                            changed = True
            if not changed:
                break

        best = -1
        for j in range(n):
            if rd[j] > FLOW_EPS and dt[j] < INFINITY and (best < 0 or dt[j] < dt[best]):
                best = j
        if best < 0:
            break

        bott = rd[best]
        j = best
        steps = 0
        while True:
            i = pt[j]
            if ps[i] < 0:
                if rs[i] < bott:
                    bott = rs[i]
                src = i
                break
            jj = ps[i]
            if F[i, jj] < bott:
                bott = F[i, jj]
            j = jj
            steps += 1
            if steps > m + n:
                raise RuntimeError("cycle in shortest-path tree")

        j = best
        while True:
            i = pt[j]
            F[i, j] += bott
            if ps[i] < 0:
                break
            jj = ps[i]
            F[i, jj] -= bott
            if F[i, jj] < FLOW_EPS:
                F[i, jj] = 0.0
            j = jj
        rs[src] -= bott
        rd[best] -= bott

    total = 0.0
    short = 0.0
    for j in range(n):
        short += rd[j] if rd[j] > 0.0 else 0.0
    for i in range(m):
        for j in range(n):
            total += c[i, j] * F[i, j]
    if short > tol:
        return flow_arr, float("inf"), STATUS_INFEASIBLE
    return flow_arr, total, STATUS_OK


cdef inline double _weighted_sum(double[:, ::1] p, double[:, ::1] w, Py_ssize_t m, Py_ssize_t n) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i, j
    for i in range(m):
        for j in range(n):
            s += w[i, j] * p[i, j]
    return s


def vns_scenario(p_in, w_in, long kmax, seed, bint four_corner=False):
    p_arr = np.array(p_in, dtype=float, order="C")
    cdef double[:, ::1] p = p_arr
    cdef double[:, ::1] w = np.ascontiguousarray(w_in, dtype=float)
    cdef Py_ssize_t m = p.shape[0], n = p.shape[1]
    cdef uint64_t state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef double cur = _weighted_sum(p, w, m, n), new, amt, bound
    cdef double o11, o21, o12, o22
    cdef Py_ssize_t l1 = 0, c1 = 0, l2 = 0, c2 = 0, attempt
    cdef long k = 1
    trace = [cur]
    while k < kmax:
        amt = 0.0
        if m >= 2 and n >= 2:
            for attempt in range(20):
                l1 = _randbelow(&state, m)
                c1 = _randbelow(&state, n)
                l2 = _randbelow(&state, m - 1)
                if l2 >= l1:
                    l2 += 1
                c2 = _randbelow(&state, n - 1)
                if c2 >= c1:
                    c2 += 1
                bound = p[l1, c1]
                if p[l2, c2] < bound:
                    bound = p[l2, c2]
                if four_corner:
                    if p[l2, c1] < bound:
                        bound = p[l2, c1]
                    if p[l1, c2] < bound:
                        bound = p[l1, c2]
                if bound > 0.0:
                    amt = _random(&state) * bound
                    break
        if amt <= 0.0:
            k += 1
            continue
        o11 = p[l1, c1]
        o21 = p[l2, c1]
        o12 = p[l1, c2]
        o22 = p[l2, c2]
        p[l1, c1] = o11 - amt
        p[l2, c2] = o22 - amt
        p[l2, c1] = o21 + amt
        p[l1, c2] = o12 + amt
        new = _weighted_sum(p, w, m, n)
        if new < cur:
            cur = new
            trace.append(cur)
        else:
            p[l1, c1] = o11
            p[l2, c1] = o21
            p[l1, c2] = o12
            p[l2, c2] = o22
            k += 1
    return p_arr, trace


def greedy_alloc(lam, capacity, alpha, demand):
    cdef double[:, ::1] lm = np.ascontiguousarray(lam, dtype=float)
    cdef double[:, ::1] al = np.ascontiguousarray(alpha, dtype=float)
    cdef double[::1] cap = np.ascontiguousarray(capacity, dtype=float)
    cdef double[::1] dem = np.ascontiguousarray(demand, dtype=float)
    cdef Py_ssize_t m = lm.shape[0], n = lm.shape[1], K = al.shape[1]
    p_arr = np.zeros((m, n, K), dtype=float)
    u_arr = np.zeros((n, K), dtype=float)
    g_arr = np.empty(m, dtype=float)
    cdef double[:, :, ::1] p = p_arr
    cdef double[:, ::1] u = u_arr
    cdef double[::1] g = g_arr
    cdef Py_ssize_t k, c, l, best
    cdef double a, deliverable, used
    for k in range(K):
        for l in range(m):
            g[l] = cap[l]
        for c in range(n):
            a = dem[c]
            while a > 0.0:
                best = -1
                for l in range(m):
                    if g[l] > 0.0 and (best < 0 or lm[l, c] < lm[best, c]):
                        best = l
                if best < 0:
                    u[c, k] = a
                    break
                deliverable = al[best, k] * g[best]
                if deliverable > a:
                    used = a / al[best, k]
                    p[best, c, k] += used
                    g[best] -= used
                    a = 0.0
                else:
                    p[best, c, k] += g[best]
                    a -= deliverable
                    g[best] = 0.0
    return p_arr, u_arr
