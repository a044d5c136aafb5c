# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: log-domain adaptive GK21 quadrature and uniform-grid KDE.

Same algorithms and signatures as ``_kernels_py``; the GIL is released
inside both loops so a thread pool can evaluate grid points concurrently.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, sqrt, fabs, INFINITY, isfinite, floor, M_PI
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double XGK[11]
cdef double WGK[11]
cdef double WG[5]

XGK[:] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
]
WGK[:] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600125834902,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
]
WG[:] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
]

cdef enum:
    ST_OK = 0
    ST_MAX_SUBDIVISIONS = 1
    ST_ROUNDOFF = 2
    MAX_LADDER = 60
    BISECT_ITERS = 200
    MAX_PEAKS = 3
    MAX_EDGES = 2 * MAX_PEAKS * (MAX_LADDER + 1) + 4

STATUS_OK = ST_OK
STATUS_MAX_SUBDIVISIONS = ST_MAX_SUBDIVISIONS
STATUS_ROUNDOFF = ST_ROUNDOFF

ctypedef struct Params:
    double a, p, q, c, r


cdef inline double log_integrand(double v, const Params* P) noexcept nogil:
    cdef double out = P.q * v - P.c / v - P.r * log(v)
    if P.p != 0.0:
        out += P.p * log(P.a - v)
    return out


cdef inline double cubic_h(double v, const Params* P) noexcept nogil:
    return -P.p * v * v + (P.q * v * v - P.r * v + P.c) * (P.a - v)


cdef double bisect_h(double lo, double hi, const Params* P) noexcept nogil:
    cdef double mid
    cdef int i
    for i in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if cubic_h(mid, P) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


cdef int find_peaks(const Params* P, double* peaks) noexcept nogil:
    cdef double disc, sq, v1, v2, b, cc, root, lo, hi
    cdef double cuts[4]
    cdef int ncut = 0, npk = 0, i
    if P.p == 0.0:
        disc = P.r * P.r - 4.0 * P.q * P.c
        if disc <= 0.0:
            peaks[0] = P.a
            return 1
        sq = sqrt(disc)
        v1 = (P.r - sq) / (2.0 * P.q)
        v2 = (P.r + sq) / (2.0 * P.q)
        if v1 >= P.a:
            peaks[0] = P.a
            return 1
        peaks[0] = v1
        if v2 < P.a:
            peaks[1] = P.a
            return 2
        return 1
    b = P.q * P.a + P.r - P.p
    cc = P.c + P.r * P.a
    cuts[ncut] = 0.0
    ncut += 1
    disc = b * b - 3.0 * P.q * cc
    if disc > 0.0:
        sq = sqrt(disc)
        root = (b - sq) / (3.0 * P.q)
        if 0.0 < root < P.a:
            cuts[ncut] = root
            ncut += 1
        root = (b + sq) / (3.0 * P.q)
        if 0.0 < root < P.a:
            cuts[ncut] = root
            ncut += 1
    cuts[ncut] = P.a
    ncut += 1
    for i in range(ncut - 1):
        lo = cuts[i]
        hi = cuts[i + 1]
        if cubic_h(lo, P) > 0.0 and cubic_h(hi, P) < 0.0:
            peaks[npk] = bisect_h(lo, hi, P)
            npk += 1
    if npk == 0:
        peaks[0] = bisect_h(0.0, P.a, P)
        npk = 1
    return npk


cdef double peak_width(double m, const Params* P) noexcept nogil:
    cdef double curv = -2.0 * P.c / (m * m * m) + P.r / (m * m)
    cdef double gap
    if P.p != 0.0:
        gap = P.a - m
        if gap > 0.0:
            curv -= P.p / (gap * gap)
        else:
            curv = INFINITY
    if curv < 0.0 and isfinite(curv):
        return 1.0 / sqrt(-curv)
    return 0.25 * m


cdef void sort_doubles(double* x, int n) noexcept nogil:
    cdef int i, j
    cdef double key
    for i in range(1, n):
        key = x[i]
        j = i - 1
        while j >= 0 and x[j] > key:
            x[j + 1] = x[j]
            j -= 1
        x[j + 1] = key


cdef int build_edges(const Params* P, double* peaks, int npk, double* edges) noexcept nogil:
    cdef double raw[MAX_EDGES]
    cdef int n = 0, i, k, nout
    cdef double m, s, step, pt
    raw[n] = 0.0
    n += 1
    raw[n] = P.a
    n += 1
    for i in range(npk):
        m = peaks[i]
        s = peak_width(m, P)
        if 0.0 < m < P.a:
            raw[n] = m
            n += 1
        step = s
        for k in range(MAX_LADDER):
            pt = m - step
            if pt <= 0.0:
                break
            raw[n] = pt
            n += 1
            step *= 2.0
        step = s
        for k in range(MAX_LADDER):
            pt = m + step
            if pt >= P.a:
                break
            raw[n] = pt
            n += 1
            step *= 2.0
    sort_doubles(raw, n)
    edges[0] = raw[0]
    nout = 1
    for i in range(1, n):
        if raw[i] > edges[nout - 1] * (1.0 + 1e-14) and raw[i] - edges[nout - 1] > 1e-300:
            edges[nout] = raw[i]
            nout += 1
    if edges[nout - 1] != P.a:
        edges[nout - 1] = P.a
    return nout


cdef double peak_log_value(const Params* P, double* peaks, int npk) noexcept nogil:
    cdef double best = -INFINITY, val, m
    cdef int i
    for i in range(npk):
        m = peaks[i]
        if m >= P.a:
            val = P.q * P.a - P.c / P.a - P.r * log(P.a)
        else:
            val = log_integrand(m, P)
        if val > best:
            best = val
    return best


cdef void gk21(const Params* P, double lo, double hi, double shift,
               double* res, double* err) noexcept nogil:
    cdef double center = 0.5 * (lo + hi)
    cdef double half = 0.5 * (hi - lo)
    cdef double fc = exp(log_integrand(center, P) - shift)
    cdef double resk = fc * WGK[10]
    cdef double resg = 0.0
    cdef double dx, f1, f2
    cdef int j
    for j in range(10):
        dx = half * XGK[j]
        f1 = exp(log_integrand(center - dx, P) - shift)
        f2 = exp(log_integrand(center + dx, P) - shift)
        resk += WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += WG[j // 2] * (f1 + f2)
    res[0] = resk * half
    err[0] = fabs(resk - resg) * half


cdef int integrate_core(const Params* P, double rel_tol, double log_abs_tol,
                        int max_sub, double* out_log, double* out_rel,
                        int* out_panels) noexcept nogil:
    cdef double peaks[MAX_PEAKS]
    cdef double edges[MAX_EDGES]
    cdef int npk = find_peaks(P, peaks)
    cdef double shift = peak_log_value(P, peaks, npk)
    cdef int nedge = build_edges(P, peaks, npk, edges)
    cdef int npan = nedge - 1
    cdef int cap = max_sub if max_sub > npan else npan
    cdef double* lo = <double*> malloc(cap * sizeof(double))
    cdef double* hi = <double*> malloc(cap * sizeof(double))
    cdef double* val = <double*> malloc(cap * sizeof(double))
    cdef double* err = <double*> malloc(cap * sizeof(double))
    cdef long* ident = <long*> malloc(cap * sizeof(long))
    cdef double abs_tol, total, toterr, comp_t, comp_e, y, t, mid, worst
    cdef int i, iw, status
    cdef long counter
    if lo == NULL or hi == NULL or val == NULL or err == NULL or ident == NULL:
        free(lo); free(hi); free(val); free(err); free(ident)
        out_log[0] = -INFINITY
        out_rel[0] = INFINITY
        out_panels[0] = 0
        return -1
    for i in range(npan):
        lo[i] = edges[i]
        hi[i] = edges[i + 1]
        gk21(P, lo[i], hi[i], shift, &val[i], &err[i])
        ident[i] = i
    counter = npan
    abs_tol = exp(log_abs_tol - shift if log_abs_tol - shift < 700.0 else 700.0)
    status = ST_MAX_SUBDIVISIONS
    while True:
        # Neumaier-compensated sums
        total = 0.0
        comp_t = 0.0
        toterr = 0.0
        comp_e = 0.0
        for i in range(npan):
            t = total + val[i]
            if fabs(total) >= fabs(val[i]):
                comp_t += (total - t) + val[i]
            else:
                comp_t += (val[i] - t) + total
            total = t
            t = toterr + err[i]
            if fabs(toterr) >= fabs(err[i]):
                comp_e += (toterr - t) + err[i]
            else:
                comp_e += (err[i] - t) + toterr
            toterr = t
        total += comp_t
        toterr += comp_e
        if toterr <= (rel_tol * fabs(total) if rel_tol * fabs(total) > abs_tol else abs_tol):
            status = ST_OK
            break
        if npan >= cap:
            break
        iw = 0
        worst = err[0]
        for i in range(1, npan):
            if err[i] > worst or (err[i] == worst and ident[i] < ident[iw]):
                worst = err[i]
                iw = i
        mid = 0.5 * (lo[iw] + hi[iw])
        if not (lo[iw] < mid < hi[iw]):
            status = ST_ROUNDOFF
            break
        lo[npan] = mid
        hi[npan] = hi[iw]
        hi[iw] = mid
        gk21(P, lo[iw], hi[iw], shift, &val[iw], &err[iw])
        gk21(P, lo[npan], hi[npan], shift, &val[npan], &err[npan])
        ident[iw] = counter
        ident[npan] = counter + 1
        counter += 2
        npan += 1
    free(lo); free(hi); free(val); free(err); free(ident)
    out_panels[0] = npan
    if total <= 0.0:
        out_log[0] = -INFINITY
        out_rel[0] = INFINITY
    else:
        out_log[0] = log(total) + shift
        out_rel[0] = toterr / total
    return status


def find_peaks_py(double a, double p, double q, double c, double r):
    """Peak locations of the log-integrand (exposed for testing)."""
    cdef Params P
    cdef double peaks[MAX_PEAKS]
    P.a = a; P.p = p; P.q = q; P.c = c; P.r = r
    cdef int n = find_peaks(&P, peaks)
    return [peaks[i] for i in range(n)]


def integrate_log_nu(double a, double p, double q, double c, double r,
                     double rel_tol, double log_abs_tol, int max_subdivisions):
    """Adaptive GK21 integral of ``exp(L)`` over ``(0, a)``.

    Returns ``(log_integral, rel_error, n_panels, status)``.
    """
    cdef Params P
    cdef double lv, rel
    cdef int npan, status
    P.a = a; P.p = p; P.q = q; P.c = c; P.r = r
    with nogil:
        status = integrate_core(&P, rel_tol, log_abs_tol, max_subdivisions, &lv, &rel, &npan)
    if status < 0:
        raise MemoryError()
    return lv, rel, npan, status


def integrate_log_nu_many(a_values, double p, double q, double c, double r,
                          double rel_tol, log_abs_tol, int max_subdivisions):
    """Vector form of :func:`integrate_log_nu` over an array of upper limits."""
    av = np.ascontiguousarray(a_values, dtype=np.float64).ravel()
    cdef Py_ssize_t n = av.shape[0]
    tol = np.ascontiguousarray(np.broadcast_to(np.asarray(log_abs_tol, dtype=np.float64), (n,)))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] logv = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rerr = np.empty(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] npan = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stat = np.empty(n, dtype=np.int64)
    cdef const double[::1] av_v = av
    cdef const double[::1] tol_v = tol
    cdef double[::1] logv_v = logv, rerr_v = rerr
    cdef cnp.int64_t[::1] npan_v = npan, stat_v = stat
    cdef Params P
    cdef Py_ssize_t i
    cdef int np_i, st
    cdef double lv, rel
    cdef bint oom = False
    P.p = p; P.q = q; P.c = c; P.r = r
    with nogil:
        for i in range(n):
            P.a = av_v[i]
            st = integrate_core(&P, rel_tol, tol_v[i], max_subdivisions, &lv, &rel, &np_i)
            if st < 0:
                oom = True
                break
            logv_v[i] = lv
            rerr_v[i] = rel
            npan_v[i] = np_i
            stat_v[i] = st
    if oom:
        raise MemoryError()
    return logv, rerr, npan, stat


cdef double KDE_CUTOFF = 10.0


def kde_uniform_grid(sorted_samples, double x0, double dx, Py_ssize_t n_grid, double bandwidth):
    """Gaussian KDE evaluated on the grid ``x0 + dx * j``.

    Each sample's kernel is swept across the grid with the exact recurrence
    ``exp(-(d + j dx)^2 / 2h^2)`` = previous term times a geometric ratio,
    starting at the nearest grid point and moving outward, so the cost is
    two multiplies per (sample, grid point) pair inside 10 bandwidths.
    """
    cdef const double[::1] s = np.ascontiguousarray(sorted_samples, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(n_grid)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t m = s.shape[0], i, j, j0, steps
    cdef double inv_h2 = 1.0 / (bandwidth * bandwidth)
    cdef double shrink = exp(-dx * dx * inv_h2)
    cdef double reach = KDE_CUTOFF * bandwidth
    cdef double d, term, ratio, u
    if m == 0:
        return out_arr
    steps = <Py_ssize_t> (reach / dx) + 2
    with nogil:
        for i in range(m):
            u = (s[i] - x0) / dx
            j0 = <Py_ssize_t> floor(u + 0.5)
            if j0 < 0:
                j0 = 0
            elif j0 > n_grid - 1:
                j0 = n_grid - 1
            # d = grid[j0] - sample
            d = x0 + dx * j0 - s[i]
            if fabs(d) > reach:
                continue
            # moving right: term_{j+1} = term_j * exp(-(2 d dx + dx^2)/(2h^2)) with d advancing
            term = exp(-0.5 * d * d * inv_h2)
            out[j0] += term
            ratio = exp(-(d * dx + 0.5 * dx * dx) * inv_h2)
            j = j0 + 1
            while j < n_grid and j - j0 <= steps:
                term *= ratio
                ratio *= shrink
                if fabs(x0 + dx * j - s[i]) > reach:
                    break
                out[j] += term
                j += 1
            term = exp(-0.5 * d * d * inv_h2)
            ratio = exp(-(-d * dx + 0.5 * dx * dx) * inv_h2)
            j = j0 - 1
            while j >= 0 and j0 - j <= steps:
                term *= ratio
                ratio *= shrink
                if fabs(x0 + dx * j - s[i]) > reach:
                    break
                out[j] += term
                j -= 1
        d = 1.0 / (sqrt(2.0 * M_PI) * bandwidth * m)
        for j in range(n_grid):
            out[j] *= d
    return out_arr
