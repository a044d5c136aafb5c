"""Pure-Python/numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` step for step so both backends return the same
numbers up to libm rounding. Selected automatically when the compiled
extension is unavailable.

The quadrature kernel integrates ``exp(L(v))`` over ``0 < v < a`` where

    L(v) = p*log(a - v) + q*v - c/v - r*log(v)

with ``p >= 0`` and ``q, c, r > 0``.
"""

import heapq
import math

import numpy as np

# 21-point Gauss-Kronrod rule (QUADPACK qk21)
XGK = np.array([
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
])
WGK = np.array([
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
])
WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# node offsets in [-1, 1] and matching weights, Kronrod and embedded Gauss
_NODES = np.concatenate([-XGK[:10], XGK[::-1]])
_WK = np.concatenate([WGK[:10], WGK[::-1]])
_WG = np.zeros(21)
for _j in range(1, 10, 2):
    _WG[_j] = WG[_j // 2]
    _WG[20 - _j] = WG[_j // 2]

STATUS_OK = 0
STATUS_MAX_SUBDIVISIONS = 1
STATUS_ROUNDOFF = 2

_MAX_LADDER = 60
_BISECT_ITERS = 200


def _log_integrand(v, a, p, q, c, r):
    out = q * v - c / v - r * np.log(v)
    if p != 0.0:
        out = out + p * np.log(a - v)
    return out


def _log_integrand_scalar(v, a, p, q, c, r):
    out = q * v - c / v - r * math.log(v)
    if p != 0.0:
        out += p * math.log(a - v)
    return out


def _bisect_descending(fn, lo, hi):
    # fn(lo) > 0 > fn(hi)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_peaks(a, p, q, c, r):
    """Local maxima of ``L`` on ``(0, a]``.

    Stationary points of ``L`` are roots of the cubic
    ``h(v) = -p v^2 + (q v^2 - r v + c)(a - v)``, which has the sign of
    ``L'(v)`` on the open interval. For ``p == 0`` the endpoint ``a`` can
    be the maximizer.
    """
    peaks = []
    if p == 0.0:
        disc = r * r - 4.0 * q * c
        if disc <= 0.0:
            return [a]
        sq = math.sqrt(disc)
        v1 = (r - sq) / (2.0 * q)
        v2 = (r + sq) / (2.0 * q)
        if v1 >= a:
            return [a]
        peaks.append(v1)
        if v2 < a:
            peaks.append(a)
        return peaks

    def h(v):
        return -p * v * v + (q * v * v - r * v + c) * (a - v)

    # critical points of h split (0, a) into monotone pieces
    b = q * a + r - p
    cc = c + r * a
    cuts = [0.0]
    disc = b * b - 3.0 * q * cc
    if disc > 0.0:
        sq = math.sqrt(disc)
        for root in ((b - sq) / (3.0 * q), (b + sq) / (3.0 * q)):
            if 0.0 < root < a:
                cuts.append(root)
    cuts.append(a)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if h(lo) > 0.0 and h(hi) < 0.0:
            peaks.append(_bisect_descending(h, lo, hi))
    if not peaks:
        # h is positive right up to a within rounding; the maximum hugs a
        peaks.append(_bisect_descending(h, 0.0, a))
    return peaks


def _peak_width(m, a, p, c, r):
    curv = -2.0 * c / (m * m * m) + r / (m * m)
    if p != 0.0:
        gap = a - m
        curv -= p / (gap * gap) if gap > 0.0 else math.inf
    if curv < 0.0 and math.isfinite(curv):
        return 1.0 / math.sqrt(-curv)
    return 0.25 * m


def breakpoints(a, p, q, c, r):
    """Initial panel edges: geometric ladders out from every peak."""
    pts = {0.0, a}
    for m in find_peaks(a, p, q, c, r):
        s = _peak_width(m, a, p, c, r)
        if 0.0 < m < a:
            pts.add(m)
        step = s
        for _ in range(_MAX_LADDER):
            left = m - step
            if left <= 0.0:
                break
            pts.add(left)
            step *= 2.0
        step = s
        for _ in range(_MAX_LADDER):
            right = m + step
            if right >= a:
                break
            pts.add(right)
            step *= 2.0
    edges = sorted(pts)
    out = [edges[0]]
    for e in edges[1:]:
        if e > out[-1] * (1.0 + 1e-14) and e - out[-1] > 1e-300:
            out.append(e)
    if out[-1] != a:
        out[-1] = a
    return out


def peak_log_value(a, p, q, c, r):
    best = -math.inf
    for m in find_peaks(a, p, q, c, r):
        if m >= a:
            # endpoint maximum only occurs for p == 0
            val = q * a - c / a - r * math.log(a)
        else:
            val = _log_integrand_scalar(m, a, p, q, c, r)
        best = max(best, val)
    return best


def _gk21_panels(lo, hi, a, p, q, c, r, shift):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    v = center[:, None] + half[:, None] * _NODES[None, :]
    f = np.exp(_log_integrand(v, a, p, q, c, r) - shift)
    resk = (f @ _WK) * half
    resg = (f @ _WG) * half
    return resk, np.abs(resk - resg)


def integrate_log_nu(a, p, q, c, r, rel_tol, log_abs_tol, max_subdivisions):
    """Adaptive GK21 integral of ``exp(L)`` over ``(0, a)``.

    Returns ``(log_integral, rel_error, n_panels, status)``. Panels are
    evaluated as ``exp(L - Lmax)`` and the result rescaled by ``Lmax``.
    """
    shift = peak_log_value(a, p, q, c, r)
    edges = breakpoints(a, p, q, c, r)
    res, err = _gk21_panels(edges[:-1], edges[1:], a, p, q, c, r, shift)
    # min-heap on -err; counter keeps ordering deterministic on ties
    heap = [(-e, i, lo, hi, v) for i, (e, lo, hi, v) in
            enumerate(zip(err.tolist(), edges[:-1], edges[1:], res.tolist()))]
    heapq.heapify(heap)
    counter = len(heap)
    abs_tol = math.exp(min(log_abs_tol - shift, 700.0))
    status = STATUS_MAX_SUBDIVISIONS
    while True:
        total = math.fsum(item[4] for item in heap)
        toterr = math.fsum(-item[0] for item in heap)
        if toterr <= max(rel_tol * abs(total), abs_tol):
            status = STATUS_OK
            break
        if len(heap) >= max_subdivisions:
            break
        neg_e, _, lo, hi, value = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            heapq.heappush(heap, (neg_e, counter, lo, hi, value))
            status = STATUS_ROUNDOFF
            break
        r2, e2 = _gk21_panels([lo, mid], [mid, hi], a, p, q, c, r, shift)
        heapq.heappush(heap, (-e2[0], counter, lo, mid, r2[0]))
        heapq.heappush(heap, (-e2[1], counter + 1, mid, hi, r2[1]))
        counter += 2
    if total <= 0.0:
        return -math.inf, math.inf, len(heap), status
    return math.log(total) + shift, toterr / total, len(heap), status


def integrate_log_nu_many(a_values, p, q, c, r, rel_tol, log_abs_tol, max_subdivisions):
    """Vector form of :func:`integrate_log_nu` over an array of upper limits.

    ``log_abs_tol`` is an array aligned with ``a_values``.
    """
    a_values = np.asarray(a_values, dtype=float)
    log_abs_tol = np.broadcast_to(np.asarray(log_abs_tol, dtype=float), a_values.shape)
    n = a_values.size
    logv = np.empty(n)
    rerr = np.empty(n)
    npan = np.empty(n, dtype=np.int64)
    stat = np.empty(n, dtype=np.int64)
    for i in range(n):
        logv[i], rerr[i], npan[i], stat[i] = integrate_log_nu(
            float(a_values[i]), p, q, c, r, rel_tol, float(log_abs_tol[i]), max_subdivisions)
    return logv, rerr, npan, stat


_KDE_CUTOFF = 10.0
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def kde_uniform_grid(sorted_samples, x0, dx, n_grid, bandwidth):
    """Gaussian KDE evaluated on the grid ``x0 + dx * j``.

    Kernels are truncated at 10 bandwidths (relative mass lost < 1e-22).
    ``sorted_samples`` must be ascending.
    """
    s = np.asarray(sorted_samples, dtype=float)
    if s.size == 0:
        return np.zeros(n_grid)
    grid = x0 + dx * np.arange(n_grid)
    reach = _KDE_CUTOFF * bandwidth
    lo = np.searchsorted(s, grid - reach, side="left")
    hi = np.searchsorted(s, grid + reach, side="right")
    out = np.zeros(n_grid)
    inv_h = 1.0 / bandwidth
    for j in range(n_grid):
        if hi[j] > lo[j]:
            u = (s[lo[j]:hi[j]] - grid[j]) * inv_h
            out[j] = np.exp(-0.5 * u * u).sum()
    return out * (_INV_SQRT_2PI * inv_h / s.size)
