# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled lane-error kernels; mirror ``_pykernel``."""

from libc.stdint cimport int64_t, uint64_t

cdef enum:
    MAXN = 64

MAX_LANES = MAXN
MAX_OPERANDS = MAXN


cdef struct Plan:
    int na, nw, nl, scheme, out_width, signed_lanes, mr_k
    int64_t kmask
    int64_t a_pw[MAXN]
    int64_t w_pw[MAXN]
    int64_t r_off[MAXN]
    int r_wdth[MAXN]
    int lane_a[MAXN]
    int lane_w[MAXN]
    int64_t mr_pw[MAXN]
    int64_t c_pw[MAXN]


cdef inline int64_t _wrap(int64_t v, int width, bint signed) noexcept nogil:
    cdef uint64_t mask = ((<uint64_t>1) << width) - 1
    cdef uint64_t u = (<uint64_t>v) & mask
    if signed and (u >> (width - 1)) & 1:
        return <int64_t>(u | ~mask)
    return <int64_t>u


cdef int _load(Plan* pl, const int64_t[::1] a_off, const int64_t[::1] w_off,
               const int64_t[::1] r_off, const int64_t[::1] r_wdth,
               const int64_t[::1] lane_a, const int64_t[::1] lane_w,
               int scheme, int out_width, bint signed_lanes, int mr_k) except -1:
    cdef Py_ssize_t i
    if a_off.shape[0] > MAXN or w_off.shape[0] > MAXN or r_off.shape[0] > MAXN:
        raise ValueError("too many operands or lanes for the compiled kernel")
    pl.na = a_off.shape[0]
    pl.nw = w_off.shape[0]
    pl.nl = r_off.shape[0]
    pl.scheme = scheme
    pl.out_width = out_width
    pl.signed_lanes = signed_lanes
    pl.mr_k = mr_k
    pl.kmask = (((<int64_t>1) << mr_k) - 1) if mr_k > 0 else 0
    for i in range(pl.na):
        pl.a_pw[i] = (<int64_t>1) << a_off[i]
    for i in range(pl.nw):
        pl.w_pw[i] = (<int64_t>1) << w_off[i]
    for i in range(pl.nl):
        pl.r_off[i] = r_off[i]
        pl.r_wdth[i] = <int>r_wdth[i]
        pl.lane_a[i] = <int>lane_a[i]
        pl.lane_w[i] = <int>lane_w[i]
        pl.c_pw[i] = (<int64_t>1) << r_off[i]
        pl.mr_pw[i] = ((<int64_t>1) << (r_wdth[i] - mr_k)) if mr_k > 0 else 0
    return 0


cdef inline void _one(const Plan* pl, const int64_t* a, const int64_t* w, int64_t* st) noexcept nogil:
    # st holds nl rows of [errors, abs_sum, wce, min_err, max_err]
    cdef int i, n
    cdef int64_t fa = 0, fw = 0, c = 0, p, v, e, ae, lsb
    for i in range(pl.na):
        fa += a[i] * pl.a_pw[i]
    for i in range(pl.nw):
        fw += w[i] * pl.w_pw[i]
    if pl.scheme == 2:
        for n in range(1, pl.nl):
            if w[pl.lane_w[n - 1]] < 0:
                c += pl.c_pw[n]
    p = _wrap(fa * fw + c, pl.out_width, True)
    for n in range(pl.nl):
        v = _wrap(p >> pl.r_off[n], pl.r_wdth[n], pl.signed_lanes)
        if pl.scheme == 1 and n > 0 and pl.signed_lanes:
            v = _wrap(v + ((p >> (pl.r_off[n] - 1)) & 1), pl.r_wdth[n], True)
        elif pl.scheme == 3 and n < pl.nl - 1:
            lsb = ((a[pl.lane_a[n + 1]] & pl.kmask) * (w[pl.lane_w[n + 1]] & pl.kmask)) & pl.kmask
            v = _wrap(v - lsb * pl.mr_pw[n], pl.r_wdth[n], pl.signed_lanes)
        e = v - a[pl.lane_a[n]] * w[pl.lane_w[n]]
        if e != 0:
            ae = e if e > 0 else -e
            st[5 * n] += 1
            st[5 * n + 1] += ae
            if ae > st[5 * n + 2]:
                st[5 * n + 2] = ae
            if e < st[5 * n + 3]:
                st[5 * n + 3] = e
            if e > st[5 * n + 4]:
                st[5 * n + 4] = e
        else:
            if st[5 * n + 3] > 0:
                st[5 * n + 3] = 0
            if st[5 * n + 4] < 0:
                st[5 * n + 4] = 0


cdef void _store(const Plan* pl, const int64_t* st, int64_t[:, ::1] out) noexcept nogil:
    cdef int n
    for n in range(pl.nl):
        out[n, 0] += st[5 * n]
        out[n, 1] += st[5 * n + 1]
        if st[5 * n + 2] > out[n, 2]:
            out[n, 2] = st[5 * n + 2]
        if st[5 * n + 3] < out[n, 3]:
            out[n, 3] = st[5 * n + 3]
        if st[5 * n + 4] > out[n, 4]:
            out[n, 4] = st[5 * n + 4]


cdef void _reset(const Plan* pl, int64_t* st, const int64_t[:, ::1] out) noexcept nogil:
    cdef int n
    for n in range(pl.nl):
        st[5 * n] = 0
        st[5 * n + 1] = 0
        st[5 * n + 2] = 0
        st[5 * n + 3] = out[n, 3]
        st[5 * n + 4] = out[n, 4]


def lane_errors(const int64_t[:, ::1] a_ops, const int64_t[:, ::1] w_ops,
                const int64_t[::1] a_off, const int64_t[::1] w_off,
                const int64_t[::1] r_off, const int64_t[::1] r_wdth,
                const int64_t[::1] lane_a, const int64_t[::1] lane_w,
                int scheme, int out_width, bint signed_lanes, int mr_k,
                int64_t[:, ::1] out):
    """Accumulate error statistics of explicit operand rows into ``out``."""
    cdef Plan pl
    cdef int64_t st[5 * MAXN]
    cdef Py_ssize_t r, rows = a_ops.shape[0]
    _load(&pl, a_off, w_off, r_off, r_wdth, lane_a, lane_w, scheme, out_width, signed_lanes, mr_k)
    if rows == 0:
        return
    with nogil:
        _reset(&pl, st, out)
        for r in range(rows):
            _one(&pl, &a_ops[r, 0], &w_ops[r, 0], st)
        _store(&pl, st, out)


def lane_errors_range(const int64_t[::1] lo, const int64_t[::1] radix, int64_t start, int64_t stop,
                      const int64_t[::1] a_off, const int64_t[::1] w_off,
                      const int64_t[::1] r_off, const int64_t[::1] r_wdth,
                      const int64_t[::1] lane_a, const int64_t[::1] lane_w,
                      int scheme, int out_width, bint signed_lanes, int mr_k,
                      int64_t[:, ::1] out):
    """Like :func:`lane_errors` over flat indices ``[start, stop)`` of the
    mixed-radix operand domain (last operand fastest), decoded in place."""
    cdef Plan pl
    cdef int64_t st[5 * MAXN]
    cdef int64_t ops[MAXN]
    cdef int64_t digit[MAXN]
    cdef int64_t idx, r
    cdef int k, nops
    _load(&pl, a_off, w_off, r_off, r_wdth, lane_a, lane_w, scheme, out_width, signed_lanes, mr_k)
    nops = pl.na + pl.nw
    if lo.shape[0] != nops or radix.shape[0] != nops:
        raise ValueError("operand ranges do not match the plan")
    if stop <= start:
        return
    with nogil:
        idx = start
        for k in range(nops - 1, -1, -1):
            digit[k] = idx % radix[k]
            idx = idx // radix[k]
            ops[k] = lo[k] + digit[k]
        _reset(&pl, st, out)
        for r in range(start, stop):
            _one(&pl, &ops[0], &ops[pl.na], st)
            # odometer step
            k = nops - 1
            while k >= 0:
                digit[k] += 1
                if digit[k] < radix[k]:
                    ops[k] += 1
                    break
                digit[k] = 0
                ops[k] = lo[k]
                k -= 1
        _store(&pl, st, out)
