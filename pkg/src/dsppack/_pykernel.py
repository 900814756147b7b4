"""Vectorised numpy implementation of the lane-error kernel.

Used when the compiled extension is unavailable or ``DSPPACK_PURE`` is set.
Semantics must match ``_ckernel.pyx`` exactly.
"""

from __future__ import annotations

import numpy as np

SCHEME_NONE, SCHEME_FULL, SCHEME_APPROX, SCHEME_MR = 0, 1, 2, 3


def _wrap(v, width, signed):
    mask = np.int64((1 << width) - 1)
    u = v & mask
    if not signed:
        return u
    half = np.int64(1 << (width - 1))
    return ((u + half) & mask) - half


def lane_errors(a_ops, w_ops, a_off, w_off, r_off, r_wdth, lane_a, lane_w,
                scheme, out_width, signed_lanes, mr_k, out):
    n_lanes = len(r_off)
    fa = np.zeros(a_ops.shape[0], dtype=np.int64)
    for i, off in enumerate(a_off):
        fa += a_ops[:, i] * np.int64(1 << int(off))
    fw = np.zeros(w_ops.shape[0], dtype=np.int64)
    for j, off in enumerate(w_off):
        fw += w_ops[:, j] * np.int64(1 << int(off))
    raw = fa * fw
    if scheme == SCHEME_APPROX:
        for n in range(1, n_lanes):
            raw = raw + (w_ops[:, lane_w[n - 1]] < 0).astype(np.int64) * np.int64(1 << int(r_off[n]))
    p = _wrap(raw, out_width, True)
    kmask = np.int64((1 << mr_k) - 1) if mr_k > 0 else np.int64(0)
    for n in range(n_lanes):
        off, width = int(r_off[n]), int(r_wdth[n])
        v = _wrap(p >> np.int64(off), width, signed_lanes)
        if scheme == SCHEME_FULL and n > 0 and signed_lanes:
            v = _wrap(v + ((p >> np.int64(off - 1)) & np.int64(1)), width, True)
        elif scheme == SCHEME_MR and n < n_lanes - 1:
            lsb = ((a_ops[:, lane_a[n + 1]] & kmask) * (w_ops[:, lane_w[n + 1]] & kmask)) & kmask
            v = _wrap(v - lsb * np.int64(1 << (width - mr_k)), width, signed_lanes)
        err = v - a_ops[:, lane_a[n]] * w_ops[:, lane_w[n]]
        if err.size == 0:
            continue
        ae = np.abs(err)
        out[n, 0] += np.count_nonzero(err)
        out[n, 1] += int(ae.sum())
        out[n, 2] = max(out[n, 2], int(ae.max()))
        out[n, 3] = min(out[n, 3], int(err.min()))
        out[n, 4] = max(out[n, 4], int(err.max()))


def decode(lo, radix, start, stop):
    """Operand rows for flat indices in [start, stop); last operand fastest."""
    idx = np.arange(start, stop, dtype=np.int64)
    cols = np.empty((stop - start, len(lo)), dtype=np.int64)
    for k in range(len(lo) - 1, -1, -1):
        cols[:, k] = lo[k] + idx % radix[k]
        idx //= radix[k]
    return cols


def lane_errors_range(lo, radix, start, stop, a_off, w_off, r_off, r_wdth, lane_a, lane_w,
                      scheme, out_width, signed_lanes, mr_k, out):
    ops = decode(lo, radix, start, stop)
    na = len(a_off)
    lane_errors(np.ascontiguousarray(ops[:, :na]), np.ascontiguousarray(ops[:, na:]), a_off, w_off,
                r_off, r_wdth, lane_a, lane_w, scheme, out_width, signed_lanes, mr_k, out)
