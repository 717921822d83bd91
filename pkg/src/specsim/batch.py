"""Vectorized policies over many windows at once.

Arrays are shaped (windows, entities). Results match the scalar cores in
:mod:`specsim.policies` operation for operation; sums run left to right so the
floating-point rounding matches too.
"""

from __future__ import annotations

import numpy as np



def _rowsum(a: np.ndarray) -> np.ndarray:
    total = np.zeros(a.shape[0])
    for j in range(a.shape[1]):
        total = total + a[:, j]
    return total


def fr_batch(psi, total) -> np.ndarray:
    total = np.asarray(total, dtype=float)
    return np.asarray(psi, dtype=float)[None, :] * total[:, None]


def cs_batch(demands: np.ndarray, total) -> tuple[np.ndarray, np.ndarray]:
    """Returns grants and a mask of windows where every demand was zero."""
    demands = np.asarray(demands, dtype=float)
    total = np.broadcast_to(np.asarray(total, dtype=float), demands.shape[:1])
    dsum = _rowsum(demands)
    degenerate = dsum <= 0
    safe = np.where(degenerate, 1.0, dsum)
    grants = demands / safe[:, None] * total[:, None]
    equal = np.broadcast_to((total / demands.shape[1])[:, None], demands.shape)
    return np.where(degenerate[:, None], equal, grants), degenerate


def pr_batch(demands: np.ndarray, norm_shares, norm_priorities, total, reserved=0.0,
             caps=None) -> tuple[np.ndarray, np.ndarray]:
    """PR mode for N >= 1 entities. Returns grants and case codes 0, 1, 2 for C-I, C-II, C-III."""
    d = np.asarray(demands, dtype=float)
    w, n = d.shape
    total = np.broadcast_to(np.asarray(total, dtype=float), (w,))
    reserved = np.broadcast_to(np.asarray(reserved, dtype=float), (w,))
    xi = np.asarray(norm_shares, dtype=float)
    if xi.ndim == 1:
        xi = xi[None, :]
    rho = np.asarray(norm_priorities, dtype=float)
    g = xi * total[:, None]

    if n == 1:
        grants = np.minimum(d, total[:, None])
        codes = np.where(d[:, 0] <= g[:, 0], 0, 1)
        return _caps(grants, caps), codes

    e = d - g
    te = _rowsum(e)
    ci = np.all(e <= 0, axis=1) | (te <= 0)
    cii = ~ci & np.all(e > 0, axis=1)
    ciii = ~ci & ~cii
    codes = np.where(ci, 0, np.where(cii, 1, 2))
    covered = (reserved > 0) & (te <= reserved)

    grants = d.copy()
    c2_rows = cii & ~covered
    c2 = np.where((reserved == 0)[:, None], g, g + reserved[:, None] * rho[None, :])
    grants[c2_rows] = c2[c2_rows]

    c3_rows = ciii & ~covered
    if c3_rows.any():
        dd, gg, ee = d[c3_rows], g[c3_rows], e[c3_rows]
        res = reserved[c3_rows]
        light = ee <= 0
        pot = _rowsum(np.where(light, gg - dd, 0.0))
        pot = np.where(res > 0, pot + res, pot)
        extra = water_fill_batch(pot, np.where(light, 0.0, rho[None, :]), np.where(light, 0.0, ee),
                                 ~light)
        grants[c3_rows] = np.where(light, dd, gg + extra)
    return _caps(grants, caps), codes


def water_fill_batch(pot, weights, needs, receivers) -> np.ndarray:
    left = np.array(pot, dtype=float)
    open_ = receivers.copy()
    out = np.zeros(needs.shape)
    active = open_.any(axis=1) & (left > 0)
    for _ in range(needs.shape[1]):
        if not active.any():
            break
        wsum = _rowsum(np.where(open_, weights, 0.0))
        safe = np.where(wsum > 0, wsum, 1.0)
        share = left[:, None] * (weights / safe[:, None])
        full = open_ & (share >= needs) & active[:, None]
        settle = active & ~full.any(axis=1)
        out = np.where(settle[:, None] & open_, share, out)
        out = np.where(full, needs, out)
        for j in range(needs.shape[1]):
            left = np.where(full[:, j], left - needs[:, j], left)
        open_ = open_ & ~full
        active = active & ~settle & open_.any(axis=1) & (left > 0)
    return out


def _caps(grants, caps):
    if caps is None:
        return grants
    lim = np.array([np.inf if c is None else c for c in caps], dtype=float)
    return np.minimum(grants, lim[None, :])
