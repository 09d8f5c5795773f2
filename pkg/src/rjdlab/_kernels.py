"""Numba inner loops for the path engines.

Kernels consume pre-drawn normal variates and pre-built jump tables, so the
random-stream layout is fixed entirely by the caller (one stream family per
path).  State updates are written so that the invariants the couplings
advertise (componentwise ordering, absorbing coalescence, gap preservation
across shared jumps) hold exactly in floating point:

* the coupled state is carried as ``(lower, gap)`` and the gap is updated by
  direct arithmetic, never by subtracting the two components;
* shared jumps translate the lower component and leave the gap untouched;
* once the gap reaches zero the update keeps it at zero identically, so
  coalescence is absorbing without a special code path.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def drift_at(kind, p0, p1, xs, gs, x):
    # kind 0: constant p0;  kind 1: affine p0*x + p1;  kind 2: tabulated
    if kind == 0:
        return p0
    if kind == 1:
        return p0 * x + p1
    n = xs.shape[0]
    if x <= xs[0]:
        return gs[0]
    if x >= xs[n - 1]:
        return gs[n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if xs[mid] <= x:
            lo = mid
        else:
            hi = mid
    w = (x - xs[lo]) / (xs[lo + 1] - xs[lo])
    return gs[lo] + w * (gs[lo + 1] - gs[lo])


@njit(cache=True)
def path_ensemble(
    x0,
    h,
    kind,
    p0,
    p1,
    xs,
    gs,
    sig_sqh,
    normals,
    jump_step,
    jump_disp,
    jump_count,
    snap_idx,
):
    """Evolve a batch of reflected paths.

    Returns per-path state and local time at the snapshot indices, the first
    grid index at which the state equals zero exactly (-1 if never), and the
    number of grid points spent at zero.
    """
    B, n_steps = normals.shape
    S = snap_idx.shape[0]
    x_snap = np.zeros((B, S))
    ell_snap = np.zeros((B, S))
    zero_idx = np.full(B, -1, np.int64)
    zero_steps = np.zeros(B, np.int64)
    for b in range(B):
        x = x0
        ell = 0.0
        sp = 0
        jp = 0
        nj = jump_count[b]
        if x == 0.0:
            zero_idx[b] = 0
            zero_steps[b] += 1
        while sp < S and snap_idx[sp] == 0:
            x_snap[b, sp] = x
            ell_snap[b, sp] = ell
            sp += 1
        for i in range(1, n_steps + 1):
            y = x + h * drift_at(kind, p0, p1, xs, gs, x) + sig_sqh * normals[b, i - 1]
            if y >= 0.0:
                x = y
            else:
                x = 0.0
                ell -= y
            while jp < nj and jump_step[b, jp] == i:
                x = x + jump_disp[b, jp]
                jp += 1
            if x == 0.0:
                zero_steps[b] += 1
                if zero_idx[b] < 0:
                    zero_idx[b] = i
            while sp < S and snap_idx[sp] == i:
                x_snap[b, sp] = x
                ell_snap[b, sp] = ell
                sp += 1
    return x_snap, ell_snap, zero_idx, zero_steps


@njit(cache=True)
def coupled_ensemble(
    x1_0,
    gap0,
    h,
    kind,
    p0,
    p1,
    xs,
    gs,
    sig_sqh,
    normals,
    jump_step,
    jump_disp,
    jump_count,
    snap_idx,
    win_lo,
    win_hi,
    envelope,
):
    """Evolve a batch of monotone coupled pairs carried as ``(lower, gap)``.

    ``envelope[i]`` is the theoretical gap ceiling at grid index ``i``;
    violations are tracked only before the upper component's first visit to
    zero.  Window suprema of the gap are taken over inclusive index ranges.
    """
    B, n_steps = normals.shape
    S = snap_idx.shape[0]
    W = win_lo.shape[0]
    lo_snap = np.zeros((B, S))
    gap_snap = np.zeros((B, S))
    tau_idx = np.full(B, -1, np.int64)
    coal_idx = np.full(B, -1, np.int64)
    min_gap = np.full(B, np.inf)
    env_viol = np.full(B, -np.inf)
    win_sup = np.zeros((B, W))
    jump_events = np.zeros(B, np.int64)
    jump_mismatch = np.zeros(B, np.int64)
    resurrect = np.zeros(B, np.int64)
    for b in range(B):
        x = x1_0
        gap = gap0
        sp = 0
        jp = 0
        nj = jump_count[b]
        if x == 0.0 and gap == 0.0:
            tau_idx[b] = 0
        if gap == 0.0:
            coal_idx[b] = 0
        if gap < min_gap[b]:
            min_gap[b] = gap
        if tau_idx[b] < 0:
            v = gap - envelope[0]
            if v > env_viol[b]:
                env_viol[b] = v
        for w in range(W):
            if win_lo[w] <= 0 <= win_hi[w]:
                win_sup[b, w] = gap
        while sp < S and snap_idx[sp] == 0:
            lo_snap[b, sp] = x
            gap_snap[b, sp] = gap
            sp += 1
        for i in range(1, n_steps + 1):
            z = normals[b, i - 1]
            g_lo = drift_at(kind, p0, p1, xs, gs, x)
            g_hi = drift_at(kind, p0, p1, xs, gs, x + gap)
            y1 = x + h * g_lo + sig_sqh * z
            gy = gap + h * (g_hi - g_lo)
            if gy < 0.0:
                gy = 0.0
            y2 = y1 + gy
            if y1 >= 0.0:
                x = y1
                gap = gy
            elif y2 > 0.0:
                x = 0.0
                gap = y2
            else:
                x = 0.0
                gap = 0.0
            while jp < nj and jump_step[b, jp] == i:
                gap_before = gap
                x = x + jump_disp[b, jp]
                jump_events[b] += 1
                if gap != gap_before:
                    jump_mismatch[b] += 1
                jp += 1
            if coal_idx[b] >= 0 and gap != 0.0:
                resurrect[b] += 1
            if tau_idx[b] < 0 and x == 0.0 and gap == 0.0:
                tau_idx[b] = i
            if coal_idx[b] < 0 and gap == 0.0:
                coal_idx[b] = i
            if gap < min_gap[b]:
                min_gap[b] = gap
            if tau_idx[b] < 0:
                v = gap - envelope[i]
                if v > env_viol[b]:
                    env_viol[b] = v
            for w in range(W):
                if win_lo[w] <= i <= win_hi[w] and gap > win_sup[b, w]:
                    win_sup[b, w] = gap
            while sp < S and snap_idx[sp] == i:
                lo_snap[b, sp] = x
                gap_snap[b, sp] = gap
                sp += 1
    return (
        lo_snap,
        gap_snap,
        tau_idx,
        coal_idx,
        min_gap,
        env_viol,
        win_sup,
        jump_events,
        jump_mismatch,
        resurrect,
    )
