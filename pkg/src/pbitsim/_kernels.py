"""Compiled inner loops for the three samplers.

Everything here mirrors the reference semantics in `model` bit for bit:
fields are accumulated in CSR index order, draws come from the same
splitmix64 or 32-bit LFSR streams, and decisions use math.tanh (or the
fixed-point table) with the identical comparison. Keeping one code path per
operation is what lets the pure-Python replay oracle and the cross-sampler
degeneracy checks demand byte-equal traces.

All kernels consume one draw from the activated p-bit's own stream per
activation, including saturated fixed-point activations, so stream positions
depend only on how many times each p-bit has fired.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# splitmix64 constants as uint64 so numba never promotes through int64
_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_TWO_NEG52 = 2.0 ** -52

# 32-bit LFSR, Fibonacci taps (32, 22, 2, 1) -> shifts 31, 21, 1, 0
_L31 = np.uint32(31)
_L21 = np.uint32(21)
_L1 = np.uint32(1)

RNG_SPLITMIX = 0
RNG_LFSR = 1
ACT_FLOAT = 0
ACT_FIXED = 1


@njit(cache=True, nogil=True)
def _mix64(z):
    z = (z ^ (z >> _U30)) * _M1
    z = (z ^ (z >> _U27)) * _M2
    return z ^ (z >> _U31)


@njit(cache=True, nogil=True)
def _sm_raw(states, i):
    s = states[i] + _G
    states[i] = s
    return _mix64(s)


@njit(cache=True, nogil=True)
def _lfsr_word(regs, i):
    r = regs[i]
    for _ in range(32):
        fb = (r >> _L31) ^ (r >> _L21) ^ (r >> _L1) ^ r
        r = (r << _L1) | (fb & _L1)
    regs[i] = r
    return r


@njit(cache=True, nogil=True)
def _decide(I, beta, i, rng_kind, sm_states, lf_regs,
            act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf):
    """One activation decision for p-bit i, consuming one draw."""
    if act_kind == 0:
        if rng_kind == 0:
            u = _sm_raw(sm_states, i)
            r = (np.float64(u >> _U11) + 0.5) * _TWO_NEG52 - 1.0
        else:
            w = _lfsr_word(lf_regs, i)
            v = np.int64(np.int32(w))
            r = (v + 0.5) / 2147483648.0
        return 1 if math.tanh(beta * I) > r else -1
    else:
        if rng_kind == 0:
            u = _sm_raw(sm_states, i)
            r_int = np.int64(u >> np.uint64(sh_sm)) - half
        else:
            w = _lfsr_word(lf_regs, i)
            r_int = np.int64(w >> np.uint32(sh_lf)) - half
        x = beta * I
        xi = np.rint(x * frac_mul)
        if xi > qmax or xi < -qmax:
            return 1 if x > 0 else -1
        t = table[np.int64(xi) + qmax]
        return 1 if t > r_int else -1


@njit(cache=True, nogil=True)
def _field(indptr, indices, weights, h, m, i):
    acc = h[i]
    for k in range(indptr[i], indptr[i + 1]):
        acc += weights[k] * m[indices[k]]
    return acc


@njit(cache=True, nogil=True)
def _energy_full(indptr, indices, weights, h, m):
    acc = 0.0
    n = h.size
    for i in range(n):
        part = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            part += weights[k] * m[indices[k]]
        acc += m[i] * (0.5 * part + h[i])
    return -acc


@njit(cache=True, nogil=True)
def _shuffle(arr, aux_state):
    for t in range(arr.size - 1, 0, -1):
        aux_state[0] = aux_state[0] + _G
        u = _mix64(aux_state[0])
        j = np.int64(u % np.uint64(t + 1))
        tmp = arr[t]
        arr[t] = arr[j]
        arr[j] = tmp


@njit(cache=True, nogil=True)
def sweep_trial(indptr, indices, weights, h, m,
                betas, cum_sweeps, n_sweeps,
                colors_indptr, colors_nodes, scan_random,
                rng_kind, sm_states, lf_regs, aux_state,
                act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf,
                e_thresh, track,
                trace_nodes, trace_vals, record_trace):
    """Sweep-ordered Gibbs: serial (one color) or synchronous colored blocks.

    Within a color block nodes are mutually uncoupled, so sequential updates
    with incremental energies reproduce the simultaneous block update
    exactly. Annealing is sweep-indexed; the last stage's beta holds if
    n_sweeps runs past the schedule. The full energy is recomputed at every
    stage boundary to keep incremental float error from accumulating.

    Returns (best_e, final_e, first_upd, updates, flips) where first_upd is
    the number of completed updates when the energy first reached e_thresh
    (0 for the initial state, -1 for never).
    """
    n = h.size
    n_stages = betas.size
    n_colors = colors_indptr.size - 1
    cur_e = _energy_full(indptr, indices, weights, h, m)
    best = cur_e
    first_upd = np.int64(-1)
    if track == 1 and cur_e <= e_thresh:
        first_upd = np.int64(0)
    flips = np.int64(0)
    upd = np.int64(0)
    ptr = 0
    scratch = np.empty(n, np.int32)
    for s in range(n_sweeps):
        while ptr + 1 < n_stages and s >= cum_sweeps[ptr + 1]:
            ptr += 1
            cur_e = _energy_full(indptr, indices, weights, h, m)
            if cur_e < best:
                best = cur_e
            if track == 1 and first_upd < 0 and cur_e <= e_thresh:
                first_upd = upd
        beta = betas[ptr]
        for c in range(n_colors):
            lo = colors_indptr[c]
            cnt = colors_indptr[c + 1] - lo
            for t in range(cnt):
                scratch[t] = colors_nodes[lo + t]
            if scan_random == 1:
                _shuffle(scratch[:cnt], aux_state)
            for t in range(cnt):
                i = scratch[t]
                I = _field(indptr, indices, weights, h, m, i)
                new = _decide(I, beta, i, rng_kind, sm_states, lf_regs,
                              act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf)
                upd += 1
                if new != m[i]:
                    cur_e += 2.0 * m[i] * I
                    m[i] = new
                    flips += 1
                    if cur_e < best:
                        best = cur_e
                    if track == 1 and first_upd < 0 and cur_e <= e_thresh:
                        first_upd = upd
                if record_trace == 1:
                    trace_nodes[upd - 1] = i
                    trace_vals[upd - 1] = new
    return best, cur_e, first_upd, upd, flips


@njit(cache=True, nogil=True)
def histogram_trial(indptr, indices, weights, h, m,
                    beta, n_sweeps, burn_in,
                    colors_indptr, colors_nodes,
                    rng_kind, sm_states, lf_regs,
                    act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf,
                    hist):
    """Fixed-beta Gibbs; counts the state reached after each post-burn-in
    sweep into hist, indexed by sum_i (m_i == +1) << i."""
    n = h.size
    n_colors = colors_indptr.size - 1
    for s in range(n_sweeps):
        for c in range(n_colors):
            for t in range(colors_indptr[c], colors_indptr[c + 1]):
                i = colors_nodes[t]
                I = _field(indptr, indices, weights, h, m, i)
                m[i] = _decide(I, beta, i, rng_kind, sm_states, lf_regs,
                               act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf)
        if s >= burn_in:
            code = np.int64(0)
            for i in range(n):
                if m[i] == 1:
                    code |= np.int64(1) << np.int64(i)
            hist[code] += 1


@njit(cache=True, nogil=True)
def async_trial(indptr, indices, weights, h, m,
                betas, cum_sweeps, stage_starts, beta_time_mode,
                fire_times, fire_clocks, clock_indptr, clock_pbs,
                window, delay,
                rng_kind, sm_states, lf_regs,
                act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf,
                e_thresh, track,
                trace_nodes, trace_vals, record_trace):
    """Event-driven sampling under independent free-running clocks.

    Firings landing within `window` of a group's first firing form one
    simultaneous group; all its decisions are computed from the pre-group
    state (pass 1), then applied one at a time with true current-state
    energy deltas (pass 2), so the running energy telescopes exactly.

    Synapse latency: a neighbor that last flipped later than t - delay has
    not propagated yet, so the reader sees its previous value. History is
    one level deep, which is exact while each p-bit's own period exceeds
    delay (a p-bit cannot flip twice within delay of a read).

    Beta advances at stage start times (time mode) or per n completed
    activations (sweep mode), holding the last stage's value afterwards.
    Energy snapshots for best/success are taken at group boundaries.

    Returns (best_e, final_e, first_upd, first_t, updates, flips,
    stale_reads, collisions): stale_reads counts neighbor reads served from
    history, collisions counts activations sharing a group with a directly
    coupled activation.
    """
    n = h.size
    n_stages = betas.size
    m_prev = m.copy()
    t_flip = np.full(n, -1e300)
    stamp = np.full(n, -1, np.int64)
    g_nodes = np.empty(n, np.int32)
    g_times = np.empty(n, np.float64)
    g_dec = np.empty(n, np.int8)
    cur_e = _energy_full(indptr, indices, weights, h, m)
    best = cur_e
    first_upd = np.int64(-1)
    first_t = -1.0
    if track == 1 and cur_e <= e_thresh:
        first_upd = np.int64(0)
        first_t = 0.0
    upd = np.int64(0)
    flips = np.int64(0)
    stale = np.int64(0)
    coll = np.int64(0)
    ptr = 0
    gid = np.int64(0)
    n_fire = fire_times.size
    fi = 0
    while fi < n_fire:
        t0 = fire_times[fi]
        gsz = 0
        fj = fi
        while fj < n_fire and fire_times[fj] - t0 <= window:
            c = fire_clocks[fj]
            for k in range(clock_indptr[c], clock_indptr[c + 1]):
                g_nodes[gsz] = clock_pbs[k]
                g_times[gsz] = fire_times[fj]
                gsz += 1
            fj += 1
        if beta_time_mode == 1:
            while ptr + 1 < n_stages and t0 >= stage_starts[ptr + 1]:
                ptr += 1
                cur_e = _energy_full(indptr, indices, weights, h, m)
                if cur_e < best:
                    best = cur_e
                if track == 1 and first_upd < 0 and cur_e <= e_thresh:
                    first_upd = upd
                    first_t = t0
        else:
            sweep_index = upd // n
            while ptr + 1 < n_stages and sweep_index >= cum_sweeps[ptr + 1]:
                ptr += 1
                cur_e = _energy_full(indptr, indices, weights, h, m)
                if cur_e < best:
                    best = cur_e
                if track == 1 and first_upd < 0 and cur_e <= e_thresh:
                    first_upd = upd
                    first_t = t0
        beta = betas[ptr]
        gid += 1
        for a in range(gsz):
            stamp[g_nodes[a]] = gid
        for a in range(gsz):
            i = g_nodes[a]
            tr = g_times[a]
            I = h[i]
            collided = 0
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if stamp[j] == gid:
                    collided = 1
                if t_flip[j] > tr - delay:
                    I += weights[k] * m_prev[j]
                    stale += 1
                else:
                    I += weights[k] * m[j]
            coll += collided
            g_dec[a] = _decide(I, beta, i, rng_kind, sm_states, lf_regs,
                               act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf)
            upd += 1
        changed = 0
        for a in range(gsz):
            i = g_nodes[a]
            new = g_dec[a]
            if new != m[i]:
                I = _field(indptr, indices, weights, h, m, i)
                cur_e += 2.0 * m[i] * I
                m_prev[i] = m[i]
                m[i] = new
                t_flip[i] = g_times[a]
                flips += 1
                changed = 1
            if record_trace == 1:
                trace_nodes[upd - gsz + a] = i
                trace_vals[upd - gsz + a] = new
        if changed == 1:
            if cur_e < best:
                best = cur_e
            if track == 1 and first_upd < 0 and cur_e <= e_thresh:
                first_upd = upd
                first_t = t0
        fi = fj
    return best, cur_e, first_upd, first_t, upd, flips, stale, coll


@njit(cache=True, nogil=True)
def lfsr_fill(regs, out):
    """Fill out with word-refresh uniforms from register stream 0."""
    for k in range(out.size):
        w = _lfsr_word(regs, 0)
        v = np.int64(np.int32(w))
        out[k] = (np.float64(v) + 0.5) / 2147483648.0


@njit(cache=True, nogil=True)
def enumerate_min_energy(indptr, indices, weights, h, n):
    """Exhaustive minimum over all 2^n states; returns (min_e, argmin code)."""
    best = 1e300
    best_code = np.int64(0)
    m = np.empty(n, np.int8)
    for code in range(np.int64(1) << np.int64(n)):
        for i in range(n):
            m[i] = 1 if (code >> i) & 1 else -1
        e = _energy_full(indptr, indices, weights, h, m)
        if e < best:
            best = e
            best_code = code
    return best, best_code
