"""Compiled inner loops for simulation and trajectory replay.

Event codes: ``j >= 0`` attaches monomer ``j``; ``-1`` detaches the tip.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def gillespie_chunk(k_plus, k_minus, uniforms, stack, length, t, t_max, max_jumps,
                    n_done, times_out, codes_out):
    """Advance the chain using consecutive (holding, jump) uniform pairs.

    Returns ``(n_steps, length, t, stopped)``. ``stack`` must have room for
    ``length + uniforms.shape[0]`` ids.
    """
    d = k_plus.shape[0]
    K = 0.0
    for r in range(d):
        K += k_plus[r]
    n = 0
    n_pairs = uniforms.shape[0]
    while n < n_pairs:
        if max_jumps >= 0 and n_done + n >= max_jumps:
            return n, length, t, True
        if length > 0:
            back = k_minus[stack[length - 1]]
        else:
            back = 0.0
        q = K + back
        hold = -np.log1p(-uniforms[n, 0]) / q
        if t_max >= 0.0 and t + hold > t_max:
            return n, length, t, True
        t += hold
        target = uniforms[n, 1] * q
        cum = 0.0
        code = -2
        for j in range(d):
            cum += k_plus[j]
            if target < cum:
                code = j
                break
        if code == -2:
            # target landed in the detach slot, or past the end through rounding
            code = -1 if length > 0 else d - 1
        if code == -1:
            length -= 1
        else:
            stack[length] = code
            length += 1
        times_out[n] = t
        codes_out[n] = code
        n += 1
    return n, length, t, False


@njit(cache=True, nogil=True)
def replay_tips(codes, d):
    """Tip id of every visited state ``Z_0 .. Z_N`` (``-1`` at the root)."""
    n = codes.shape[0]
    stack = np.empty(n + 1, dtype=np.int16)
    tips = np.empty(n + 1, dtype=np.int16)
    length = 0
    tips[0] = -1
    for i in range(n):
        c = codes[i]
        if c < 0:
            length -= 1
        else:
            stack[length] = c
            length += 1
        tips[i + 1] = stack[length - 1] if length > 0 else -1
    return tips


@njit(cache=True, nogil=True)
def replay_counts_at(codes, d, n_applied):
    """Monomer counts after applying the first ``n_applied[s]`` events.

    ``n_applied`` must be non-decreasing.
    """
    n_samples = n_applied.shape[0]
    out = np.zeros((n_samples, d), dtype=np.int64)
    counts = np.zeros(d, dtype=np.int64)
    stack = np.empty(codes.shape[0] + 1, dtype=np.int16)
    length = 0
    i = 0
    for s in range(n_samples):
        stop = n_applied[s]
        while i < stop:
            c = codes[i]
            if c < 0:
                length -= 1
                counts[stack[length]] -= 1
            else:
                stack[length] = c
                length += 1
                counts[c] += 1
            i += 1
        for j in range(d):
            out[s, j] = counts[j]
    return out


@njit(cache=True, nogil=True)
def replay_stack(codes, n_applied):
    """Polymer content after applying the first ``n_applied`` events."""
    stack = np.empty(n_applied + 1, dtype=np.int16)
    length = 0
    for i in range(n_applied):
        c = codes[i]
        if c < 0:
            length -= 1
        else:
            stack[length] = c
            length += 1
    return stack[:length].copy()


@njit(cache=True, nogil=True)
def last_exit_indices(lengths, max_level):
    """``e[k]`` = last index ``n`` with ``lengths[n] == k`` (``-1`` if never)."""
    e = np.full(max_level + 1, -1, dtype=np.int64)
    for n in range(lengths.shape[0] - 1, -1, -1):
        k = lengths[n]
        if e[k] < 0:
            e[k] = n
    return e


@njit(cache=True, nogil=True)
def prefix_violations(codes, lengths, e, tips):
    """Count violations of the boundary invariants over ``levels 0 .. K``.

    Checked: ``e`` strictly increasing, ``|Z_{e_k}| = k``, the chain stays
    above level ``k`` after ``e_k``, and at ``e_{k+1}`` the monomer in
    position ``k`` still equals the level-``k`` boundary tip. Together these
    give the prefix property by induction on ``k``.
    """
    n_states = lengths.shape[0]
    K = e.shape[0] - 1
    bad = 0
    for k in range(K + 1):
        if lengths[e[k]] != k:
            bad += 1
        if k > 0 and e[k] <= e[k - 1]:
            bad += 1
    # suffix minimum of lengths strictly after each index
    suffix_min = np.empty(n_states, dtype=np.int64)
    running = np.iinfo(np.int64).max
    for n in range(n_states - 1, -1, -1):
        suffix_min[n] = running
        if lengths[n] < running:
            running = lengths[n]
    for k in range(K + 1):
        if e[k] < n_states - 1 and suffix_min[e[k]] <= k:
            bad += 1
    stack = np.empty(n_states, dtype=np.int16)
    length = 0
    k_next = 1
    for i in range(n_states):
        if i > 0:
            c = codes[i - 1]
            if c < 0:
                length -= 1
            else:
                stack[length] = c
                length += 1
        while k_next <= K and e[k_next] == i:
            if length != k_next or stack[k_next - 1] != tips[k_next]:
                bad += 1
            if k_next >= 2 and stack[k_next - 2] != tips[k_next - 1]:
                bad += 1
            k_next += 1
    return bad
