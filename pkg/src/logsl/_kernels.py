"""Hot loops: the pointwise nonlinear substep and the small-divisor enumeration.

Each kernel exists twice, a numba version (``*_numba``) and a vectorized numpy
version (``*_numpy``).  The unsuffixed name is bound to one of them according to
``LOGSL_DISABLE_NUMBA`` (see :mod:`logsl._accel`).  Both versions are public so
that tests and the benchmark can compare them directly.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# pointwise nonlinear substep
# ---------------------------------------------------------------------------
#
# For every grid value v = r e^{i phi} (phi principal) this applies, in order,
#   phi <- phi - c1 * log(r^2)         (logarithmic flow over time tau1, c1 = lambda*tau1)
#   phi <- wrap(phi) * decay           (phase damping, decay = exp(-mu*tau))
#   phi <- phi - c2 * log(r^2)         (second logarithmic flow, Strang)
# and returns r e^{i phi}.  The modulus is never modified.
#
# Besides the new values the kernels return the smallest input modulus and the
# largest |phase| seen by the damping stage (for the branch-cut diagnostic).


def _wrap_numpy(phi):
    # into (-pi, pi]
    q = phi - TWO_PI * np.floor((phi + math.pi) / TWO_PI)
    return np.where(q <= -math.pi, q + TWO_PI, q)


def nonlinear_substep_numpy(values, c1, decay, c2):
    r2 = values.real * values.real + values.imag * values.imag
    min_mod = math.sqrt(float(r2.min())) if r2.size else math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        logr2 = np.log(r2)
    phi = np.arctan2(values.imag, values.real)
    if c1 != 0.0:
        phi = _wrap_numpy(phi - c1 * logr2)
    max_phase = 0.0
    if decay != 1.0:
        max_phase = float(np.abs(phi).max()) if phi.size else 0.0
        phi = phi * decay
    if c2 != 0.0:
        phi = phi - c2 * logr2
    out = np.sqrt(r2) * np.exp(1j * phi)
    return out, min_mod, max_phase


@njit(cache=True)
def nonlinear_substep_numba(values, c1, decay, c2):
    n = values.size
    out = np.empty(n, dtype=np.complex128)
    min_mod = np.inf
    max_phase = 0.0
    for i in range(n):
        re = values[i].real
        im = values[i].imag
        r2 = re * re + im * im
        r = math.sqrt(r2)
        if r < min_mod:
            min_mod = r
        phi = math.atan2(im, re)
        if r2 > 0.0:
            logr2 = math.log(r2)
        else:
            logr2 = -np.inf
        if c1 != 0.0:
            phi = phi - c1 * logr2
            phi = phi - TWO_PI * math.floor((phi + math.pi) / TWO_PI)
            if phi <= -math.pi:
                phi += TWO_PI
        if decay != 1.0:
            a = abs(phi)
            if a > max_phase:
                max_phase = a
            phi = phi * decay
        if c2 != 0.0:
            phi = phi - c2 * logr2
        out[i] = complex(r * math.cos(phi), r * math.sin(phi))
    return out, min_mod, max_phase


# ---------------------------------------------------------------------------
# small-divisor enumeration
# ---------------------------------------------------------------------------
#
# Input is a table of all sorted index multisets of sizes 0..r, grouped by size:
#   sums[k]   = Omega_{i_1} + ... + Omega_{i_p}, accumulated left to right
#   top3[k]   = three largest indices of the multiset, descending, zero padded
#   offsets   = start of each size block, offsets[p]..offsets[p+1]
# A divisor is sums[a] - sums[b] for a in block p, b in block q, 1 <= p+q <= r.
# Two multisets are equal iff they are the same table row, so "cancels" is a == b.
#
# Output arrays are indexed by mu3 (third-largest index of the union, at least 1).


@njit(cache=True)
def divisor_scan_numba(sums, top3, offsets, r, n_max, guard):
    min_abs = np.full(n_max + 1, np.inf)
    arg_a = np.full(n_max + 1, -1, dtype=np.int64)
    arg_b = np.full(n_max + 1, -1, dtype=np.int64)
    count = np.zeros(n_max + 1, dtype=np.int64)
    n_cancel = 0
    cancel_max = 0.0
    n_zero = 0
    n_guard = 0
    for p in range(r + 1):
        for q in range(r + 1 - p):
            if p + q == 0:
                continue
            for a in range(offsets[p], offsets[p + 1]):
                sa = sums[a]
                for b in range(offsets[q], offsets[q + 1]):
                    value = sa - sums[b]
                    if a == b:
                        n_cancel += 1
                        if abs(value) > cancel_max:
                            cancel_max = abs(value)
                        continue
                    # third largest of the six candidates
                    x1 = 0
                    x2 = 0
                    x3 = 0
                    for s in range(6):
                        if s < 3:
                            v = top3[a, s]
                        else:
                            v = top3[b, s - 3]
                        if v > x1:
                            x3 = x2
                            x2 = x1
                            x1 = v
                        elif v > x2:
                            x3 = x2
                            x2 = v
                        elif v > x3:
                            x3 = v
                    mu3 = x3 if x3 > 0 else 1
                    av = abs(value)
                    count[mu3] += 1
                    if av == 0.0:
                        n_zero += 1
                    if av <= guard:
                        n_guard += 1
                    if av < min_abs[mu3]:
                        min_abs[mu3] = av
                        arg_a[mu3] = a
                        arg_b[mu3] = b
    return min_abs, arg_a, arg_b, count, n_cancel, cancel_max, n_zero, n_guard


def divisor_scan_numpy(sums, top3, offsets, r, n_max, guard, chunk=2048):
    min_abs = np.full(n_max + 1, np.inf)
    arg_a = np.full(n_max + 1, -1, dtype=np.int64)
    arg_b = np.full(n_max + 1, -1, dtype=np.int64)
    count = np.zeros(n_max + 1, dtype=np.int64)
    n_cancel = 0
    cancel_max = 0.0
    n_zero = 0
    n_guard = 0
    for p in range(r + 1):
        for q in range(r + 1 - p):
            if p + q == 0:
                continue
            b_ids = np.arange(offsets[q], offsets[q + 1])
            sb = sums[b_ids]
            tb = top3[b_ids]
            for start in range(offsets[p], offsets[p + 1], chunk):
                a_ids = np.arange(start, min(start + chunk, offsets[p + 1]))
                value = sums[a_ids][:, None] - sb[None, :]
                same = a_ids[:, None] == b_ids[None, :]
                if same.any():
                    n_cancel += int(same.sum())
                    cancel_max = max(cancel_max, float(np.abs(value[same]).max()))
                both = np.concatenate(
                    [
                        np.broadcast_to(top3[a_ids][:, None, :], (a_ids.size, b_ids.size, 3)),
                        np.broadcast_to(tb[None, :, :], (a_ids.size, b_ids.size, 3)),
                    ],
                    axis=2,
                )
                mu3 = np.maximum(np.sort(both, axis=2)[:, :, -3], 1)
                keep = ~same
                av = np.abs(value)[keep]
                m3 = mu3[keep]
                ia = np.broadcast_to(a_ids[:, None], value.shape)[keep]
                ib = np.broadcast_to(b_ids[None, :], value.shape)[keep]
                if av.size == 0:
                    continue
                n_zero += int((av == 0.0).sum())
                n_guard += int((av <= guard).sum())
                count += np.bincount(m3, minlength=n_max + 1)
                # first occurrence of the minimum within each mu3 bucket, in
                # enumeration order, to match the sequential kernel's tie rule
                order = np.lexsort((np.arange(av.size), av, m3))
                m_sorted = m3[order]
                first = np.ones(order.size, dtype=bool)
                first[1:] = m_sorted[1:] != m_sorted[:-1]
                for idx in order[first]:
                    bucket = m3[idx]
                    if av[idx] < min_abs[bucket]:
                        min_abs[bucket] = av[idx]
                        arg_a[bucket] = ia[idx]
                        arg_b[bucket] = ib[idx]
    return min_abs, arg_a, arg_b, count, n_cancel, cancel_max, n_zero, n_guard


if USE_NUMBA:
    nonlinear_substep = nonlinear_substep_numba
    divisor_scan = divisor_scan_numba
else:
    nonlinear_substep = nonlinear_substep_numpy
    divisor_scan = divisor_scan_numpy
