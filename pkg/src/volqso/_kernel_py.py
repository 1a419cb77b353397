"""Pure-Python trajectory kernel.

This is the reference implementation: `_kernel.pyx` repeats it operation for
operation (same arithmetic, same order) so both backends produce bit-identical
results.  Keep the two in sync.

All state lives in log coordinates.  The step factor 1 + (Ax)_k is evaluated
as sum_i (1 + a[k][i]) x_i, a sum of nonnegative terms; when that sum
underflows doubles the same sum is taken in the log domain.  Without this a
coordinate pinned near a vertex would be rounded to an exact zero and the
cycling dynamics would collapse onto a face.
"""

from __future__ import annotations

import math

UNDERFLOW_GUARD = 1e-280   # direct factor below this -> log-domain sum
DRIFT_TOL = 1e-6           # |logsumexp| allowed per normalization
EXP_OVERFLOW = 709.782712893384  # log of the largest double

_INF = float("inf")
_NAN = float("nan")


def run(m, a, logx0, steps, log_eps, coord_obs, mono_obs, checkpoints,
        stride, want_phi):
    """Iterate the Volterra map for `steps` steps from log point `logx0`.

    a: m x m skew matrix (list of lists); coord_obs: 0-based coordinate
    indices averaged along the run; mono_obs: exponent vectors (length m)
    whose monomials are averaged and traced; checkpoints: ascending iterate
    counts at which running means are recorded; stride: trace subsampling;
    want_phi: track the shrinkage observable (m == 4 only).

    Returns a dict of plain Python lists; see kernel.run_trajectory_kernel.
    """
    exp = math.exp
    log = math.log
    isnan = math.isnan

    weights = [[1.0 + a[k][i] for i in range(m)] for k in range(m)]
    logw = [[log(w) if w > 0.0 else -_INF for w in row] for row in weights]

    logx = [float(v) for v in logx0]
    n_obs = len(coord_obs) + len(mono_obs)
    sums = [0.0] * n_obs
    comps = [0.0] * n_obs
    n_mono = len(mono_obs)

    cp = list(checkpoints)
    cp_ptr = 0
    cesaro_rows = []

    trace_steps = []
    trace_logx = []
    trace_logphi = []
    trace_mono = []

    events = []          # (vertex0, entry, exit(-1 while open), lphi_entry, started_inside)
    cur_vertex = -1
    open_entry = -1
    open_lphi = _NAN
    open_started = 0
    prev_lphi = _NAN

    min_logphi = _INF if want_phi else _NAN
    max_drift = 0.0
    error = None

    xs = [0.0] * m
    newlog = [0.0] * m
    mono_vals = [0.0] * n_mono

    for k in range(steps + 1):
        # --- observe the current point z_k ---
        for i in range(m):
            xs[i] = exp(logx[i])

        for j in range(n_mono):
            lam = mono_obs[j]
            lf = 0.0
            for i in range(m):
                li = lam[i]
                if li != 0.0:
                    lf += li * logx[i]
            mono_vals[j] = lf

        if want_phi:
            p124 = logx[0] + logx[1] + logx[3]
            p134 = logx[0] + logx[2] + logx[3]
            lphi = p124 if p124 >= p134 else p134
            if lphi < min_logphi:
                min_logphi = lphi
        else:
            lphi = _NAN

        if k % stride == 0 or k == steps:
            trace_steps.append(k)
            trace_logx.append(logx[:])
            trace_logphi.append(lphi)
            trace_mono.append(mono_vals[:])

        cnt = 0
        v = -1
        for i in range(m):
            if logx[i] > log_eps:
                cnt += 1
                v = i
        inside = cnt == 1
        if cur_vertex < 0:
            if inside:
                cur_vertex = v
                open_entry = k
                open_lphi = lphi if k == 0 else prev_lphi
                open_started = 1 if k == 0 else 0
        else:
            if not inside:
                events.append((cur_vertex, open_entry, k, open_lphi,
                               open_started))
                cur_vertex = -1
            elif v != cur_vertex:
                events.append((cur_vertex, open_entry, k, open_lphi,
                               open_started))
                cur_vertex = v
                open_entry = k
                open_lphi = prev_lphi
                open_started = 0
        prev_lphi = lphi

        if k == steps:
            break

        # --- running means include z_k ---
        jo = 0
        for idx in coord_obs:
            f = xs[idx]
            t = sums[jo] + f
            if abs(sums[jo]) >= abs(f):
                comps[jo] += (sums[jo] - t) + f
            else:
                comps[jo] += (f - t) + sums[jo]
            sums[jo] = t
            jo += 1
        for j in range(n_mono):
            lf = mono_vals[j]
            if lf > EXP_OVERFLOW:
                f = _INF
            else:
                f = exp(lf)
            t = sums[jo] + f
            if abs(sums[jo]) >= abs(f):
                comps[jo] += (sums[jo] - t) + f
            else:
                comps[jo] += (f - t) + sums[jo]
            sums[jo] = t
            jo += 1

        n_done = k + 1
        if cp_ptr < len(cp) and cp[cp_ptr] == n_done:
            cesaro_rows.append(
                [(sums[j] + comps[j]) / n_done for j in range(n_obs)])
            cp_ptr += 1

        # --- one step ---
        for kk in range(m):
            wk = weights[kk]
            s = 0.0
            c = 0.0
            for i in range(m):
                t = wk[i] * xs[i]
                tmp = s + t
                if abs(s) >= abs(t):
                    c += (s - tmp) + t
                else:
                    c += (t - tmp) + s
                s = tmp
            g = s + c
            if g < UNDERFLOW_GUARD:
                lk = logw[kk]
                mx = -_INF
                for i in range(m):
                    t = lk[i] + logx[i]
                    if t > mx:
                        mx = t
                if mx == -_INF:
                    lg = -_INF
                else:
                    acc = 0.0
                    for i in range(m):
                        t = lk[i] + logx[i]
                        if t > -_INF:
                            acc += exp(t - mx)
                    lg = mx + log(acc)
            else:
                lg = log(g)
            newlog[kk] = logx[kk] + lg

        mx = newlog[0]
        for i in range(1, m):
            if newlog[i] > mx:
                mx = newlog[i]
        if mx == -_INF or isnan(mx):
            error = ("degenerate", k)
            break
        acc = 0.0
        for i in range(m):
            acc += exp(newlog[i] - mx)
        drift = mx + log(acc)
        if isnan(drift):
            error = ("degenerate", k)
            break
        adrift = abs(drift)
        if adrift > max_drift:
            max_drift = adrift
        if adrift > DRIFT_TOL:
            error = ("breakdown", k, drift)
            break
        for i in range(m):
            logx[i] = newlog[i] - drift

    if cur_vertex >= 0:
        events.append((cur_vertex, open_entry, -1, open_lphi, open_started))

    return {
        "checkpoints": cp[:cp_ptr],
        "cesaro": cesaro_rows,
        "events": events,
        "trace_steps": trace_steps,
        "trace_logx": trace_logx,
        "trace_logphi": trace_logphi,
        "trace_mono": trace_mono,
        "min_logphi": min_logphi,
        "final_logx": logx[:],
        "max_abs_drift": max_drift,
        "error": error,
    }
