# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernel.

Line-for-line mirror of `_kernel_py.run` (same arithmetic, same operation
order, same libm calls) so the two backends produce bit-identical output.
Keep the two in sync; `tests/test_kernel_parity.py` enforces it.

Built with -ffp-contract=off: fused multiply-adds would change results.
"""

from libc.math cimport exp, log, fabs
from libc.stdlib cimport free, malloc, realloc

cdef double _INF = float("inf")
cdef double _NAN = float("nan")

cdef double UNDERFLOW_GUARD = 1e-280
cdef double DRIFT_TOL = 1e-6
cdef double EXP_OVERFLOW = 709.782712893384

cdef struct Event:
    int vertex
    long long entry
    long long exit
    double lphi_entry
    int started_inside


def run(int m, a, logx0, long long steps, double log_eps, coord_obs,
        mono_obs, checkpoints, long long stride, bint want_phi):
    """Same contract as volqso._kernel_py.run."""
    cdef double[4][4] weights
    cdef double[4][4] logw
    cdef double[4] logx
    cdef double[4] xs
    cdef double[4] newlog
    cdef int i, kk, jv, cnt, v
    cdef long long k, n_done
    cdef double w, s, c, t, tmp, g, lg, mx, acc, drift, adrift
    cdef double lphi, p124, p134, lf, li, f, prev_lphi
    cdef double min_logphi, max_drift, open_lphi

    for kk in range(m):
        for i in range(m):
            w = 1.0 + <double> a[kk][i]
            weights[kk][i] = w
            logw[kk][i] = log(w) if w > 0.0 else -_INF
    for i in range(m):
        logx[i] = <double> logx0[i]

    cdef int n_coord = len(coord_obs)
    cdef int n_mono = len(mono_obs)
    cdef int n_obs = n_coord + n_mono
    cdef int jo, j

    cdef int* cidx = <int*> malloc(sizeof(int) * max(n_coord, 1))
    cdef double* mono = <double*> malloc(sizeof(double) * max(n_mono * m, 1))
    cdef double* mono_vals = <double*> malloc(sizeof(double) * max(n_mono, 1))
    cdef double* sums = <double*> malloc(sizeof(double) * max(n_obs, 1))
    cdef double* comps = <double*> malloc(sizeof(double) * max(n_obs, 1))
    for j in range(n_coord):
        cidx[j] = <int> coord_obs[j]
    for j in range(n_mono):
        for i in range(m):
            mono[j * m + i] = <double> mono_obs[j][i]
    for j in range(n_obs):
        sums[j] = 0.0
        comps[j] = 0.0

    cdef int n_cp = len(checkpoints)
    cdef long long* cps = <long long*> malloc(sizeof(long long) * max(n_cp, 1))
    for j in range(n_cp):
        cps[j] = <long long> checkpoints[j]
    cdef int cp_ptr = 0
    cdef double* cesaro = <double*> malloc(sizeof(double) * max(n_cp * n_obs, 1))

    cdef long long n_trace = steps // stride + 1
    if steps % stride != 0:
        n_trace += 1
    cdef long long tr = 0
    cdef long long* tr_steps = <long long*> malloc(sizeof(long long) * n_trace)
    cdef double* tr_logx = <double*> malloc(sizeof(double) * n_trace * m)
    cdef double* tr_logphi = <double*> malloc(sizeof(double) * n_trace)
    cdef double* tr_mono = <double*> malloc(
        sizeof(double) * max(n_trace * n_mono, 1))

    cdef long long ev_cap = 1024
    cdef long long n_ev = 0
    cdef Event* events = <Event*> malloc(sizeof(Event) * ev_cap)
    cdef Event* grown
    cdef int cur_vertex = -1
    cdef long long open_entry = -1
    cdef int open_started = 0

    cdef int error_kind = 0            # 0 none, 1 degenerate, 2 breakdown
    cdef long long error_step = -1
    cdef double error_drift = 0.0
    cdef bint oom = False

    if (cidx == NULL or mono == NULL or mono_vals == NULL or sums == NULL
            or comps == NULL or cps == NULL or cesaro == NULL
            or tr_steps == NULL or tr_logx == NULL or tr_logphi == NULL
            or tr_mono == NULL or events == NULL):
        oom = True

    prev_lphi = _NAN
    open_lphi = _NAN
    min_logphi = _INF if want_phi else _NAN
    max_drift = 0.0

    if not oom:
        with nogil:
            for k in range(steps + 1):
                for i in range(m):
                    xs[i] = exp(logx[i])

                for j in range(n_mono):
                    lf = 0.0
                    for i in range(m):
                        li = mono[j * m + i]
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
                    tr_steps[tr] = k
                    for i in range(m):
                        tr_logx[tr * m + i] = logx[i]
                    tr_logphi[tr] = lphi
                    for j in range(n_mono):
                        tr_mono[tr * n_mono + j] = mono_vals[j]
                    tr += 1

                cnt = 0
                v = -1
                for i in range(m):
                    if logx[i] > log_eps:
                        cnt += 1
                        v = i
                if cur_vertex < 0:
                    if cnt == 1:
                        cur_vertex = v
                        open_entry = k
                        open_lphi = lphi if k == 0 else prev_lphi
                        open_started = 1 if k == 0 else 0
                else:
                    if cnt != 1:
                        if n_ev == ev_cap:
                            ev_cap *= 2
                            grown = <Event*> realloc(
                                events, sizeof(Event) * ev_cap)
                            if grown == NULL:
                                oom = True
                                break
                            events = grown
                        events[n_ev].vertex = cur_vertex
                        events[n_ev].entry = open_entry
                        events[n_ev].exit = k
                        events[n_ev].lphi_entry = open_lphi
                        events[n_ev].started_inside = open_started
                        n_ev += 1
                        cur_vertex = -1
                    elif v != cur_vertex:
                        if n_ev == ev_cap:
                            ev_cap *= 2
                            grown = <Event*> realloc(
                                events, sizeof(Event) * ev_cap)
                            if grown == NULL:
                                oom = True
                                break
                            events = grown
                        events[n_ev].vertex = cur_vertex
                        events[n_ev].entry = open_entry
                        events[n_ev].exit = k
                        events[n_ev].lphi_entry = open_lphi
                        events[n_ev].started_inside = open_started
                        n_ev += 1
                        cur_vertex = v
                        open_entry = k
                        open_lphi = prev_lphi
                        open_started = 0
                prev_lphi = lphi

                if k == steps:
                    break

                jo = 0
                for j in range(n_coord):
                    f = xs[cidx[j]]
                    t = sums[jo] + f
                    if fabs(sums[jo]) >= fabs(f):
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
                    if fabs(sums[jo]) >= fabs(f):
                        comps[jo] += (sums[jo] - t) + f
                    else:
                        comps[jo] += (f - t) + sums[jo]
                    sums[jo] = t
                    jo += 1

                n_done = k + 1
                if cp_ptr < n_cp and cps[cp_ptr] == n_done:
                    for j in range(n_obs):
                        cesaro[cp_ptr * n_obs + j] = \
                            (sums[j] + comps[j]) / (<double> n_done)
                    cp_ptr += 1

                for kk in range(m):
                    s = 0.0
                    c = 0.0
                    for i in range(m):
                        t = weights[kk][i] * xs[i]
                        tmp = s + t
                        if fabs(s) >= fabs(t):
                            c += (s - tmp) + t
                        else:
                            c += (t - tmp) + s
                        s = tmp
                    g = s + c
                    if g < UNDERFLOW_GUARD:
                        mx = -_INF
                        for i in range(m):
                            t = logw[kk][i] + logx[i]
                            if t > mx:
                                mx = t
                        if mx == -_INF:
                            lg = -_INF
                        else:
                            acc = 0.0
                            for i in range(m):
                                t = logw[kk][i] + logx[i]
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
                if mx == -_INF or mx != mx:
                    error_kind = 1
                    error_step = k
                    break
                acc = 0.0
                for i in range(m):
                    acc += exp(newlog[i] - mx)
                drift = mx + log(acc)
                if drift != drift:
                    error_kind = 1
                    error_step = k
                    break
                adrift = fabs(drift)
                if adrift > max_drift:
                    max_drift = adrift
                if adrift > DRIFT_TOL:
                    error_kind = 2
                    error_step = k
                    error_drift = drift
                    break
                for i in range(m):
                    logx[i] = newlog[i] - drift

    result = None
    if not oom:
        if cur_vertex >= 0:
            if n_ev == ev_cap:
                ev_cap += 1
                grown = <Event*> realloc(events, sizeof(Event) * ev_cap)
                if grown == NULL:
                    oom = True
                else:
                    events = grown
            if not oom:
                events[n_ev].vertex = cur_vertex
                events[n_ev].entry = open_entry
                events[n_ev].exit = -1
                events[n_ev].lphi_entry = open_lphi
                events[n_ev].started_inside = open_started
                n_ev += 1

    if not oom:
        error = None
        if error_kind == 1:
            error = ("degenerate", error_step)
        elif error_kind == 2:
            error = ("breakdown", error_step, error_drift)
        result = {
            "checkpoints": [cps[j] for j in range(cp_ptr)],
            "cesaro": [
                [cesaro[r * n_obs + j] for j in range(n_obs)]
                for r in range(cp_ptr)
            ],
            "events": [
                (events[e].vertex, events[e].entry, events[e].exit,
                 events[e].lphi_entry, events[e].started_inside)
                for e in range(n_ev)
            ],
            "trace_steps": [tr_steps[r] for r in range(tr)],
            "trace_logx": [
                [tr_logx[r * m + i] for i in range(m)] for r in range(tr)
            ],
            "trace_logphi": [tr_logphi[r] for r in range(tr)],
            "trace_mono": [
                [tr_mono[r * n_mono + j] for j in range(n_mono)]
                for r in range(tr)
            ],
            "min_logphi": min_logphi,
            "final_logx": [logx[i] for i in range(m)],
            "max_abs_drift": max_drift,
            "error": error,
        }

    free(cidx)
    free(mono)
    free(mono_vals)
    free(sums)
    free(comps)
    free(cps)
    free(cesaro)
    free(tr_steps)
    free(tr_logx)
    free(tr_logphi)
    free(tr_mono)
    free(events)

    if oom:
        raise MemoryError("trajectory kernel allocation failed")
    return result
