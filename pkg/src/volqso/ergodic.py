"""Long-horizon trajectory runs and ergodicity diagnostics.

A single pass over the orbit accumulates running (Cesaro) means of the
requested observables with compensated summation, watches entries/exits of
the vertex neighbourhoods U_v(eps) = {x_i <= eps for all i != v}, and traces
the shrinkage observable phi and any monomials.  Everything downstream
(verdicts, escape bounds, route and growth checks, outside-time fractions)
is computed from the returned records.

Dyadic checkpoints are the default: the oscillation of running means in the
non-ergodic regime lives on exponentially growing time scales, so powers of
two expose it at logarithmic storage cost.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from . import kernel
from .classify import CanonicalParams
from .errors import (
    DegenerateFactor,
    EpsilonTooLarge,
    NumericalBreakdown,
    TooFewCheckpoints,
    TooFewSojourns,
    ValidationError,
    WrongDimension,
)
from .qso import SkewMatrix
from .simplex import LogSimplexPoint, SimplexPoint

DELTA_CONV = 1e-3   # trailing oscillation below this: converged at scale
DELTA_OSC = 5e-2    # trailing oscillation above this: oscillating at scale

_INF = float("inf")


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class CoordinateObservable:
    """Coordinate x_label (1-based) as a trajectory observable."""

    label: int

    @property
    def name(self) -> str:
        return f"x{self.label}"


@dataclass(frozen=True)
class MonomialObservable:
    """prod x_i^lam_i as a trajectory observable; traced in log scale."""

    exponents: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "exponents", tuple(float(v) for v in self.exponents))


def coordinate_observables(m: int) -> tuple[CoordinateObservable, ...]:
    return tuple(CoordinateObservable(i + 1) for i in range(m))


# ---------------------------------------------------------------------------
# configuration and results


def dyadic_checkpoints(steps: int) -> tuple[int, ...]:
    """Powers of two up to `steps`, plus `steps` itself."""
    out = []
    n = 1
    while n <= steps:
        out.append(n)
        n *= 2
    if not out or out[-1] != steps:
        out.append(steps)
    return tuple(out)


@dataclass(frozen=True)
class TrajectoryConfig:
    matrix: SkewMatrix
    start: SimplexPoint | LogSimplexPoint
    steps: int
    epsilon: float = 0.05
    checkpoints: tuple[int, ...] | None = None   # None -> dyadic
    record_stride: int = 1000
    seed: int | None = None

    def __post_init__(self):
        if self.matrix.m != self.start.m:
            raise WrongDimension(
                f"matrix m={self.matrix.m}, start m={self.start.m}")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if not 0.0 < self.epsilon < 0.25:
            # eps < 1/4 keeps the four vertex neighbourhoods disjoint
            raise ValidationError(f"epsilon {self.epsilon} outside (0, 1/4)")
        if self.record_stride < 1:
            raise ValidationError("record_stride must be >= 1")
        if self.checkpoints is not None:
            cps = tuple(int(n) for n in self.checkpoints)
            if any(b <= a for a, b in zip(cps, cps[1:])) or not cps:
                raise ValidationError("checkpoints must be ascending")
            if cps[0] < 1 or cps[-1] > self.steps:
                raise ValidationError("checkpoints outside [1, steps]")
            object.__setattr__(self, "checkpoints", cps)

    @property
    def m(self) -> int:
        return self.matrix.m

    def effective_checkpoints(self) -> tuple[int, ...]:
        if self.checkpoints is not None:
            return self.checkpoints
        return dyadic_checkpoints(self.steps)


@dataclass(frozen=True)
class CesaroSeries:
    """Running means c_n = (1/n) sum_{k<n} f(V^k x) at checkpoint n's."""

    function_id: str
    checkpoints: tuple[tuple[int, float], ...]

    @property
    def ns(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.checkpoints)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.checkpoints)


@dataclass(frozen=True)
class SojournEvent:
    """Maximal run of consecutive iterates inside one vertex neighbourhood.

    entry_step is the first iterate inside, exit_step the first iterate
    outside again (None while still inside at the end of the run).  length
    counts from the last point outside before entry to the first point
    outside after: exit_step - entry_step + 1.  log_phi_entry is log(phi) at
    the pre-entry point (NaN for m=3 or when the run starts inside).
    """

    vertex: int                 # 1-based vertex label
    entry_step: int
    exit_step: int | None
    log_phi_entry: float
    started_inside: bool

    @property
    def censored(self) -> bool:
        return self.exit_step is None

    @property
    def length(self) -> int | None:
        if self.exit_step is None:
            return None
        return self.exit_step - self.entry_step + 1

    @property
    def phi_entry(self) -> float:
        if math.isnan(self.log_phi_entry):
            return float("nan")
        return math.exp(self.log_phi_entry)


@dataclass(frozen=True)
class SojournTable:
    events: tuple[SojournEvent, ...]
    total_steps: int
    epsilon: float
    m: int

    def route(self) -> tuple[int, ...]:
        return tuple(e.vertex for e in self.events)

    def lengths_at(self, vertex: int) -> tuple[int, ...]:
        return tuple(e.length for e in self.events
                     if e.vertex == vertex and not e.censored)

    def events_at(self, vertex: int) -> tuple[SojournEvent, ...]:
        return tuple(e for e in self.events if e.vertex == vertex)

    def inside_count(self, window_start: int, window_end: int) -> int:
        """Number of iterate indices in [window_start, window_end) spent
        inside some vertex neighbourhood."""
        total = 0
        for e in self.events:
            hi = self.total_steps + 1 if e.exit_step is None else e.exit_step
            lo = max(e.entry_step, window_start)
            hi = min(hi, window_end)
            if hi > lo:
                total += hi - lo
        return total


class Verdict(Enum):
    CONVERGED_AT_SCALE = "converged_at_scale"
    OSCILLATING_AT_SCALE = "oscillating_at_scale"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ErgodicVerdict:
    oscillation: tuple[tuple[str, float], ...]   # per observable, max-min
    verdict: Verdict
    scale: int

    def oscillation_of(self, function_id: str) -> float:
        for name, v in self.oscillation:
            if name == function_id:
                return v
        raise KeyError(function_id)

    @property
    def max_oscillation(self) -> float:
        return max(v for _, v in self.oscillation)


@dataclass(frozen=True)
class TrajectoryResult:
    m: int
    steps: int
    epsilon: float
    observable_names: tuple[str, ...]
    cesaro: tuple[CesaroSeries, ...]
    sojourn: SojournTable
    trace_steps: tuple[int, ...]
    trace_log_coords: tuple[tuple[float, ...], ...]
    trace_log_phi: tuple[float, ...]
    monomial_traces: tuple[tuple[str, tuple[float, ...]], ...]
    min_log_phi: float
    final: LogSimplexPoint
    max_abs_drift: float
    backend: str

    def cesaro_by_id(self, function_id: str) -> CesaroSeries:
        for s in self.cesaro:
            if s.function_id == function_id:
                return s
        raise KeyError(function_id)

    def monomial_trace(self, name: str) -> tuple[float, ...]:
        for n, tr in self.monomial_traces:
            if n == name:
                return tr
        raise KeyError(name)


# ---------------------------------------------------------------------------
# the run


def run_trajectory(cfg: TrajectoryConfig, observables=None) -> TrajectoryResult:
    """Iterate the operator for cfg.steps steps (always in log space) and
    collect running means, sojourn events and traces in one pass."""
    m = cfg.m
    if observables is None:
        observables = coordinate_observables(m)
    coord_obs = []
    mono_obs = []
    names = []
    mono_names = []
    for obs in observables:
        if isinstance(obs, CoordinateObservable):
            if not 1 <= obs.label <= m:
                raise WrongDimension(f"coordinate label {obs.label} for m={m}")
            coord_obs.append(obs.label - 1)
            names.append(obs.name)
        elif isinstance(obs, MonomialObservable):
            if len(obs.exponents) != m:
                raise WrongDimension(
                    f"{len(obs.exponents)} exponents for m={m}")
            mono_obs.append(list(obs.exponents))
            mono_names.append(obs.name or f"F{len(mono_names) + 1}")
        else:
            raise ValidationError(f"unknown observable {obs!r}")
    names = names + mono_names
    if len(set(names)) != len(names):
        raise ValidationError(f"observable names collide: {names}")

    start = cfg.start
    if isinstance(start, SimplexPoint):
        start = start.to_log()
    want_phi = m == 4
    checkpoints = cfg.effective_checkpoints()

    raw = kernel.run(
        m,
        [list(row) for row in cfg.matrix.rows],
        list(start.log_coords),
        cfg.steps,
        math.log(cfg.epsilon),
        coord_obs,
        mono_obs,
        list(checkpoints),
        cfg.record_stride,
        want_phi,
    )

    err = raw["error"]
    if err is not None:
        if err[0] == "breakdown":
            raise NumericalBreakdown(
                f"normalization drift {err[2]:.3e} at step {err[1]}")
        raise DegenerateFactor(f"invalid step factor at step {err[1]}")

    series = tuple(
        CesaroSeries(
            function_id=names[j],
            checkpoints=tuple(
                (int(n), row[j])
                for n, row in zip(raw["checkpoints"], raw["cesaro"])
            ),
        )
        for j in range(len(names))
    )

    events = tuple(
        SojournEvent(
            vertex=v + 1,
            entry_step=int(entry),
            exit_step=None if exit_ < 0 else int(exit_),
            log_phi_entry=lphi,
            started_inside=bool(started),
        )
        for v, entry, exit_, lphi, started in raw["events"]
    )
    table = SojournTable(events=events, total_steps=cfg.steps,
                         epsilon=cfg.epsilon, m=m)

    mono_traces = tuple(
        (mono_names[j],
         tuple(row[j] for row in raw["trace_mono"]))
        for j in range(len(mono_names))
    )

    return TrajectoryResult(
        m=m,
        steps=cfg.steps,
        epsilon=cfg.epsilon,
        observable_names=tuple(names),
        cesaro=series,
        sojourn=table,
        trace_steps=tuple(int(s) for s in raw["trace_steps"]),
        trace_log_coords=tuple(tuple(row) for row in raw["trace_logx"]),
        trace_log_phi=tuple(raw["trace_logphi"]),
        monomial_traces=mono_traces,
        min_log_phi=raw["min_logphi"],
        final=LogSimplexPoint(tuple(raw["final_logx"])),
        max_abs_drift=raw["max_abs_drift"],
        backend=kernel.BACKEND,
    )


def run_ensemble(configs, observables=None, workers: int = 1):
    """Run independent trajectories, optionally on worker threads; results
    come back in input order regardless of scheduling."""
    if workers <= 1 or len(configs) <= 1:
        return [run_trajectory(cfg, observables) for cfg in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run_trajectory(c, observables),
                             configs))


# ---------------------------------------------------------------------------
# diagnostics


def ergodic_verdict(series_list, delta_conv: float = DELTA_CONV,
                    delta_osc: float = DELTA_OSC) -> ErgodicVerdict:
    """Three-way verdict from the oscillation (max - min) of each running
    mean over the trailing half of its checkpoints."""
    if delta_conv >= delta_osc:
        raise ValidationError("delta_conv must be below delta_osc")
    series_list = list(series_list)
    if not series_list:
        raise ValidationError("no series to judge")
    osc = []
    scale = 0
    for s in series_list:
        vals = s.values
        if len(vals) < 8:
            raise TooFewCheckpoints(
                f"{s.function_id}: {len(vals)} checkpoints, need >= 8")
        tail = vals[len(vals) // 2:]
        osc.append((s.function_id, max(tail) - min(tail)))
        scale = max(scale, s.ns[-1])
    worst = max(v for _, v in osc)
    if worst > delta_osc:
        verdict = Verdict.OSCILLATING_AT_SCALE
    elif worst < delta_conv:
        verdict = Verdict.CONVERGED_AT_SCALE
    else:
        verdict = Verdict.INCONCLUSIVE
    return ErgodicVerdict(oscillation=tuple(osc), verdict=verdict, scale=scale)


def c_abs(params) -> float:
    """max of 1/(1-a12), 1/(1-max(a13,a23)), 1/(1-max(a24,a34)): the factor
    by which the small coordinates at a pre-entry point can exceed eps."""
    p = params if isinstance(params, CanonicalParams) \
        else CanonicalParams(*params)
    for v in p.as_tuple():
        if not 0.0 < v < 1.0:
            raise ValidationError(
                f"canonical parameter {v} outside (0, 1)")
    return max(
        1.0 / (1.0 - p.a12),
        1.0 / (1.0 - max(p.a13, p.a23)),
        1.0 / (1.0 - max(p.a24, p.a34)),
    )


def escape_bound(params, epsilon: float, phi_at_entry: float | None = None,
                 *, log_phi_at_entry: float | None = None) -> float:
    """Lower bound on the length of a sojourn at vertex 1:
    log2(eps^2 (1 - 3 C eps) / phi), clamped at 0.

    phi is the shrinkage observable at the pre-entry point; pass it as
    log_phi_at_entry when it underflows linear doubles.
    """
    cabs = c_abs(params)
    margin = 1.0 - 3.0 * cabs * epsilon
    if margin <= 0.0:
        raise EpsilonTooLarge(
            f"epsilon {epsilon} too large: 1 - 3*C*eps = {margin}")
    if log_phi_at_entry is None:
        if phi_at_entry is None:
            raise ValidationError("need phi_at_entry or log_phi_at_entry")
        if phi_at_entry <= 0.0:
            raise ValidationError(f"phi_at_entry {phi_at_entry} must be > 0")
        log_phi_at_entry = math.log(phi_at_entry)
    n = (2.0 * math.log(epsilon) + math.log(margin) - log_phi_at_entry) \
        / math.log(2.0)
    return max(0.0, n)


# Admissible neighbourhood-to-neighbourhood moves in canonical orientation:
# the three closed routes 1-4-3-2, 1-4-2 and 1-4-3.
ADMISSIBLE_TRANSITIONS = frozenset(
    {(1, 4), (4, 3), (4, 2), (3, 2), (3, 1), (2, 1)})


def route_check(table_or_route) -> bool:
    """True iff the visited-vertex sequence only uses admissible transitions
    and contains at least two returns to vertex 1 (two completed cycles)."""
    if isinstance(table_or_route, SojournTable):
        route = table_or_route.route()
    else:
        route = tuple(int(v) for v in table_or_route)
    if any(t not in ADMISSIBLE_TRANSITIONS for t in zip(route, route[1:])):
        return False
    cycles = sum(1 for v in route[1:] if v == 1)
    return cycles >= 2


def sojourn_growth(table_or_lengths, vertex: int = 1,
                   max_violation_rate: float = 0.1) -> bool:
    """True iff completed sojourn lengths at `vertex` are nondecreasing from
    the second sojourn on, allowing max_violation_rate violations per sojourn
    (a finite-run surrogate for lengths diverging)."""
    if isinstance(table_or_lengths, SojournTable):
        lengths = table_or_lengths.lengths_at(vertex)
    else:
        lengths = tuple(int(v) for v in table_or_lengths)
    if len(lengths) < 3:
        raise TooFewSojourns(f"{len(lengths)} sojourns, need >= 3")
    violations = sum(
        1 for a, b in zip(lengths[1:], lengths[2:]) if b < a)
    allowed = int(len(lengths) * max_violation_rate)
    return violations <= allowed


def decade_windows(total_steps: int) -> tuple[tuple[int, int], ...]:
    """[0,10), [10,100), ... covering the step indices 0..total_steps-1."""
    out = []
    lo = 0
    hi = 10
    while lo < total_steps:
        out.append((lo, min(hi, total_steps)))
        lo = hi
        hi *= 10
    return tuple(out)


def outside_fraction_trend(table: SojournTable, windows=None):
    """Fraction of iterates outside every vertex neighbourhood, per window."""
    if windows is None:
        windows = decade_windows(table.total_steps)
    out = []
    for ws, we in windows:
        size = we - ws
        if size <= 0:
            continue
        inside = table.inside_count(ws, we)
        out.append(((ws, we), (size - inside) / size))
    return out


# ---------------------------------------------------------------------------
# CSV emission (headers documented in docs/formats.md)


def _fmt(v) -> str:
    return repr(float(v))


def write_trajectory_csv(path, result: TrajectoryResult) -> None:
    """step,x1..xm: linear coordinates at the trace steps (exact zeros and
    underflowed values print as 0.0; the log scale lives in phi.csv)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step"] + [f"x{i + 1}" for i in range(result.m)])
        for step, logs in zip(result.trace_steps, result.trace_log_coords):
            w.writerow([step] + [_fmt(math.exp(v)) for v in logs])


def write_cesaro_csv(path, result: TrajectoryResult) -> None:
    """n, then one running-mean column per observable."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n"] + list(result.observable_names))
        if not result.cesaro:
            return
        ns = result.cesaro[0].ns
        cols = [s.values for s in result.cesaro]
        for i, n in enumerate(ns):
            w.writerow([n] + [_fmt(col[i]) for col in cols])


def write_sojourn_csv(path, result: TrajectoryResult) -> None:
    """One row per sojourn event; censored rows (still inside at the end of
    the run) carry exit_step = length = -1."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "entry_step", "exit_step", "length",
                    "censored", "started_inside", "log_phi_entry",
                    "phi_entry"])
        for e in result.sojourn.events:
            w.writerow([
                e.vertex,
                e.entry_step,
                -1 if e.censored else e.exit_step,
                -1 if e.censored else e.length,
                int(e.censored),
                int(e.started_inside),
                _fmt(e.log_phi_entry),
                _fmt(e.phi_entry),
            ])


def write_phi_csv(path, result: TrajectoryResult) -> None:
    """step, phi, log_phi, then one log column per monomial observable."""
    mono_names = [name for name, _ in result.monomial_traces]
    mono_cols = [tr for _, tr in result.monomial_traces]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "phi", "log_phi"]
                   + [f"log_{n}" for n in mono_names])
        for i, step in enumerate(result.trace_steps):
            lp = result.trace_log_phi[i]
            phi_lin = math.exp(lp) if lp <= 0.0 else float("nan")
            row = [step, _fmt(phi_lin), _fmt(lp)]
            row += [_fmt(col[i]) for col in mono_cols]
            w.writerow(row)


def write_outside_csv(path, result: TrajectoryResult, windows=None) -> None:
    """window_start,window_end,outside_fraction per (decade) window."""
    trend = outside_fraction_trend(result.sojourn, windows)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window_start", "window_end", "outside_fraction"])
        for (ws, we), frac in trend:
            w.writerow([ws, we, _fmt(frac)])
