"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Long-horizon criteria share session fixtures; with the compiled
kernel the whole suite takes well under a minute.
"""

import json
import math
import time

import numpy as np
import pytest

from volqso.classify import VolterraClass, classify
from volqso.cli import main as cli_main
from volqso.ergodic import (
    TrajectoryConfig,
    Verdict,
    c_abs,
    ergodic_verdict,
    escape_bound,
    outside_fraction_trend,
    route_check,
    run_trajectory,
    sojourn_growth,
)
from volqso.fixed_points import StabilityType, face_fixed_point
from volqso.lyapunov import (
    synthesize,
    verify_along_trajectory,
    vertex_constraint_values,
    DecayVerdict,
)
from volqso.qso import (
    apply_qso,
    apply_volterra,
    raw_volterra_image,
    skew3,
    to_skew_matrix,
    to_tensor,
)
from volqso.sampling import (
    interior_points,
    random_canonical_matrix,
    random_skew_matrix,
)
from volqso.simplex import FaceId, validate


def report(num: int, ok: bool, desc: str, detail: str = "") -> None:
    line = f"ACCEPTANCE {num:>2}: {'PASS' if ok else 'FAIL'} - {desc}"
    if detail:
        line += f" [{detail}]"
    print(line)
    assert ok, line


@pytest.fixture(scope="session")
def run_1e6(all_half, generic_start4):
    cfg = TrajectoryConfig(all_half, generic_start4, 10 ** 6, epsilon=0.05,
                           record_stride=10 ** 4)
    return run_trajectory(cfg)


def test_criterion_01_simplex_invariance(rng):
    t0 = time.perf_counter()
    worst_pre = 0.0
    worst_post = 0.0
    n_each = 50_000
    for m in (3, 4):
        for _ in range(n_each):
            a = random_skew_matrix(m, rng)
            raw = rng.random(m)
            x = validate(raw / raw.sum())
            image = raw_volterra_image(a, x)
            worst_pre = max(worst_pre, abs(math.fsum(image) - 1.0))
            out = apply_volterra(a, x)          # constructor checks >= 0
            worst_post = max(worst_post, abs(math.fsum(out.coords) - 1.0))
            validate(out.coords)
    elapsed = time.perf_counter() - t0
    ok = worst_pre <= 1e-14 and worst_post <= 1e-12 and elapsed < 5.0
    report(1, ok, "simplex invariance on 1e5 random (A, x)",
           f"pre-renorm sum err {worst_pre:.2e}, post {worst_post:.2e}, "
           f"{elapsed:.2f}s")


def test_criterion_02_tensor_matrix_tautology(rng):
    worst = 0.0
    worst_rt = 0.0
    for _ in range(10_000):
        m = int(rng.integers(3, 5))
        a = random_skew_matrix(m, rng)
        t = to_tensor(a)
        raw = rng.random(m)
        x = validate(raw / raw.sum())
        left = apply_qso(t, x)
        right = apply_volterra(a, x)
        worst = max(worst, max(abs(u - v) for u, v in
                               zip(left.coords, right.coords)))
        back = to_skew_matrix(t)
        worst_rt = max(worst_rt, max(abs(u - v)
                                     for r1, r2 in zip(a.rows, back.rows)
                                     for u, v in zip(r1, r2)))
    ok = worst <= 1e-12 and worst_rt <= 1e-15
    report(2, ok, "tensor<->matrix tautology and round-trip on 1e4 pairs",
           f"tautology err {worst:.2e}, round-trip err {worst_rt:.2e}")


def test_criterion_03_fixed_point_oracle(all_half):
    rep = classify(all_half)
    third = 1.0 / 3.0
    r134 = face_fixed_point(all_half, FaceId((1, 3, 4)))
    r124 = face_fixed_point(all_half, FaceId((1, 2, 4)))
    checks = [
        max(abs(u - v) for u, v in zip(r134.point.coords,
                                       (third, 0.0, third, third))) <= 1e-10,
        max(abs(u - v) for u, v in zip(r124.point.coords,
                                       (third, third, 0.0, third))) <= 1e-10,
        abs(r134.multiplier_at(2) - 7.0 / 6.0) <= 1e-10,
        abs(r124.multiplier_at(3) - 5.0 / 6.0) <= 1e-10,
        r134.stability == StabilityType.REPELLING,
        r124.stability == StabilityType.SADDLE,
        abs(rep.invariant - 0.25) <= 1e-15,
    ]
    report(3, all(checks), "all-0.5 fixed-point oracle",
           f"multipliers {r134.multiplier_at(2):.12f}/"
           f"{r124.multiplier_at(3):.12f}, I={rep.invariant}")


def test_criterion_04_three_species_sign_discrimination():
    start = validate((0.6, 0.2, 0.2))
    steps = 2 ** 22
    outcomes = {}
    t0 = time.perf_counter()
    for abc in ((1.0, 1.0, 1.0), (0.5, 0.5, 0.5), (0.5, -0.5, 0.5)):
        cfg = TrajectoryConfig(skew3(*abc), start, steps, epsilon=0.05,
                               record_stride=steps // 512)
        res = run_trajectory(cfg)
        outcomes[abc] = ergodic_verdict(res.cesaro)
    elapsed = time.perf_counter() - t0
    v111 = outcomes[(1.0, 1.0, 1.0)]
    v555 = outcomes[(0.5, 0.5, 0.5)]
    vmix = outcomes[(0.5, -0.5, 0.5)]
    ok = (v111.verdict == Verdict.OSCILLATING_AT_SCALE
          and v111.max_oscillation > 0.05
          and v555.verdict == Verdict.OSCILLATING_AT_SCALE
          and v555.max_oscillation > 0.05
          and vmix.verdict == Verdict.CONVERGED_AT_SCALE
          and vmix.max_oscillation < 1e-3)
    report(4, ok, "same-sign m=3 parameters oscillate, mixed signs converge "
           "(2^22 steps)",
           f"osc {v111.max_oscillation:.3f}/{v555.max_oscillation:.3f}, "
           f"conv {vmix.max_oscillation:.2e}, {elapsed:.0f}s")


def test_criterion_05_shrinkage_sample():
    rng = np.random.default_rng(20260809)
    threshold = math.log(1e-6)
    worst = -math.inf
    runs = 0
    for _ in range(20):
        a = random_canonical_matrix(rng, low=0.1, high=0.9)
        for start in interior_points(4, 5, rng):
            cfg = TrajectoryConfig(a, start, 10 ** 5, epsilon=0.05,
                                   record_stride=10 ** 5)
            res = run_trajectory(cfg, observables=[])
            worst = max(worst, res.min_log_phi)
            runs += 1
    ok = runs == 100 and worst <= threshold
    report(5, ok, "phi <= 1e-6 by n=1e5 on 20 random operators x 5 starts",
           f"worst min log phi {worst:.1f} vs {threshold:.1f}")


def test_criterion_06_nonergodic_vs_dominant(all_half, dominant_row_matrix,
                                             generic_start4):
    steps = 2 ** 22
    cfg_a = TrajectoryConfig(all_half, generic_start4, steps, epsilon=0.05,
                             record_stride=steps // 512)
    v_a = ergodic_verdict(run_trajectory(cfg_a).cesaro)
    cfg_c = TrajectoryConfig(dominant_row_matrix, generic_start4, steps,
                             epsilon=0.05, record_stride=steps // 512)
    v_c = ergodic_verdict(run_trajectory(cfg_c).cesaro)
    ok = (v_a.verdict == Verdict.OSCILLATING_AT_SCALE
          and v_c.verdict == Verdict.CONVERGED_AT_SCALE)
    report(6, ok, "cyclic operator oscillates, dominant-row operator "
           "converges (2^22 steps)",
           f"osc {v_a.max_oscillation:.3f}, conv {v_c.max_oscillation:.2e}")


def test_criterion_07_escape_bound(run_1e6, all_half):
    params = classify(all_half).canonical_params
    violations = 0
    checked = 0
    for e in run_1e6.sojourn.events_at(1):
        if e.censored or e.started_inside:
            continue
        bound = escape_bound(params, run_1e6.epsilon,
                             log_phi_at_entry=e.log_phi_entry)
        checked += 1
        if e.length < bound:
            violations += 1
    ok = c_abs(params) == 2.0 and checked >= 5 and violations == 0
    report(7, ok, "every vertex-1 sojourn respects the escape-time bound "
           "(1e6 steps, eps=0.05, C_abs=2)",
           f"{checked} sojourns, {violations} violations")


def test_criterion_08_sojourn_growth_and_outside_time(run_1e6):
    growth = sojourn_growth(run_1e6.sojourn, vertex=1,
                            max_violation_rate=0.1)
    trend = outside_fraction_trend(run_1e6.sojourn)
    fractions = [f for _, f in trend]
    decreasing = all(b <= a for a, b in zip(fractions, fractions[1:]))
    final_small = fractions[-1] < 0.05
    route_ok = route_check(run_1e6.sojourn)
    ok = growth and decreasing and final_small and route_ok
    report(8, ok, "sojourn growth, vanishing outside time, admissible routes",
           f"fractions {['%.4f' % f for f in fractions]}, route "
           f"{run_1e6.sojourn.route()[:8]}...")


def test_criterion_09_lyapunov_pipeline(all_half, generic_start4):
    cand = synthesize(all_half)
    hand = vertex_constraint_values(all_half, (1.0, 1.0, 0.5, 1.5))
    expected = (
        math.log(0.5) + 0.5 * math.log(0.5) + 1.5 * math.log(1.5),
        math.log(1.5) + 0.5 * math.log(0.5) + 1.5 * math.log(0.5),
        math.log(1.5) + math.log(1.5) + 1.5 * math.log(0.5),
        math.log(0.5) + math.log(1.5) + 0.5 * math.log(1.5),
    )
    hand_ok = all(abs(g - r) <= 1e-9 and g < 0.0
                  for g, r in zip(hand, expected))
    verify = verify_along_trajectory(cand, all_half, generic_start4,
                                     steps=100_000)
    decays = (verify.verdict == DecayVerdict.DECAYING
              and all(d < 0 for _, _, d in verify.decade_drifts))
    ok = cand is not None and cand.margin > 0.0 and hand_ok and decays
    report(9, ok, "synthesis feasible, hand-checked vertex logs, monomial "
           "decays along trajectory",
           f"margin {cand.margin:.4f}, drifts "
           f"{['%.0f' % d for _, _, d in verify.decade_drifts]}")


def test_criterion_10_solver_completeness():
    rng = np.random.default_rng(97)
    axes = np.round(np.arange(-10, 11) * 0.1, 1)
    grid = np.array(np.meshgrid(*[axes] * 4, indexing="ij")).reshape(4, -1).T
    checked = grid_feasible_count = misses = 0
    while checked < 100:
        a = random_skew_matrix(4, rng)
        if classify(a).volterra_class != VolterraClass.CYCLIC:
            continue
        if any(abs(v) >= 1.0 for row in a.rows for v in row):
            continue
        checked += 1
        lg = np.array([[math.log1p(a.rows[i][j]) for j in range(4)]
                       for i in range(4)])
        grid_feasible = bool(((grid @ lg).max(axis=1) < 0.0).any())
        cand = synthesize(a)
        if grid_feasible:
            grid_feasible_count += 1
            if cand is None:
                misses += 1
    ok = checked == 100 and misses == 0
    report(10, ok, "synthesize covers every grid-feasible operator "
           "(100 random class-3)",
           f"{grid_feasible_count} grid-feasible, {misses} missed")


def test_criterion_11_byte_determinism(tmp_path):
    base = {
        "matrix": [[0, 0.5, 0.5, -0.5], [-0.5, 0, 0.5, 0.5],
                   [-0.5, -0.5, 0, 0.5], [0.5, -0.5, -0.5, 0]],
        "starts": {"points": [[0.4, 0.3, 0.2, 0.1]], "count": 3, "seed": 7},
        "steps": 30_000,
        "record_stride": 1000,
    }

    def run(cfg_payload, name):
        cfg_path = tmp_path / f"{name}.json"
        cfg_path.write_text(json.dumps(cfg_payload))
        out = tmp_path / name
        assert cli_main(["simulate", "--config", str(cfg_path),
                         "--out", str(out)]) == 0
        return {
            str(p.relative_to(out)): p.read_bytes()
            for p in sorted(out.rglob("*")) if p.is_file()
        }

    first = run(dict(base, workers=1), "first")
    second = run(dict(base, workers=1), "second")
    eight = run(dict(base, workers=8), "eight")
    ok = first == second and first == eight
    report(11, ok, "simulate output byte-identical across runs and across "
           "1 vs 8 worker threads",
           f"{len(first)} files compared")
