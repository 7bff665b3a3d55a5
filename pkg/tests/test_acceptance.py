"""End-to-end acceptance checks, one per criterion, each with its runtime budget.

Run under pytest for the usual report (a PASS/FAIL summary is appended at the end),
or directly with ``python tests/test_acceptance.py`` for just the summary lines.
"""
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from randcone import asymptotics as asy
from randcone import conegeom as cg
from randcone import experiments as ex
from randcone.bigcomb import (ConeIndex, binomial, ce_upper_bound, expected_faces, quotient_ce,
                              wendel_probability)

RESULTS: dict[int, tuple[bool, str]] = {}

# measured once at d in {100, ..., 400}: 1.1716, 1.4746, 1.0680, 1.0680
ENVELOPE_RATIO_PINS = {("half", "dt"): 1.18, ("half", "ce"): 1.48,
                       ("mid", "dt"): 1.07, ("mid", "ce"): 1.07}


def check(ok, msg, failures):
    if not ok:
        failures.append(msg)


def c1(failures):
    for N in range(2, 61):
        for d in range(1, N):
            tail = Fraction(sum(binomial(N - 1, i) for i in range(d)), 2 ** (N - 1))
            check(wendel_probability(d, N) == tail, f"P({d},{N}) != tail", failures)
    for d in range(1, 21):
        check(wendel_probability(d, 2 * d) == Fraction(1, 2), f"P({d},{2 * d}) != 1/2", failures)
    return "1 <= d < N <= 60 exact, P(d,2d) = 1/2 for d <= 20"


def c2(failures):
    count = 0
    for d in range(2, 13):
        for k in range(1, d):
            prev = quotient_ce(ConeIndex(d, d + 1, k))
            for N in range(d + 1, 60):
                cur = quotient_ce(ConeIndex(d, N + 1, k))
                check(cur < prev, f"not decreasing at ({d},{N},{k})", failures)
                prev = cur
                count += 1
    return f"{count} strict exact comparisons"


def c3(failures):
    count = 0
    for d in range(2, 11):
        for k in range(1, d):
            bound = ce_upper_bound(d, k)
            check(bound == Fraction(2**d - 2**k, 2**d - 1), f"bound formula ({d},{k})", failures)
            for N in range(d + 1, 31):
                q = quotient_ce(ConeIndex(d, N, k))
                check(q <= bound, f"bound violated at ({d},{N},{k})", failures)
                check((q == bound) == (N == d + 1), f"equality case wrong at ({d},{N},{k})", failures)
                count += 1
    return f"{count} triples, equality exactly at N = d+1"


def c4(failures):
    grid = np.linspace(0.02, 0.98, 50)
    worst = max(abs(asy.g_exponent_split(a, b) - asy.g_exponent(a, b)) for a in grid for b in grid)
    check(worst < 1e-12, f"max deviation {worst:.3e}", failures)
    return f"max |split - G| = {worst:.2e} on 50x50"


def c5(failures):
    count = 0
    for N in range(2, 61):
        for d in range(1, N + 1):
            p = wendel_probability(d, N)
            if 2 * d > N - 1:
                check(float(1 - p) <= asy.okamoto_upper_tail_bound(d, N), f"upper ({d},{N})", failures)
                count += 1
            if 2 * (d - 1) < N - 1:
                check(float(p) <= asy.okamoto_lower_tail_bound(d, N), f"lower ({d},{N})", failures)
                count += 1
    return f"{count} bound/tail pairs"


def c6(failures):
    idx = ex.make_sequence(ex.SequenceSpec("sqrt-window", 0.75, window=asy.WindowSpec(0.0)), 600)
    check((idx.d, idx.N, idx.k) == (600, 800, 400), f"sequence gave {idx}", failures)
    q = float(quotient_ce(ConeIndex(600, 800, 400)))
    check(abs(q - 0.5) < 1e-3, f"quotient_ce = {q}", failures)
    check(asy.window_limit_ce(2 / 3, 0.0) == 0.5, "Phi(0) != 1/2", failures)
    return f"quotient_ce(600,800,400) = {q:.6f}"


def c7(failures):
    below = ex.run_quotient_sweep(ex.SequenceSpec("fixed-ratio", 0.75, rho=0.5), range(30, 301, 30))
    ce = [r.quotient_ce for r in below]
    check(ce[-1] >= 0.98, f"rho=0.5: quotient_ce(300) = {ce[-1]}", failures)
    check(all(a < b for a, b in zip(ce, ce[1:])), "rho=0.5: sweep not increasing", failures)
    (above,) = ex.run_quotient_sweep(ex.SequenceSpec("fixed-ratio", 0.75, rho=0.7), [300])
    check(above.quotient_ce <= 0.02, f"rho=0.7: quotient_ce(300) = {above.quotient_ce:.6f} > 0.02",
          failures)
    return f"rho=0.5 -> {ce[-1]:.6f}, rho=0.7 -> {above.quotient_ce:.6f}"


def c8(failures):
    rho_s, rho_w = asy.rho_strong(0.8), asy.rho_weak(0.8)
    parts = []
    for name, rho in (("half", rho_s / 2), ("mid", (rho_s + rho_w) / 2)):
        rows = ex.run_difference_sweep(ex.SequenceSpec("fixed-ratio", 0.8, rho=rho), range(100, 401))
        last = rows[-1]
        if name == "half":
            check(last.diff_log_dt < math.log(1e-6), f"half: log diff {last.diff_log_dt}", failures)
        else:
            check(last.diff_log_dt > math.log(1e6), f"mid: log diff {last.diff_log_dt}", failures)
        for model in ("dt", "ce"):
            env = [getattr(r, f"envelope_{model}") for r in rows]
            check(all(e > 0 for e in env), f"{name}/{model}: non-positive envelope", failures)
            ratio = max(env) / min(env)
            pin = ENVELOPE_RATIO_PINS[name, model]
            check(ratio < pin, f"{name}/{model}: envelope ratio {ratio:.4f} >= {pin}", failures)
            parts.append(f"{name}/{model} {ratio:.4f}")
        parts.append(f"{name} log diff {last.diff_log_dt:.2f}")
    return ", ".join(parts)


def c9(failures):
    delta = 0.8
    rows = {}
    for d in range(200, 241):
        idx, rho_d = ex.oscillating_construction(delta, d)
        level = (1.5 if d % 2 == 0 else 0.5) * math.log(idx.N) / idx.N
        residual = asy.g_exponent(delta, rho_d) - level
        check(abs(residual) < 1e-12, f"residual {residual:.2e} at d={d}", failures)
        rows[d] = ex.evaluate_row(idx, ("dt", "ce"))
    for model in ("dt", "ce"):
        for d in range(200, 241, 2):
            here = getattr(rows[d], f"diff_log_{model}")
            for nb in (d - 1, d + 1):
                if nb in rows:
                    check(here > getattr(rows[nb], f"diff_log_{model}"),
                          f"{model}: d={d} not above d={nb}", failures)
    return "residuals < 1e-12, even d above both odd neighbours (dt and ce)"


def c10(failures):
    trials, parts = 100_000, []
    for d, N in ((2, 3), (3, 6), (1, 4)):
        est = cg.estimate_wendel(cg.SimulationConfig(d, N, trials, seed=2024))
        z = est.zscore(float(wendel_probability(d, N)))
        check(abs(z) <= 4, f"wendel({d},{N}) z = {z:.2f}", failures)
        parts.append(f"P({d},{N}) z={z:+.2f}")
    for d, N, k, model in ((2, 3, 1, "dt"), (4, 8, 2, "ce")):
        est = cg.estimate_faces(cg.SimulationConfig(d, N, trials, seed=2024, k=k), model)
        z = est.zscore(float(expected_faces(ConeIndex(d, N, k), model)))
        check(abs(z) <= 4, f"faces({d},{N},{k},{model}) z = {z:.2f}", failures)
        parts.append(f"f({d},{N},{k},{model}) z={z:+.2f}")
    for N in (3, 5):
        cfg = cg.SimulationConfig(2, N, trials, seed=2024, k=1)
        per_trial, _, _ = cg.simulate_face_counts(cfg, "ce")
        check(len(per_trial) == cfg.trials and set(per_trial.tolist()) == {2},
              f"d=2, N={N}: CE counts {sorted(set(per_trial.tolist()))}", failures)
    return ", ".join(parts)


def c11(failures):
    pairs = [(d, N) for d in (1, 2, 3) for N in range(d + 1, 7)]
    samples = faces = 0
    for t in range(1000):
        d, N = pairs[t % len(pairs)]
        s = cg.sample_points(d, N, 31337, trial=t)
        check(cg.covers_space(s) != cg.separable(s), f"duality fails at trial {t}", failures)
        for k in range(1, d):
            faces += 1
            check(cg.count_k_faces(s, k) == cg.count_k_faces_bruteforce(s, k),
                  f"face count mismatch at trial {t}, k={k}", failures)
        samples += 1
    return f"{samples} samples, {faces} face counts"


def c12(failures):
    bad = [n for n in range(1, 2001) if not 0 < asy.stirling_theta(n) < 1]
    check(not bad, f"theta out of (0,1) at n={bad[:5]}", failures)
    return "theta(n) in (0,1) for 1 <= n <= 2000"


CRITERIA = {
    1: ("exact Wendel values", c1, 1.0),
    2: ("CE quotient strictly decreasing in N", c2, 10.0),
    3: ("CE quotient upper bound", c3, 5.0),
    4: ("entropy split identity", c4, 1.0),
    5: ("exponential tail bounds dominate", c5, 2.0),
    6: ("critical-window value", c6, 5.0),
    7: ("off-threshold convergence", c7, 30.0),
    8: ("difference threshold and envelopes", c8, 60.0),
    9: ("oscillating construction", c9, 30.0),
    10: ("Monte Carlo vs exact", c10, 120.0),
    11: ("geometry oracle equivalence", c11, 60.0),
    12: ("Stirling factor range", c12, 30.0),
}


def evaluate(number):
    title, fn, budget = CRITERIA[number]
    failures: list[str] = []
    start = time.perf_counter()
    detail = fn(failures)
    elapsed = time.perf_counter() - start
    check(elapsed < budget, f"took {elapsed:.1f}s, budget {budget:.0f}s", failures)
    ok = not failures
    text = f"{detail} [{elapsed:.2f}s / {budget:.0f}s]"
    if failures:
        text += " FAILED: " + "; ".join(failures[:3])
    RESULTS[number] = (ok, f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {text}")
    return ok, RESULTS[number][1]


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, line = evaluate(number)
    print(line)
    assert ok, line


if __name__ == "__main__":
    outcomes = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line in outcomes:
        print(line)
    sys.exit(0 if all(ok for ok, _ in outcomes) else 1)
