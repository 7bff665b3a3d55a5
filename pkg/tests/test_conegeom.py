import math
from itertools import combinations

import numpy as np
import pytest

from randcone import conegeom as cg
from randcone.bigcomb import ConeIndex, expected_faces, wendel_probability


def vs(points):
    return cg.VectorSample(np.array(points, dtype=float))


# --- sampling ----------------------------------------------------------------

def test_sampling_is_deterministic():
    a = cg.sample_points(3, 7, 42)
    b = cg.sample_points(3, 7, 42)
    assert a.points.tobytes() == b.points.tobytes()
    c = cg.sample_points(3, 7, 42, trial=5)
    assert c.points.tobytes() == cg.sample_points(3, 7, 42, trial=5).points.tobytes()
    assert c.points.tobytes() != a.points.tobytes()


def test_sampling_moments():
    x = cg.sample_points(1, 100_000, 2024).points.ravel()
    assert abs(x.mean()) < 4 / math.sqrt(1e5)
    assert abs(x.var() - 1) < 0.05


def test_sample_is_read_only():
    s = cg.sample_points(2, 3, 0)
    with pytest.raises(ValueError):
        s.points[0, 0] = 1.0


# --- LP predicates -------------------------------------------------------------

def test_covers_space_on_a_line():
    assert cg.covers_space(vs([[1.0], [-1.0]]))
    assert not cg.covers_space(vs([[1.0], [2.0], [3.0]]))


def test_covers_space_flags_boundary_origin():
    with pytest.raises(cg.DegenerateGeometryError):
        cg.covers_space(vs([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(cg.DegenerateGeometryError):
        cg.covers_space(vs([[1.0, 1.0], [-1.0, -1.0], [2.0, 2.0]]))


def test_is_face_examples():
    quadrant = vs([[1.0, 0.0], [0.0, 1.0]])
    assert cg.is_face(quadrant, [0])
    assert cg.is_face(quadrant, [1])
    s = vs([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert not cg.is_face(s, [2])
    assert cg.is_face(s, [0]) and cg.is_face(s, [1])


def test_is_face_rejects_bad_subsets():
    s = vs([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(cg.DegenerateGeometryError):
        cg.is_face(s, [0, 2])
    with pytest.raises(ValueError):
        cg.is_face(s, [0, 1, 3])
    with pytest.raises(ValueError):
        cg.is_face(s, [7])


def test_duality_covering_vs_separation():
    for t in range(150):
        s = cg.sample_points(2 + t % 2, 3 + t % 4, 11, trial=t)
        assert cg.covers_space(s) != cg.separable(s)


# --- fast route --------------------------------------------------------------

def test_count_planar_pointed_is_two():
    hits = 0
    for t in range(200):
        s = cg.sample_points(2, 6, 3, trial=t)
        if cg.covers_space(s):
            assert cg.count_k_faces(s, 1) == 0
        else:
            assert cg.count_k_faces(s, 1) == 2
            hits += 1
    assert hits > 0


def test_count_covering_is_zero():
    s = vs([[1.0, 0.1], [-1.0, 0.2], [0.1, 1.0], [0.2, -1.0]])
    assert cg.covers_space(s)
    assert cg.count_k_faces(s, 1) == 0


def test_count_matches_bruteforce_d3_n5():
    full = 0
    for t in range(120):
        s = cg.sample_points(3, 5, 99, trial=t)
        for k in (1, 2):
            n = cg.count_k_faces(s, k)
            assert n == cg.count_k_faces_bruteforce(s, k)
            assert n <= math.comb(5, k)
            full += k == 2 and n == 10
    # a pointed 3-cone on 5 generators has at most 5 facets, so never 2-neighborly
    assert full == 0


def test_face_lattice_downward_closed():
    for t in range(40):
        d, N = 3 + t % 2, 5 + t % 3
        s = cg.sample_points(d, N, 5, trial=t)
        if cg.covers_space(s):
            continue
        for k in range(2, d):
            for sub in combinations(range(N), k):
                if cg.is_face(s, sub):
                    for smaller in combinations(sub, k - 1):
                        assert cg.is_face(s, smaller)


def test_fast_covers_agrees_with_lp():
    for t in range(200):
        d = 1 + t % 4
        s = cg.sample_points(d, d + 1 + t % 4, 17, trial=t)
        assert cg.fast_covers(s) == cg.covers_space(s)


def test_filter_falls_back_to_exact_arithmetic(monkeypatch):
    e = 2.0**-52
    # det(x0, x1) = -e^2, but the float product (1+e)(1-e) rounds to exactly 1
    x0, x1 = [1.0 + e, 1.0], [1.0, 1.0 - e]
    pts = np.array([x0, x1, [-1.0, 0.5]])
    calls = []
    exact_det = cg._exact_det
    monkeypatch.setattr(cg, "_exact_det", lambda rows: calls.append(rows) or exact_det(rows))
    facets, degenerate = cg.facet_table(pts[None])
    assert calls and exact_det(calls[0]) != 0
    assert not degenerate[0]
    s = vs(pts)
    assert cg.fast_covers(s) == cg.covers_space(s)
    for k in (1,):
        assert cg.count_k_faces(s, k) == cg.count_k_faces_bruteforce(s, k)


def test_exactly_dependent_points_flagged():
    pts = np.array([[1.0, 2.0], [2.0, 4.0], [-1.0, 0.5]])
    facets, degenerate = cg.facet_table(pts[None])
    assert degenerate[0] and not facets[0].any()
    with pytest.raises(cg.DegenerateGeometryError):
        cg.count_k_faces(vs(pts), 1)


def test_high_dimension_uses_exact_path():
    # d - 1 > 5 minors skip the float filter entirely
    for t in range(3):
        s = cg.sample_points(7, 9, 1, trial=t)
        assert cg.fast_covers(s) == cg.covers_space(s)


def test_fewer_points_than_dimension():
    s = cg.sample_points(4, 3, 0)
    assert cg.count_k_faces(s, 2) == 3


def test_subset_cap():
    s = cg.sample_points(12, 40, 0)
    with pytest.raises(cg.SubsetCapExceeded):
        cg.count_k_faces(s, 6)


# --- estimators --------------------------------------------------------------

@pytest.mark.parametrize("d,N", [(2, 3), (3, 6), (1, 4), (3, 7)])
def test_estimate_wendel_within_four_sigma(d, N):
    est = cg.estimate_wendel(cg.SimulationConfig(d, N, 5000, seed=3))
    exact = float(wendel_probability(d, N))
    assert abs(est.mean - exact) <= 4 * est.stderr
    assert est.trials == 5000 and est.degenerate == 0


def test_estimate_faces_dt_and_ce():
    est = cg.estimate_faces(cg.SimulationConfig(2, 3, 4000, seed=8, k=1), "dt")
    assert abs(est.mean - 1.5) <= 4 * est.stderr
    est = cg.estimate_faces(cg.SimulationConfig(2, 3, 2000, seed=8, k=1), "ce")
    assert est.mean == 2.0 and est.stderr == 0.0 and est.trials == 2000
    assert est.rejected > 0
    cfg = cg.SimulationConfig(4, 8, 3000, seed=8, k=2)
    est = cg.estimate_faces(cfg, "ce")
    exact = float(expected_faces(ConeIndex(4, 8, 2), "ce"))
    assert abs(est.mean - exact) <= 4 * est.stderr


def test_estimates_reproducible_and_thread_independent():
    a = cg.estimate_faces(cg.SimulationConfig(3, 6, 3000, seed=12, k=1), "ce")
    b = cg.estimate_faces(cg.SimulationConfig(3, 6, 3000, seed=12, k=1), "ce")
    c = cg.estimate_faces(cg.SimulationConfig(3, 6, 3000, seed=12, k=1, threads=3), "ce")
    assert a == b == c
    w1 = cg.estimate_wendel(cg.SimulationConfig(3, 5, 9000, seed=1))
    w2 = cg.estimate_wendel(cg.SimulationConfig(3, 5, 9000, seed=1, threads=4))
    assert w1 == w2


def test_trial_replay_matches_estimator_stream():
    cfg = cg.SimulationConfig(3, 6, 50, seed=4)
    batch = cg.run_trials(cfg, 0, 50)
    for t in range(50):
        s = cg.sample_points(3, 6, 4, trial=t)
        assert batch.covers[t] == cg.covers_space(s)


def test_audit_runs():
    cfg = cg.SimulationConfig(3, 6, 200, seed=4, audit_fraction=0.1)
    assert cg.run_trials(cfg, 0, 200).audited == 20


def test_low_acceptance_fails_loudly():
    cfg = cg.SimulationConfig(3, 30, 100, seed=0, k=1)
    with pytest.raises(cg.LowAcceptanceError) as info:
        cg.estimate_faces(cfg, "ce")
    assert info.value.estimate.rejected >= 1000


def test_config_validation():
    with pytest.raises(ValueError):
        cg.SimulationConfig(3, 6, 0)
    with pytest.raises(ValueError):
        cg.SimulationConfig(3, 6, 10, seed=-1)
    with pytest.raises(ValueError):
        cg.SimulationConfig(3, 6, 10, k=3)
    with pytest.raises(ValueError):
        cg.SimulationConfig(3, 6, 10, distribution="cauchy")


def test_estimate_zscore():
    est = cg.Estimate(2.0, 0.0, 10)
    assert est.zscore(2.0) == 0.0
    assert cg.Estimate(1.1, 0.05, 10).zscore(1.0) == pytest.approx(2.0)
