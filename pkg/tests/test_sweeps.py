import math

import numpy as np
import pytest

from risemf.config import ScenarioConfig
from risemf.simulator import run
from risemf.sweeps import (SweepError, gain_db, mean_stderr, range_scene, sweep_arrival,
                           sweep_range, sweep_v, to_dbm, tune_v)


@pytest.fixture
def quick():
    return ScenarioConfig().with_overrides({"run.horizon": 300, "run.warmup": 30,
                                            "sweep.bisection_iterations": 6})


def test_helpers():
    assert mean_stderr([1.0, 3.0]) == (2.0, 1.0)
    assert mean_stderr([4.0]) == (4.0, 0.0)
    assert to_dbm(1e-3) == pytest.approx(0.0)
    assert to_dbm(0.0) == -math.inf and math.isnan(to_dbm(math.nan))
    assert gain_db(1.0, 10.0) == pytest.approx(10.0)
    assert math.isnan(gain_db(0.0, 1.0)) and math.isnan(gain_db(math.nan, 1.0))


def test_sweep_v_sorted_and_matches_single_runs(quick):
    pts = sweep_v(quick, [1e17, 1e14], seeds=[3, 4])
    assert [p.v for p in pts] == [1e14, 1e17]
    single = run(quick.with_overrides({"lyapunov.v": 1e17, "run.seed": 4}))
    assert pts[1].runs[1].avg_emfe == single.avg_emfe
    assert pts[1].runs[1].avg_delay == single.avg_delay
    # larger V trades delay for exposure
    assert pts[1].emfe[0] < pts[0].emfe[0]
    assert pts[1].delay[0] > pts[0].delay[0]


def test_empty_inputs_raise(quick):
    with pytest.raises(SweepError):
        sweep_v(quick, [1e15], seeds=[])
    with pytest.raises(SweepError):
        sweep_v(quick, [], seeds=[1])
    with pytest.raises(SweepError):
        tune_v(quick, 0.0, seeds=[1])
    with pytest.raises(SweepError):
        range_scene(quick, 0.0)
    with pytest.raises(SweepError):
        sweep_arrival(quick, arrival_rates=[0.0], policies=["boa_with_ris"], seeds=[1])


def test_range_scene_moves_local_geometry_rigidly():
    c = ScenarioConfig()
    moved = range_scene(c, 20.0)
    s0, s1 = c.scene, moved.scene
    assert s1.ap == s0.ap
    assert np.linalg.norm(np.subtract(s1.ue, s1.ap)) == pytest.approx(20.0)
    shift = np.subtract(s1.ue, s0.ue)
    assert np.allclose(np.subtract(s1.ris, s0.ris), shift)
    assert np.allclose(np.subtract(s1.pixels[0], s0.pixels[0]), shift)
    # the base scene is already at 50 m, so that distance is the identity
    assert range_scene(c, 50.0).scene == s0


def test_infeasible_delay_bound_gives_nan(quick):
    t = tune_v(quick, 1e-3, seeds=[1])
    assert not t.feasible and math.isnan(t.v_star)
    assert math.isnan(t.avg_emfe) and math.isnan(t.avg_delay)


def test_zero_weight_pixels_tune_to_v_max(quick):
    c = quick.with_overrides({"scene.pixel_weights": [0.0]})
    t = tune_v(c, 0.1, seeds=[1])
    assert t.feasible and t.v_star == c.sweep.v_max
    assert t.avg_emfe == 0.0


def test_tuned_delay_meets_bound(quick):
    t = tune_v(quick, 0.06, seeds=[1, 2])
    assert t.feasible
    assert t.point.stable
    assert t.avg_delay <= 0.06 * (1 + quick.sweep.delay_tolerance)
    assert quick.sweep.v_min <= t.v_star <= quick.sweep.v_max


def test_single_distance_matches_direct_tuning(quick):
    pts = sweep_range(quick, distances=[50.0], delay_bound=0.06, policies=["boa_with_ris"], seeds=[1])
    assert len(pts) == 1
    direct = tune_v(quick, 0.06, seeds=[1])
    assert pts[0].tuned.v_star == direct.v_star
    assert pts[0].avg_emfe == direct.avg_emfe


def test_single_rate_matches_direct_tuning_and_fills_gain(quick):
    pts = sweep_arrival(quick, arrival_rates=[5e7], delay_bound=0.06,
                        policies=["boa_with_ris", "boa_no_ris"], seeds=[1])
    assert [p.policy for p in pts] == ["boa_with_ris", "boa_no_ris"]
    cfg = quick.with_overrides({"service.mean_arrival_rate": 5e7})
    direct = tune_v(cfg, 0.06, seeds=[1])
    assert pts[0].avg_emfe == direct.avg_emfe
    assert pts[0].gain_db_vs_no_ris == pts[1].gain_db_vs_no_ris == gain_db(pts[0].avg_emfe, pts[1].avg_emfe)
    assert pts[0].gain_db_vs_no_ris > 0


def test_parallel_workers_match_serial(quick):
    a = sweep_v(quick, [1e16], seeds=[1, 2], workers=1)
    b = sweep_v(quick, [1e16], seeds=[1, 2], workers=2)
    assert [r.avg_emfe for r in a[0].runs] == [r.avg_emfe for r in b[0].runs]
