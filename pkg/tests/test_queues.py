import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import fifo_sojourns
from risemf.queues import (QueueState, ServiceConfig, UndefinedDelayError, e2e_delay, step,
                           step_local, step_remote)

# tau = 0.5 s and J = 1 cycle/bit keep every example in exact binary arithmetic
CFG = ServiceConfig(slot_duration=0.5, cycles_per_bit=1.0, mean_arrival_rate=10.0, packet_bits=1.0)


def test_step_local_examples():
    assert step_local(QueueState(10, 0), 8.0, 2.0, CFG) == (8.0, 4.0)
    assert step_local(QueueState(3, 0), 20.0, 5.0, CFG) == (5.0, 3.0)
    assert step_local(QueueState(7, 1), 0.0, 2.5, CFG) == (9.5, 0.0)


def test_step_remote_examples():
    assert step_remote(QueueState(0, 6), 1.0, 4.0, CFG) == 5.0
    assert step_remote(QueueState(0, 1), 0.0, 18.0, CFG) == 0.0


def test_three_slot_hand_trace():
    # slot 0: local 0 + 6 arrive; nothing to send. remote 0.
    # slot 1: send min(6, 0.5*8=4) = 4; arrivals 1 -> local 3; remote 0 + 4, cpu drains nothing yet.
    # slot 2: send min(3, 0.5*2=1) = 1; arrivals 0 -> local 2; remote max(0, 4 - 0.5*6) + 1 = 2.
    s = QueueState(0, 0)
    script = [(8.0, 6.0, 10.0), (8.0, 1.0, 2.0), (2.0, 0.0, 6.0)]
    expected = [((6.0, 0.0), 0.0, 0.0), ((3.0, 4.0), 4.0, 0.0), ((2.0, 2.0), 1.0, 3.0)]
    for (rate, arr, cpu), (state, tx, done) in zip(script, expected):
        s, transmitted, processed = step(s, rate, arr, cpu, CFG)
        assert (s.local_bits, s.remote_bits) == state
        assert transmitted == tx and processed == done


def test_e2e_delay_examples():
    cfg = ServiceConfig(slot_duration=0.01)
    assert e2e_delay(50, 50, 100, cfg) == pytest.approx(0.01)
    assert e2e_delay(0, 0, 100, cfg) == 0.0
    with pytest.raises(UndefinedDelayError):
        e2e_delay(5, 5, 0.0, cfg)


def test_state_and_config_validation():
    with pytest.raises(ValueError):
        QueueState(-1, 0)
    with pytest.raises(ValueError):
        ServiceConfig(slot_duration=0)
    with pytest.raises(ValueError):
        ServiceConfig(mean_arrival_rate=-1)
    with pytest.raises(ValueError):
        step_local(QueueState(1, 1), -1.0, 0.0, CFG)
    with pytest.raises(ValueError):
        step_remote(QueueState(1, 1), 0.0, -1.0, CFG)


slot = st.tuples(st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 1e3))


@given(st.floats(0, 1e3), st.floats(0, 1e3), st.lists(slot, min_size=1, max_size=60))
def test_conservation_and_non_negativity(l0, r0, slots):
    s = QueueState(l0, r0)
    arrived = transmitted = processed = 0.0
    for rate, arr, cpu in slots:
        prev = s
        s, tx, done = step(prev, rate, arr, cpu, CFG)
        assert s.local_bits >= 0 and s.remote_bits >= 0
        assert tx <= prev.local_bits and done <= prev.remote_bits
        # per-slot identities hold exactly up to float rounding of the subtraction
        assert s.local_bits == pytest.approx(prev.local_bits - tx + arr, abs=1e-9)
        assert s.remote_bits == pytest.approx(prev.remote_bits - done + tx, abs=1e-9)
        arrived, transmitted, processed = arrived + arr, transmitted + tx, processed + done
    assert l0 + r0 + arrived - processed == pytest.approx(s.total, abs=1e-6)


def test_arrival_draws():
    cfg = ServiceConfig()
    a = cfg.draw_arrivals(np.random.default_rng(0), 20000)
    assert a.min() >= 0 and a.max() <= cfg.arrival_max
    assert np.all(np.mod(a, cfg.packet_bits) == 0)
    assert a.mean() == pytest.approx(cfg.mean_arrival_rate * cfg.slot_duration, rel=0.01)
    c = cfg.draw_cpu(np.random.default_rng(1), 20000)
    assert c.min() >= 0 and c.max() <= cfg.cpu_max
    # mean service is service_margin times the mean arrivals
    mean_service = c.mean() * cfg.slot_duration / cfg.cycles_per_bit
    assert mean_service == pytest.approx(cfg.service_margin * cfg.mean_arrival_rate * cfg.slot_duration, rel=0.02)


def test_cpu_override_and_zero_arrivals():
    cfg = ServiceConfig(mean_arrival_rate=0.0, cpu_max_override=5.0)
    assert cfg.cpu_max == 5.0
    assert cfg.arrival_max == 0.0
    assert not cfg.draw_arrivals(np.random.default_rng(0), 10).any()


def test_single_queue_littles_law_matches_fifo():
    # remote server only: bits go straight to an M/D/1-like edge queue
    rng = np.random.default_rng(5)
    cfg = ServiceConfig(slot_duration=1.0, cycles_per_bit=1.0, mean_arrival_rate=100.0, packet_bits=1.0)
    T = 100_000
    arrivals = rng.poisson(100.0, T).astype(float)
    s = QueueState(0, 0)
    trace = {k: np.zeros(T) for k in ("local_bits", "remote_bits", "arrivals", "transmitted", "processed")}
    for t in range(T):
        trace["local_bits"][t], trace["remote_bits"][t] = s.local_bits, s.remote_bits
        nxt, tx, done = step(s, math.inf, arrivals[t], 125.0, cfg)
        trace["arrivals"][t], trace["transmitted"][t], trace["processed"][t] = arrivals[t], tx, done
        s = nxt
    little = e2e_delay(trace["local_bits"].mean(), trace["remote_bits"].mean(), arrivals.mean(), cfg)
    sojourn, mismatch = fifo_sojourns(trace)
    assert mismatch < 1e-6
    assert little == pytest.approx(sojourn, rel=0.05)
