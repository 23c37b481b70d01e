"""Slot loop: channels, decision, queue updates and long-term averages."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelGenerator, SlotChannels, compose_e2e
from .codebook import Codebooks, build_codebooks
from .config import ScenarioConfig
from .optimizer import (Decision, FixedBeams, LyapunovConfig, Policy, baseline_decision,
                        drift_bound_check, drift_constant)
from .queues import QueueState, ServiceConfig, e2e_delay, step
from .radio import PixelSet, RadioConfig, rate_from_gain

TRACE_FIELDS = ("local_bits", "remote_bits", "arrivals", "cpu", "transmitted", "processed",
                "rate", "power", "emfe", "precoder", "combiner", "ris", "slack")


class DriftBoundViolation(AssertionError):
    pass


@dataclass
class RunMetrics:
    """Post-warmup time averages of one run (SI units, EMFE in W/m^2)."""

    avg_emfe: float
    avg_local_bits: float
    avg_remote_bits: float
    avg_arrival_bits: float
    avg_delay: float
    avg_rate: float
    avg_power: float
    stable: bool
    min_drift_slack: float
    rate_max: float
    drift_constant: float
    seed: int
    v: float
    policy: str
    trace: dict | None = field(default=None, repr=False)


@dataclass
class RunContext:
    """Everything that stays fixed across the slots of one run."""

    config: ScenarioConfig
    generator: ChannelGenerator
    books: Codebooks
    fixed: FixedBeams
    radio: RadioConfig
    service: ServiceConfig
    pixels: PixelSet
    policy: Policy

    @classmethod
    def build(cls, config: ScenarioConfig) -> "RunContext":
        scene = config.scene_object()
        model = config.channel_model()
        cb = config.codebook
        books = build_codebooks(scene, model.wavelength, cb.ue_grid_deg, cb.ap_grid_deg,
                                cb.ris_grid_deg, cb.phase_bits)
        return cls(config, ChannelGenerator(scene, model), books, FixedBeams.for_scene(scene, books),
                   config.radio_config(), config.service_config(), config.pixel_set(),
                   Policy(config.run.policy))

    def calibrate_rate_max(self, rng: np.random.Generator, slots: int, safety: float) -> float:
        """Rate at full power over the largest squared spectral norm seen, times ``safety``."""
        best = 0.0
        for _ in range(slots):
            ch = self.generator.draw(rng)
            mats = [ch.H_direct] + [compose_e2e(ch, ph) for ph in self.books.ris_phases]
            best = max(best, max(np.linalg.norm(m, 2) ** 2 for m in mats))
        return float(rate_from_gain(safety * best, self.radio.max_tx_power, self.radio))


class RandomSources:
    """Seeded channel, arrival and CPU streams (independent of the decisions)."""

    def __init__(self, ctx: RunContext, seed: int, horizon: int):
        chan, arr, cpu, calib = np.random.SeedSequence(seed).spawn(4)
        self.ctx = ctx
        self._chan = np.random.default_rng(chan)
        self.calibration_rng = np.random.default_rng(calib)
        self.arrivals = ctx.service.draw_arrivals(np.random.default_rng(arr), horizon)
        self.cpu = ctx.service.draw_cpu(np.random.default_rng(cpu), horizon)

    def channels(self, t: int) -> SlotChannels:
        return self.ctx.generator.draw(self._chan)


def _stable(total: np.ndarray, batches: int = 20) -> bool:
    """False when the backlog of the last half keeps growing beyond batch noise."""
    half = total[len(total) // 2:]
    if len(half) < 2 * batches:
        return True
    means = np.array([b.mean() for b in np.array_split(half, batches)])
    x = np.arange(batches, dtype=float)
    slope, intercept = np.polyfit(x, means, 1)
    resid = means - (slope * x + intercept)
    se = math.sqrt(resid @ resid / (batches - 2) / ((x - x.mean()) @ (x - x.mean())))
    growth = slope * batches
    scale = max(abs(means.mean()), 1.0)
    return not (slope > 3 * se and growth > 0.1 * scale)


def run(config: ScenarioConfig, trace: bool = False, sources=None, rate_max: float | None = None,
        backend: str | None = None) -> RunMetrics:
    """Simulate ``config.run.horizon`` slots and return post-warmup averages.

    ``sources`` may replace the random streams; it needs ``channels(t)`` plus
    ``arrivals`` and ``cpu`` sequences. ``rate_max`` skips the calibration.
    """
    ctx = RunContext.build(config)
    horizon, warmup = config.run.horizon, config.run.warmup
    if sources is None:
        sources = RandomSources(ctx, config.run.seed, horizon)
    if rate_max is None:
        rng = getattr(sources, "calibration_rng", None) or np.random.default_rng(config.run.seed)
        rate_max = ctx.calibrate_rate_max(rng, config.lyapunov.rmax_calibration_slots,
                                          config.lyapunov.rmax_safety)
    service, radio = ctx.service, ctx.radio
    lcfg = LyapunovConfig(config.lyapunov.v, drift_constant(
        service.arrival_max, rate_max, service.cpu_max, service.slot_duration))

    rec = {name: np.zeros(horizon) for name in TRACE_FIELDS}
    state = config.initial_state()
    for t in range(horizon):
        ch = sources.channels(t)
        arrivals = float(sources.arrivals[t])
        cpu = float(sources.cpu[t])
        d = baseline_decision(ctx.policy, ch, ctx.books, state, lcfg, radio, ctx.pixels,
                              ctx.fixed, backend)
        nxt, transmitted, processed = step(state, d.achieved_rate, arrivals, cpu, service)
        ok, slack = drift_bound_check(state, nxt, d, arrivals, cpu, lcfg, d.achieved_emfe, service)
        if config.run.check_drift and not ok:
            raise DriftBoundViolation(f"slot {t}: drift bound slack {slack} < 0")
        for name, value in (("local_bits", state.local_bits), ("remote_bits", state.remote_bits),
                            ("arrivals", arrivals), ("cpu", cpu), ("transmitted", transmitted),
                            ("processed", processed), ("rate", d.achieved_rate),
                            ("power", d.tx_power), ("emfe", d.achieved_emfe),
                            ("precoder", d.precoder_index), ("combiner", d.combiner_index),
                            ("ris", d.ris_index), ("slack", slack)):
            rec[name][t] = value
        state = nxt

    post = slice(warmup, horizon)
    avg = {k: float(rec[k][post].mean()) for k in ("emfe", "local_bits", "remote_bits",
                                                  "arrivals", "rate", "power")}
    if avg["arrivals"] > 0:
        delay = e2e_delay(avg["local_bits"], avg["remote_bits"], avg["arrivals"], service)
    else:
        delay = 0.0 if avg["local_bits"] + avg["remote_bits"] == 0 else math.inf
    total = rec["local_bits"] + rec["remote_bits"]
    return RunMetrics(
        avg_emfe=avg["emfe"], avg_local_bits=avg["local_bits"], avg_remote_bits=avg["remote_bits"],
        avg_arrival_bits=avg["arrivals"], avg_delay=delay, avg_rate=avg["rate"],
        avg_power=avg["power"], stable=_stable(total[post]),
        min_drift_slack=float(rec["slack"].min()), rate_max=rate_max,
        drift_constant=lcfg.drift_constant, seed=config.run.seed, v=config.lyapunov.v,
        policy=ctx.policy.value, trace=rec if trace else None,
    )
