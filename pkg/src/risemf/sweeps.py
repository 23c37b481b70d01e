"""Multi-seed sweep drivers: V trade-off, range and arrival-rate experiments.

Every (point, seed) pair is an independent run. The seed list is shared by
all points so that neighbouring points see the same channel and traffic
realisations, which keeps trends smooth at small seed counts.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .simulator import RunMetrics, run


class SweepError(ValueError):
    pass


def _run_one(args):
    config, backend = args
    return run(config, backend=backend)


def run_many(configs: list[ScenarioConfig], workers: int = 1, backend: str | None = None) -> list[RunMetrics]:
    """Run configs in order; with ``workers > 1`` they fan out over processes."""
    jobs = [(c, backend) for c in configs]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def mean_stderr(values) -> tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def to_dbm(w: float) -> float:
    """W/m^2 to dBm/m^2; zero maps to -inf and nan stays nan."""
    if math.isnan(w):
        return math.nan
    return 10 * math.log10(w) + 30 if w > 0 else -math.inf


@dataclass
class VPoint:
    v: float
    runs: list[RunMetrics] = field(repr=False)

    @property
    def emfe(self) -> tuple[float, float]:
        return mean_stderr([r.avg_emfe for r in self.runs])

    @property
    def delay(self) -> tuple[float, float]:
        return mean_stderr([r.avg_delay for r in self.runs])

    @property
    def stable(self) -> bool:
        return all(r.stable for r in self.runs)


def _check_seeds(seeds) -> list[int]:
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise SweepError("seed list is empty")
    return seeds


def _seeded(config: ScenarioConfig, v: float, seeds: list[int]) -> list[ScenarioConfig]:
    return [config.with_overrides({"lyapunov.v": float(v), "run.seed": s}) for s in seeds]


def sweep_v(config: ScenarioConfig, v_values, seeds=None, workers: int | None = None,
            backend: str | None = None) -> list[VPoint]:
    """One point per V (sorted ascending), each holding a run per seed."""
    v_values = sorted(float(v) for v in v_values)
    if not v_values:
        raise SweepError("V list is empty")
    seeds = _check_seeds(config.sweep.seeds if seeds is None else seeds)
    workers = config.sweep.workers if workers is None else workers
    jobs = [c for v in v_values for c in _seeded(config, v, seeds)]
    results = run_many(jobs, workers, backend)
    n = len(seeds)
    return [VPoint(v, results[i * n:(i + 1) * n]) for i, v in enumerate(v_values)]


@dataclass
class TunedPoint:
    """Outcome of tuning V against a delay bound; ``v_star`` is nan when infeasible."""

    v_star: float
    feasible: bool
    point: VPoint | None = field(default=None, repr=False)

    @property
    def avg_emfe(self) -> float:
        return self.point.emfe[0] if self.feasible else math.nan

    @property
    def avg_delay(self) -> float:
        return self.point.delay[0] if self.feasible else math.nan


def tune_v(config: ScenarioConfig, delay_bound: float, seeds=None, workers: int | None = None,
           backend: str | None = None) -> TunedPoint:
    """Largest V whose seed-mean delay stays within the bound, by bisection on log V.

    A delay up to ``(1 + delay_tolerance) * delay_bound`` counts as meeting
    the bound, and the search stops early once the delay lands inside the
    band ``delay_bound * (1 -/+ delay_tolerance)``.
    """
    if not delay_bound > 0:
        raise SweepError("delay bound must be > 0")
    sw = config.sweep
    seeds = _check_seeds(sw.seeds if seeds is None else seeds)
    workers = sw.workers if workers is None else workers
    upper = delay_bound * (1 + sw.delay_tolerance)
    lower = delay_bound * (1 - sw.delay_tolerance)

    def evaluate(v):
        return sweep_v(config, [v], seeds, workers, backend)[0]

    def meets(p):
        return p.stable and p.delay[0] <= upper

    lo = evaluate(sw.v_min)
    if not meets(lo):
        return TunedPoint(math.nan, False)
    hi = evaluate(sw.v_max)
    if meets(hi):
        return TunedPoint(sw.v_max, True, hi)
    if lo.delay[0] >= lower:
        return TunedPoint(sw.v_min, True, lo)
    a, b = math.log(sw.v_min), math.log(sw.v_max)
    for _ in range(sw.bisection_iterations):
        mid = evaluate(math.exp((a + b) / 2))
        if meets(mid):
            a, lo = math.log(mid.v), mid
            if mid.delay[0] >= lower:
                break
        else:
            b = math.log(mid.v)
    return TunedPoint(lo.v, True, lo)


def range_scene(config: ScenarioConfig, distance: float) -> ScenarioConfig:
    """Place the UE ``distance`` metres from the AP along the x axis.

    The RIS and the pixels keep their offsets from the UE in the base scene,
    so the local geometry around the device is unchanged.
    """
    if not distance > 0:
        raise SweepError(f"distance must be > 0, got {distance}")
    s = config.scene
    ue0 = np.array(s.ue, dtype=float)
    ap = np.array(s.ap, dtype=float)
    ue = ap - np.array([distance, 0.0, 0.0])
    ue[2] = ue0[2]
    shift = ue - ue0
    ris = np.array(s.ris, dtype=float) + shift
    pixels = tuple(tuple(float(x) for x in np.array(p, dtype=float) + shift) for p in s.pixels)
    return config.replace_section("scene", ue=tuple(float(x) for x in ue),
                                  ris=tuple(float(x) for x in ris), pixels=pixels)


@dataclass
class RangePoint:
    distance: float
    policy: str
    tuned: TunedPoint

    @property
    def avg_emfe(self) -> float:
        return self.tuned.avg_emfe


@dataclass
class ArrivalPoint:
    arrival_rate: float
    policy: str
    tuned: TunedPoint
    gain_db_vs_no_ris: float = math.nan

    @property
    def avg_emfe(self) -> float:
        return self.tuned.avg_emfe


def sweep_range(config: ScenarioConfig, distances=None, delay_bound: float | None = None,
                policies=None, seeds=None, workers: int | None = None,
                backend: str | None = None) -> list[RangePoint]:
    sw = config.sweep
    distances = sw.distances if distances is None else distances
    delay_bound = sw.delay_bound if delay_bound is None else delay_bound
    policies = sw.policies if policies is None else policies
    out = []
    for d in distances:
        placed = range_scene(config, float(d))
        for pol in policies:
            cfg = placed.replace_section("run", policy=pol)
            out.append(RangePoint(float(d), pol, tune_v(cfg, delay_bound, seeds, workers, backend)))
    return out


def gain_db(with_ris: float, without_ris: float) -> float:
    """EMFE reduction of the RIS-aided policy in dB (positive is better)."""
    if not (with_ris > 0 and without_ris > 0):
        return math.nan
    return 10 * math.log10(without_ris / with_ris)


def sweep_arrival(config: ScenarioConfig, arrival_rates=None, delay_bound: float | None = None,
                  policies=None, seeds=None, workers: int | None = None,
                  backend: str | None = None) -> list[ArrivalPoint]:
    sw = config.sweep
    rates = sw.arrival_rates if arrival_rates is None else arrival_rates
    delay_bound = sw.delay_bound if delay_bound is None else delay_bound
    policies = list(sw.policies if policies is None else policies)
    out = []
    for rate in rates:
        if not rate > 0:
            raise SweepError(f"arrival rate must be > 0, got {rate}")
        cfg_rate = config.replace_section("service", mean_arrival_rate=float(rate))
        points = [ArrivalPoint(float(rate), pol,
                               tune_v(cfg_rate.replace_section("run", policy=pol), delay_bound,
                                      seeds, workers, backend))
                  for pol in policies]
        by_policy = {p.policy: p for p in points}
        if "boa_with_ris" in by_policy and "boa_no_ris" in by_policy:
            g = gain_db(by_policy["boa_with_ris"].avg_emfe, by_policy["boa_no_ris"].avg_emfe)
            for p in points:
                p.gain_db_vs_no_ris = g
        out.extend(points)
    return out
