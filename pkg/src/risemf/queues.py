"""Local (device) and remote (edge host) buffers, in bits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class UndefinedDelayError(ValueError):
    pass


@dataclass(frozen=True)
class QueueState:
    local_bits: float = 0.0
    remote_bits: float = 0.0

    def __post_init__(self):
        if self.local_bits < 0 or self.remote_bits < 0:
            raise ValueError(f"negative backlog: {self}")

    @property
    def total(self) -> float:
        return self.local_bits + self.remote_bits


@dataclass(frozen=True)
class ServiceConfig:
    """Slotting, arrivals and edge CPU.

    Arrivals are a Poisson number of ``packet_bits`` packets per slot with mean
    ``mean_arrival_rate * slot_duration`` bits, truncated at mean + 10 std.
    CPU availability is uniform on ``[0, cpu_max]``; when ``cpu_max`` is None it
    defaults to ``2 * service_margin * cycles_per_bit * mean_arrival_rate``,
    i.e. a mean service rate of ``service_margin`` times the arrival rate.
    """

    slot_duration: float = 0.01
    cycles_per_bit: float = 10.0
    mean_arrival_rate: float = 1e8
    packet_bits: float = 1000.0
    service_margin: float = 1.5
    cpu_max_override: float | None = None

    def __post_init__(self):
        if not (self.slot_duration > 0 and self.cycles_per_bit > 0 and self.packet_bits > 0):
            raise ValueError("slot_duration, cycles_per_bit and packet_bits must be > 0")
        if not self.mean_arrival_rate >= 0:
            raise ValueError("mean_arrival_rate must be >= 0")

    @property
    def mean_packets(self) -> float:
        return self.mean_arrival_rate * self.slot_duration / self.packet_bits

    @property
    def max_packets(self) -> int:
        lam = self.mean_packets
        return int(math.floor(lam + 10 * math.sqrt(lam)))

    @property
    def arrival_max(self) -> float:
        """Largest possible arrival in one slot, bits."""
        return self.max_packets * self.packet_bits

    @property
    def cpu_max(self) -> float:
        if self.cpu_max_override is not None:
            return self.cpu_max_override
        return 2 * self.service_margin * self.cycles_per_bit * self.mean_arrival_rate

    def draw_arrivals(self, rng: np.random.Generator, n: int) -> np.ndarray:
        packets = np.minimum(rng.poisson(self.mean_packets, size=n), self.max_packets)
        return packets * self.packet_bits

    def draw_cpu(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(0.0, self.cpu_max, size=n)


def step_local(state: QueueState, rate: float, arrivals: float, cfg: ServiceConfig):
    """Return ``(new local backlog, bits transmitted this slot)``."""
    if rate < 0 or arrivals < 0:
        raise ValueError("rate and arrivals must be >= 0")
    drain = cfg.slot_duration * rate
    transmitted = min(state.local_bits, drain)
    return max(0.0, state.local_bits - drain) + arrivals, transmitted


def step_remote(state: QueueState, transmitted: float, cpu: float, cfg: ServiceConfig) -> float:
    if transmitted < 0 or cpu < 0:
        raise ValueError("transmitted bits and cpu must be >= 0")
    return max(0.0, state.remote_bits - cfg.slot_duration * cpu / cfg.cycles_per_bit) + transmitted


def step(state: QueueState, rate: float, arrivals: float, cpu: float, cfg: ServiceConfig):
    """One slot of both buffers; returns ``(next state, transmitted, processed)``."""
    local, transmitted = step_local(state, rate, arrivals, cfg)
    processed = min(state.remote_bits, cfg.slot_duration * cpu / cfg.cycles_per_bit)
    remote = step_remote(state, transmitted, cpu, cfg)
    return QueueState(local, remote), transmitted, processed


def e2e_delay(avg_local: float, avg_remote: float, avg_arrival: float, cfg: ServiceConfig) -> float:
    """Little's-law delay in seconds; ``avg_arrival`` is in bits per slot."""
    if not avg_arrival > 0:
        raise UndefinedDelayError("average arrivals must be > 0 for a defined delay")
    return cfg.slot_duration * (avg_local + avg_remote) / avg_arrival
