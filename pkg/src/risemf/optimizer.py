"""Per-slot drift-plus-penalty control.

Each slot minimises ``V * sum_p w_p P_{d,p} + (B_r - B_l) * R_u`` over the
codebook triples, with the transmit power in closed form for every triple.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import SlotChannels
from .codebook import Codebooks, nearest_index
from .geometry import Scene
from .queues import QueueState, ServiceConfig
from .radio import PixelSet, RadioConfig, rate_from_gain

LN2 = math.log(2.0)


class Policy(str, enum.Enum):
    BOA_WITH_RIS = "boa_with_ris"
    BOA_NO_RIS = "boa_no_ris"
    FIXED_AP_NO_RIS = "fixed_ap_no_ris"
    FIXED_AP_WITH_RIS = "fixed_ap_with_ris"
    FIXED_RIS = "fixed_ris"

    @property
    def uses_ris(self) -> bool:
        return self not in (Policy.BOA_NO_RIS, Policy.FIXED_AP_NO_RIS)

    @property
    def searches(self) -> bool:
        return self in (Policy.BOA_WITH_RIS, Policy.BOA_NO_RIS)


ALL_POLICIES = tuple(Policy)


@dataclass(frozen=True)
class LyapunovConfig:
    v_parameter: float
    drift_constant: float

    def __post_init__(self):
        if not self.v_parameter >= 0:
            raise ValueError("V must be >= 0")
        if not self.drift_constant > 0:
            raise ValueError("drift constant must be > 0")


@dataclass(frozen=True)
class Decision:
    precoder_index: int
    combiner_index: int
    ris_index: int
    tx_power: float
    objective_value: float
    achieved_rate: float
    achieved_emfe: float
    effective_gain: float = 0.0
    pixel_gain: float = 0.0


def drift_constant(arrival_max: float, rate_max: float, cpu_max: float, slot_duration: float) -> float:
    """``(A_max^2 + 2 (tau R_max)^2 + (tau f_max)^2) / 2``."""
    tau = slot_duration
    return 0.5 * (arrival_max**2 + 2 * (tau * rate_max) ** 2 + (tau * cpu_max) ** 2)


def optimal_power(local_bits: float, remote_bits: float, v: float, weighted_pixel_gain: float,
                  effective_gain: float, cfg: RadioConfig) -> float:
    """Minimiser over ``[0, P_max]`` of ``V c P + (B_r - B_l) W log2(1 + a P)``.

    ``c = (4 pi / lambda^2) * weighted_pixel_gain`` and
    ``a = effective_gain / (N_0 W)``. The stationary point is
    ``W (B_l - B_r) / (ln2 V c) - N_0 W / effective_gain``.
    """
    if local_bits <= remote_bits or effective_gain <= 0:
        return 0.0
    c = v * cfg.density_factor * weighted_pixel_gain
    if c <= 0:
        return cfg.max_tx_power
    p = cfg.bandwidth * (local_bits - remote_bits) / (LN2 * c) - cfg.noise_power / effective_gain
    return min(max(p, 0.0), cfg.max_tx_power)


def slot_objective(rate: float, weighted_emfe: float, local_bits: float, remote_bits: float,
                   v: float) -> float:
    return v * weighted_emfe + (remote_bits - local_bits) * rate


def _run_search(ch: SlotChannels, books: Codebooks, state: QueueState, v: float,
                cfg: RadioConfig, pixels: PixelSet, backend=None) -> Decision:
    u, a, r, p, obj, eff, pix = _kernels.search(
        ch.H_direct, ch.H_ris_ap, ch.H_ue_ris, ch.h_direct_pixel, ch.h_ris_pixel,
        pixels.weight_array, books.ris_phasors, books.precoders, books.combiners,
        state.local_bits, state.remote_bits, v, cfg.density_factor,
        cfg.bandwidth, cfg.noise_power, cfg.max_tx_power, backend=backend)
    rate = float(rate_from_gain(eff, p, cfg))
    return Decision(u, a, r, p, obj, rate, cfg.density_factor * p * pix, eff, pix)


def solve_slot(ch: SlotChannels, books: Codebooks, state: QueueState, lcfg: LyapunovConfig,
               cfg: RadioConfig, pixels: PixelSet, backend=None) -> Decision:
    """Exhaustive search over every codebook triple with closed-form power.

    Ties are broken towards the lowest (precoder, combiner, RIS) index.
    """
    return _run_search(ch, books, state, lcfg.v_parameter, cfg, pixels, backend)


@dataclass(frozen=True)
class FixedBeams:
    """Codebook indices used by the non-searching benchmark policies."""

    ue_to_ap: int
    ap_to_ue: int
    ue_to_ris: int
    ap_to_ris: int
    ris_to_ap: int

    @classmethod
    def for_scene(cls, scene: Scene, books: Codebooks) -> "FixedBeams":
        return cls(
            ue_to_ap=nearest_index(books.precoder_angles, scene.angle("ue", scene.ap)),
            ap_to_ue=nearest_index(books.combiner_angles, scene.angle("ap", scene.ue)),
            ue_to_ris=nearest_index(books.precoder_angles, scene.angle("ue", scene.ris)),
            ap_to_ris=nearest_index(books.combiner_angles, scene.angle("ap", scene.ris)),
            ris_to_ap=nearest_index(books.ris_angles, scene.angle("ris", scene.ap)),
        )

    def triple(self, policy: Policy) -> tuple[int, int, int]:
        if policy in (Policy.FIXED_AP_NO_RIS, Policy.FIXED_AP_WITH_RIS):
            return self.ue_to_ap, self.ap_to_ue, self.ris_to_ap
        if policy is Policy.FIXED_RIS:
            return self.ue_to_ris, self.ap_to_ris, self.ris_to_ap
        raise ValueError(f"{policy} has no fixed triple")


def baseline_decision(policy, ch: SlotChannels, books: Codebooks, state: QueueState,
                      lcfg: LyapunovConfig, cfg: RadioConfig, pixels: PixelSet,
                      fixed: FixedBeams | None = None, backend=None) -> Decision:
    """Decision of any policy; the RIS-free variants see the scene without the RIS.

    Fixed policies need ``fixed`` (see :meth:`FixedBeams.for_scene`).
    """
    policy = Policy(policy)
    if not policy.uses_ris:
        ch = ch.without_ris()
    if policy is Policy.BOA_WITH_RIS:
        return _run_search(ch, books, state, lcfg.v_parameter, cfg, pixels, backend)
    if policy is Policy.BOA_NO_RIS:
        d = _run_search(ch, books.subset(ris=[0]), state, lcfg.v_parameter, cfg, pixels, backend)
        return d
    if fixed is None:
        raise ValueError(f"{policy.value} needs the fixed beam indices")
    u, a, r = fixed.triple(policy)
    sub = books.subset(precoders=[u], combiners=[a], ris=[r])
    d = _run_search(ch, sub, state, lcfg.v_parameter, cfg, pixels, backend)
    return Decision(u, a, r, d.tx_power, d.objective_value, d.achieved_rate, d.achieved_emfe,
                    d.effective_gain, d.pixel_gain)


def drift_bound_check(pre: QueueState, post: QueueState, decision: Decision, arrivals: float,
                      cpu: float, lcfg: LyapunovConfig, penalty: float, service: ServiceConfig):
    """Realised one-slot drift-plus-penalty against its upper bound.

    Returns ``(holds, slack)`` with ``slack = bound - realised``.
    """
    tau = service.slot_duration
    drift = 0.5 * (post.local_bits**2 + post.remote_bits**2
                   - pre.local_bits**2 - pre.remote_bits**2)
    realised = drift + lcfg.v_parameter * penalty
    bound = (lcfg.drift_constant
             + (pre.remote_bits - pre.local_bits) * tau * decision.achieved_rate
             + arrivals * pre.local_bits
             - tau * pre.remote_bits * cpu / service.cycles_per_bit
             + lcfg.v_parameter * penalty)
    slack = bound - realised
    return slack >= 0, slack
