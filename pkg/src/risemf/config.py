"""Scenario configuration: sectioned key-value TOML with dotted overrides.

Resolution order is built-in defaults, then the config file, then an
explicit profile, then ``--set`` overrides.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channel import LINKS, ChannelModel, RicianParams
from .codebook import RIS_GRID_DEG, UE_AP_GRID_DEG
from .geometry import ArraySpec, Position3D, Scene
from .queues import QueueState, ServiceConfig
from .radio import PixelSet, RadioConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SceneSection:
    ue: tuple = (0.0, 50.0, 1.0)
    ap: tuple = (50.0, 50.0, 1.0)
    ris: tuple = (4.0, 48.0, 1.0)
    pixels: tuple = ((1.0, 50.0, 1.0),)
    pixel_weights: tuple = (1.0,)
    # degrees; None lets the arrays face each other (RIS faces the AP)
    ue_boresight_deg: float | None = None
    ap_boresight_deg: float | None = None
    ris_boresight_deg: float | None = None


@dataclass(frozen=True)
class ArraysSection:
    ue_elements: int = 8
    ap_elements: int = 8
    ris_elements: int = 20
    element_exponent: float = 1.0
    ris_element_exponent: float = 1.0
    ris_element_gain_db: float = 25.0
    ris_two_sided: bool = True


@dataclass(frozen=True)
class ChannelSection:
    carrier_frequency: float = 28e9
    k_factor: float = 10.0
    pathloss_exponent: float = 2.0
    reference_pathloss: float | None = None
    # per-link overrides, e.g. {"direct": {"k_factor": 5.0}}
    links: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RadioSection:
    bandwidth: float = 8e6
    noise_psd_dbm_hz: float = -174.0
    max_tx_power: float = 0.1


@dataclass(frozen=True)
class ServiceSection:
    slot_duration: float = 0.01
    cycles_per_bit: float = 10.0
    mean_arrival_rate: float = 1e8
    packet_bits: float = 1000.0
    service_margin: float = 1.5


@dataclass(frozen=True)
class CodebookSection:
    ue_grid_deg: tuple = UE_AP_GRID_DEG
    ap_grid_deg: tuple = UE_AP_GRID_DEG
    ris_grid_deg: tuple = RIS_GRID_DEG
    phase_bits: int | None = None


@dataclass(frozen=True)
class LyapunovSection:
    v: float = 1e18
    rmax_calibration_slots: int = 100
    rmax_safety: float = 2.0


@dataclass(frozen=True)
class RunSection:
    policy: str = "boa_with_ris"
    horizon: int = 4000
    warmup: int = 400
    seed: int = 1
    initial_local_bits: float = 0.0
    initial_remote_bits: float = 0.0
    check_drift: bool = False


@dataclass(frozen=True)
class SweepSection:
    seeds: tuple = (1, 2, 3, 4, 5)
    # half-decade grid from 1e13 to 1e19
    v_values: tuple = tuple(float(f"{10 ** (k / 2):.3g}") for k in range(26, 39))
    v_min: float = 1e12
    v_max: float = 1e22
    bisection_iterations: int = 20
    delay_tolerance: float = 0.1
    delay_bound: float = 0.1
    distances: tuple = (10.0, 25.0, 50.0, 75.0, 100.0)
    arrival_rates: tuple = (1e6, 1e7, 5e7, 1e8)
    policies: tuple = ("boa_with_ris", "boa_no_ris", "fixed_ap_no_ris", "fixed_ap_with_ris", "fixed_ris")
    workers: int = 1


SECTIONS = {
    "scene": SceneSection, "arrays": ArraysSection, "channel": ChannelSection,
    "radio": RadioSection, "service": ServiceSection, "codebook": CodebookSection,
    "lyapunov": LyapunovSection, "run": RunSection, "sweep": SweepSection,
}

PROFILES = {
    # full-scale parameters: 800 MHz, 10 Gbit/s, 8/8/20 elements, 100 mW
    "paper": {"radio.bandwidth": 800e6, "service.mean_arrival_rate": 10e9,
              "channel.carrier_frequency": 28e9, "arrays.ue_elements": 8,
              "arrays.ap_elements": 8, "arrays.ris_elements": 20, "radio.max_tx_power": 0.1},
    # bandwidth and arrival rate divided by a common factor of 100
    "desk": {"radio.bandwidth": 8e6, "service.mean_arrival_rate": 1e8},
}


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


@dataclass(frozen=True)
class ScenarioConfig:
    scene: SceneSection = field(default_factory=SceneSection)
    arrays: ArraysSection = field(default_factory=ArraysSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    radio: RadioSection = field(default_factory=RadioSection)
    service: ServiceSection = field(default_factory=ServiceSection)
    codebook: CodebookSection = field(default_factory=CodebookSection)
    lyapunov: LyapunovSection = field(default_factory=LyapunovSection)
    run: RunSection = field(default_factory=RunSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def __post_init__(self):
        if not self.run.horizon > self.run.warmup >= 0:
            raise ConfigError("need horizon > warmup >= 0")

    # ---- (de)serialisation -------------------------------------------------
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        sections = {}
        for name, section_cls in SECTIONS.items():
            raw = dict(data.get(name, {}))
            known = {f.name for f in dataclasses.fields(section_cls)}
            unknown = set(raw) - known
            if unknown:
                raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
            sections[name] = section_cls(**{k: _tuplify(v) for k, v in raw.items()})
        extra = set(data) - set(SECTIONS)
        if extra:
            raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
        return cls(**sections)

    def with_overrides(self, overrides: dict) -> "ScenarioConfig":
        data = self.to_dict()
        for key, value in overrides.items():
            set_dotted(data, key, value)
        return ScenarioConfig.from_dict(data)

    def replace_section(self, section: str, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **{section: dataclasses.replace(getattr(self, section), **changes)})

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    # ---- builders ----------------------------------------------------------
    def channel_model(self) -> ChannelModel:
        c = self.channel
        default = RicianParams(c.carrier_frequency, c.k_factor, c.pathloss_exponent, c.reference_pathloss)
        links = {}
        for name, over in c.links.items():
            if name not in LINKS:
                raise ConfigError(f"unknown link class {name!r}; expected one of {LINKS}")
            links[name] = dataclasses.replace(default, **dict(over))
        return ChannelModel(default, links)

    @property
    def wavelength(self) -> float:
        return self.channel_model().wavelength

    def scene_object(self) -> Scene:
        s, a = self.scene, self.arrays
        def rad(x):
            return None if x is None else math.radians(x)
        return Scene.facing(
            Position3D(*s.ue), Position3D(*s.ap), Position3D(*s.ris),
            [Position3D(*p) for p in s.pixels],
            ArraySpec(a.ue_elements, element_exponent=a.element_exponent),
            ArraySpec(a.ap_elements, element_exponent=a.element_exponent),
            ArraySpec(a.ris_elements, element_exponent=a.ris_element_exponent,
                      element_gain_db=a.ris_element_gain_db, two_sided=a.ris_two_sided),
            boresights={"ue": rad(s.ue_boresight_deg), "ap": rad(s.ap_boresight_deg),
                        "ris": rad(s.ris_boresight_deg)},
        )

    def pixel_set(self) -> PixelSet:
        return PixelSet(tuple(Position3D(*p) for p in self.scene.pixels),
                        tuple(float(w) for w in self.scene.pixel_weights))

    def radio_config(self) -> RadioConfig:
        r = self.radio
        return RadioConfig(r.bandwidth, 10 ** (r.noise_psd_dbm_hz / 10) * 1e-3,
                           self.wavelength, r.max_tx_power)

    def service_config(self) -> ServiceConfig:
        s = self.service
        return ServiceConfig(s.slot_duration, s.cycles_per_bit, s.mean_arrival_rate,
                             s.packet_bits, s.service_margin)

    def initial_state(self) -> QueueState:
        return QueueState(self.run.initial_local_bits, self.run.initial_remote_bits)


def set_dotted(data: dict, key: str, value) -> None:
    parts = key.split(".")
    # per-link channel overrides are free-form below channel.links
    free = parts[:2] == ["channel", "links"] and len(parts) >= 3
    node = data
    for i, part in enumerate(parts[:-1]):
        if free and i >= 2 and isinstance(node, dict):
            node = node.setdefault(part, {})
            continue
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config key {key!r}")
        node = node[part]
    leaf = parts[-1]
    if not isinstance(node, dict) or (leaf not in node and not free):
        raise ConfigError(f"unknown config key {key!r}")
    node[leaf] = _tuplify(value)


def parse_override(text: str) -> tuple[str, object]:
    """``key=value`` with the value parsed as a TOML literal (bare words stay strings)."""
    if "=" not in text:
        raise ConfigError(f"malformed override {text!r}: expected key=value")
    key, raw = (s.strip() for s in text.split("=", 1))
    if not key:
        raise ConfigError(f"malformed override {text!r}: empty key")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    if raw.lower() in ("none", "null"):
        value = None
    return key, value


def load_config(path: str | Path | None = None, profile: str | None = None,
                overrides: dict | None = None) -> ScenarioConfig:
    data = ScenarioConfig().to_dict()
    if path is not None:
        with open(path, "rb") as fh:
            file_data = tomllib.load(fh)
        for section, values in file_data.items():
            if section not in data or not isinstance(values, dict):
                raise ConfigError(f"unknown section [{section}] in {path}")
            for k, v in values.items():
                set_dotted(data, f"{section}.{k}", v)
    if profile is not None:
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}")
        for k, v in PROFILES[profile].items():
            set_dotted(data, k, v)
    for k, v in (overrides or {}).items():
        set_dotted(data, k, v)
    return ScenarioConfig.from_dict(data)
