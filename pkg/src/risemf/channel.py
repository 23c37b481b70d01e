"""Per-slot Rician channel blocks and their composition through the RIS."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import SPEED_OF_LIGHT, ArraySpec, Position3D, Scene, element_gain, steering_vector

LINKS = ("direct", "ue_ris", "ris_ap", "ue_pixel", "ris_pixel")


@dataclass(frozen=True)
class RicianParams:
    """Rician fading and path loss of one link class.

    ``reference_pathloss`` is the power gain at 1 m; ``None`` selects the Friis
    value ``(lambda/(4*pi))**2`` so that ``PL(d) = (lambda/(4*pi*d))**2`` for
    exponent 2. ``k_factor`` may be ``math.inf`` for a pure LOS link.
    """

    carrier_frequency: float = 28e9
    k_factor: float = 10.0
    pathloss_exponent: float = 2.0
    reference_pathloss: float | None = None

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be > 0")
        if not self.k_factor >= 0:
            raise ValueError("k_factor must be >= 0")
        if not self.pathloss_exponent >= 2:
            raise ValueError("pathloss_exponent must be >= 2")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    def pathloss(self, distance: float) -> float:
        ref = self.reference_pathloss
        if ref is None:
            ref = (self.wavelength / (4 * math.pi)) ** 2
        return ref * distance ** (-self.pathloss_exponent)

    def los_weight(self) -> tuple[float, float]:
        """Amplitude weights (LOS, NLOS) of the Rician mix."""
        k = self.k_factor
        if math.isinf(k):
            return 1.0, 0.0
        return math.sqrt(k / (k + 1)), math.sqrt(1 / (k + 1))


@dataclass(frozen=True)
class ChannelModel:
    """Link-class parameters; ``links`` overrides ``default`` per class."""

    default: RicianParams = field(default_factory=RicianParams)
    links: dict = field(default_factory=dict)

    def params(self, link: str) -> RicianParams:
        if link not in LINKS:
            raise KeyError(link)
        return self.links.get(link, self.default)

    @property
    def wavelength(self) -> float:
        return self.default.wavelength


def wrap_phases(phases) -> np.ndarray:
    """Phases reduced to [0, 2*pi)."""
    out = np.mod(np.asarray(phases, dtype=float), 2 * np.pi)
    # np.mod of a tiny negative number rounds up to exactly 2*pi
    out[out >= 2 * np.pi] = 0.0
    return out


@dataclass(frozen=True)
class RisProfile:
    phases: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phases", wrap_phases(self.phases))

    @property
    def phasor(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def __len__(self):
        return len(self.phases)


@dataclass
class SlotChannels:
    """All channel blocks of one slot.

    Pixel channels are stacked as rows: ``h_direct_pixel[p]`` is the 1 x N_u
    UE -> pixel vector, ``h_ris_pixel[p]`` the 1 x M RIS -> pixel vector.
    """

    H_direct: np.ndarray      # N_a x N_u
    H_ue_ris: np.ndarray      # M x N_u
    H_ris_ap: np.ndarray      # N_a x M
    h_direct_pixel: np.ndarray  # P x N_u
    h_ris_pixel: np.ndarray   # P x M

    def __post_init__(self):
        n_a, n_u = self.H_direct.shape
        m = self.H_ue_ris.shape[0]
        if (self.H_ue_ris.shape != (m, n_u) or self.H_ris_ap.shape != (n_a, m)
                or self.h_direct_pixel.shape[1:] != (n_u,)
                or self.h_ris_pixel.shape != (self.h_direct_pixel.shape[0], m)):
            raise ValueError("inconsistent channel block dimensions")

    @property
    def num_pixels(self) -> int:
        return self.h_direct_pixel.shape[0]

    def without_ris(self) -> "SlotChannels":
        """Same slot with the RIS removed from the scene."""
        return replace(self, H_ris_ap=np.zeros_like(self.H_ris_ap),
                       h_ris_pixel=np.zeros_like(self.h_ris_pixel))


def _phasor(ris) -> np.ndarray:
    if isinstance(ris, RisProfile):
        return ris.phasor
    ris = np.asarray(ris)
    if np.iscomplexobj(ris):
        raise TypeError("expected RIS phases in radians, got complex values")
    return np.exp(1j * ris.astype(float))


def compose_e2e(ch: SlotChannels, ris) -> np.ndarray:
    """``H_direct + H_ris_ap diag(exp(j theta)) H_ue_ris``."""
    phasor = _phasor(ris)
    if phasor.shape != (ch.H_ue_ris.shape[0],):
        raise ValueError(f"RIS profile has {phasor.shape} phases, expected {ch.H_ue_ris.shape[0]}")
    return ch.H_direct + (ch.H_ris_ap * phasor) @ ch.H_ue_ris


def compose_pixel(ch: SlotChannels, ris, p: int) -> np.ndarray:
    """Overall UE -> pixel ``p`` row vector through the direct and reflected paths."""
    if not 0 <= p < ch.num_pixels:
        raise IndexError(f"pixel {p} out of range [0, {ch.num_pixels})")
    phasor = _phasor(ris)
    return ch.h_direct_pixel[p] + (ch.h_ris_pixel[p] * phasor) @ ch.H_ue_ris


def _los_block(rx_spec: ArraySpec | None, rx_angle: float, tx_spec: ArraySpec, tx_angle: float,
               wavelength: float) -> np.ndarray:
    # reciprocal far-field response a_rx a_tx^T; a pixel is a single isotropic point
    if rx_spec is None:
        a_rx, g_rx = np.ones(1, dtype=complex), 1.0
    else:
        a_rx = steering_vector(rx_spec, wavelength, rx_angle)
        g_rx = element_gain(rx_spec, rx_angle)
    a_tx = steering_vector(tx_spec, wavelength, tx_angle)
    g_tx = element_gain(tx_spec, tx_angle)
    return g_rx * g_tx * np.outer(a_rx, a_tx)


class ChannelGenerator:
    """Draws :class:`SlotChannels` for a fixed scene.

    LOS parts are computed once; each draw adds fresh i.i.d. CN(0, 1) NLOS
    entries (block fading, independent across slots).
    """

    def __init__(self, scene: Scene, model: ChannelModel):
        self.scene = scene
        self.model = model
        lam = model.wavelength
        s = scene
        ue, ap, ris = s.ue_array, s.ap_array, s.ris_array
        ris_gain = 10 ** (ris.element_gain_db / 20)
        ue_gain = 10 ** (ue.element_gain_db / 20)
        ap_gain = 10 ** (ap.element_gain_db / 20)

        def link(name, rx_pos, tx_pos, rx_node, tx_node, rx_spec, tx_spec, extra):
            prm = self.model.params(name)
            d = tx_pos.distance(rx_pos)
            rx_angle = s.angle(rx_node, tx_pos) if rx_node else 0.0
            tx_angle = s.angle(tx_node, rx_pos)
            los = _los_block(rx_spec, rx_angle, tx_spec, tx_angle, prm.wavelength)
            los = los * np.exp(-2j * np.pi * d / prm.wavelength)
            amp = math.sqrt(prm.pathloss(d)) * extra
            w_los, w_nlos = prm.los_weight()
            return amp * w_los * los, amp * w_nlos

        blocks = {
            "direct": [link("direct", s.ap, s.ue, "ap", "ue", ap, ue, ap_gain * ue_gain)],
            "ue_ris": [link("ue_ris", s.ris, s.ue, "ris", "ue", ris, ue, ris_gain * ue_gain)],
            "ris_ap": [link("ris_ap", s.ap, s.ris, "ap", "ris", ap, ris, ap_gain * ris_gain)],
            "ue_pixel": [link("ue_pixel", px, s.ue, None, "ue", None, ue, ue_gain) for px in s.pixels],
            "ris_pixel": [link("ris_pixel", px, s.ris, None, "ris", None, ris, ris_gain)
                          for px in s.pixels],
        }
        self._los = {
            "direct": blocks["direct"][0][0],
            "ue_ris": blocks["ue_ris"][0][0],
            "ris_ap": blocks["ris_ap"][0][0],
            "ue_pixel": np.vstack([b[0] for b in blocks["ue_pixel"]]),
            "ris_pixel": np.vstack([b[0] for b in blocks["ris_pixel"]]),
        }
        self._nlos_scale = {
            "direct": blocks["direct"][0][1],
            "ue_ris": blocks["ue_ris"][0][1],
            "ris_ap": blocks["ris_ap"][0][1],
            "ue_pixel": np.array([b[1] for b in blocks["ue_pixel"]])[:, None],
            "ris_pixel": np.array([b[1] for b in blocks["ris_pixel"]])[:, None],
        }
        self._shapes = [(k, self._los[k].shape) for k in LINKS]
        self._sizes = [int(np.prod(shape)) for _, shape in self._shapes]
        self._total = sum(self._sizes)

    def los(self) -> SlotChannels:
        """The deterministic (K -> infinity) part of every block."""
        return SlotChannels(*(self._los[k].copy() for k in LINKS))

    def draw(self, rng: np.random.Generator) -> SlotChannels:
        z = rng.standard_normal((2, self._total))
        z = (z[0] + 1j * z[1]) * math.sqrt(0.5)
        out, start = [], 0
        for (name, shape), size in zip(self._shapes, self._sizes):
            nlos = z[start:start + size].reshape(shape)
            out.append(self._los[name] + self._nlos_scale[name] * nlos)
            start += size
        return SlotChannels(*out)


def generate_slot_channels(scene: Scene, model: ChannelModel, rng: np.random.Generator) -> SlotChannels:
    return ChannelGenerator(scene, model).draw(rng)
