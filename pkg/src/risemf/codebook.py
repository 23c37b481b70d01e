"""Precoder, combiner and RIS-profile codebooks searched every slot."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import RisProfile, wrap_phases
from .geometry import ArraySpec, Scene, element_gain, steering_vector

UE_AP_GRID_DEG = tuple(range(-60, 61, 10))
RIS_GRID_DEG = tuple(range(-30, 31, 5))


def build_beam_codebook(spec: ArraySpec, wavelength: float, angle_grid) -> list[np.ndarray]:
    """Unit-power steering beams, one per grid angle, in grid order."""
    angles = list(angle_grid)
    if not angles:
        raise ValueError("empty angle grid")
    beams = []
    for a in angles:
        if not -math.pi / 2 < a < math.pi / 2:
            raise ValueError(f"beam angle {a} outside (-pi/2, pi/2)")
        v = steering_vector(spec, wavelength, a) * element_gain(spec, a)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError(f"element pattern vanishes at {a}")
        beams.append(v / norm)
    return beams


def quantize_phases(phases: np.ndarray, bits: int | None) -> np.ndarray:
    if bits is None:
        return phases
    step = 2 * np.pi / 2**bits
    return wrap_phases(np.round(phases / step) * step)


def build_ris_codebook(spec: ArraySpec, wavelength: float, incident_azimuth: float,
                       reflection_grid, phase_bits: int | None = None) -> list[RisProfile]:
    """Linear phase gradients retargeting a wave from ``incident_azimuth`` to each grid angle."""
    angles = list(reflection_grid)
    if not angles:
        raise ValueError("empty reflection grid")
    kd = 2 * np.pi * spec.spacing(wavelength) / wavelength
    idx = np.arange(spec.num_elements)
    out = []
    for psi in angles:
        theta = wrap_phases(-kd * idx * (np.sin(psi) + np.sin(incident_azimuth)))
        out.append(RisProfile(quantize_phases(theta, phase_bits)))
    return out


@dataclass(frozen=True)
class Codebooks:
    """Codebook entries stacked as rows.

    ``precoders[k]`` is a unit-power N_u vector, ``combiners[k]`` a unit-power
    N_a vector, ``ris_phases[k]`` the M phases of a profile. The ``*_angles``
    record the design angle (radians from boresight) of each entry.
    """

    precoders: np.ndarray
    combiners: np.ndarray
    ris_phases: np.ndarray
    precoder_angles: tuple
    combiner_angles: tuple
    ris_angles: tuple

    def __post_init__(self):
        if not (len(self.precoders) and len(self.combiners) and len(self.ris_phases)):
            raise ValueError("codebooks must be non-empty")

    @property
    def ris_profiles(self) -> list[RisProfile]:
        return [RisProfile(p) for p in self.ris_phases]

    @cached_property
    def ris_phasors(self) -> np.ndarray:
        return np.exp(1j * self.ris_phases)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.precoders), len(self.combiners), len(self.ris_phases)

    def subset(self, precoders=None, combiners=None, ris=None) -> "Codebooks":
        """Codebooks restricted to the given index lists (``None`` keeps all)."""
        def pick(arr, angles, ids):
            if ids is None:
                return arr, angles
            ids = list(ids)
            return arr[ids], tuple(angles[i] for i in ids)
        p, pa = pick(self.precoders, self.precoder_angles, precoders)
        c, ca = pick(self.combiners, self.combiner_angles, combiners)
        r, ra = pick(self.ris_phases, self.ris_angles, ris)
        return Codebooks(p, c, r, pa, ca, ra)


def nearest_index(angles, target: float) -> int:
    return int(np.argmin([abs(a - target) for a in angles]))


def build_codebooks(scene: Scene, wavelength: float, ue_grid_deg=UE_AP_GRID_DEG,
                    ap_grid_deg=UE_AP_GRID_DEG, ris_grid_deg=RIS_GRID_DEG,
                    phase_bits: int | None = None) -> Codebooks:
    """Codebooks for a scene; RIS gradients are anchored on the UE's LOS incidence."""
    ue_angles = tuple(math.radians(a) for a in ue_grid_deg)
    ap_angles = tuple(math.radians(a) for a in ap_grid_deg)
    ris_angles = tuple(math.radians(a) for a in ris_grid_deg)
    # the UE transmits through a_ue^T, so a matched precoder is the conjugate beam
    precoders = np.conj(np.array(build_beam_codebook(scene.ue_array, wavelength, ue_angles)))
    combiners = np.array(build_beam_codebook(scene.ap_array, wavelength, ap_angles))
    incident = scene.angle("ris", scene.ue)
    profiles = build_ris_codebook(scene.ris_array, wavelength, incident, ris_angles, phase_bits)
    return Codebooks(precoders, combiners, np.array([p.phases for p in profiles]),
                     ue_angles, ap_angles, ris_angles)
