"""Planar node positions, azimuths and uniform-linear-array responses.

Arrays lie in the horizontal plane. The element axis of every array is its
boresight rotated by +90 degrees, so a plane wave leaving (or reaching) the
array at angle ``a`` from boresight has per-element phase
``2*pi*(d/lambda)*i*sin(a)``. The same expression holds for transmission and
reception, which is what makes the RIS cascade reciprocal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class DegenerateGeometryError(ValueError):
    """Two nodes share a position, so no direction is defined between them."""


@dataclass(frozen=True)
class Position3D:
    x: float
    y: float
    z: float = 1.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinates: {self}")

    def distance(self, other: "Position3D") -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))

    def heading(self, other: "Position3D") -> float:
        """Absolute azimuth of the direction self -> other, in radians."""
        dx, dy = other.x - self.x, other.y - self.y
        if dx == 0.0 and dy == 0.0:
            raise DegenerateGeometryError(f"coincident positions {self} and {other}")
        return math.atan2(dy, dx)

    def translated(self, dx: float = 0.0, dy: float = 0.0) -> "Position3D":
        return Position3D(self.x + dx, self.y + dy, self.z)


@dataclass(frozen=True)
class ArraySpec:
    """Uniform linear array.

    ``element_spacing`` of ``None`` means half a wavelength at the carrier in
    use. ``element_exponent`` is the ``q`` of the ``cos(angle)**q`` element
    amplitude pattern and ``element_gain_db`` a constant per-element power
    gain (aperture gain of an element column). A ``two_sided`` array
    radiates into both half-planes with ``|cos(angle)|**q``.
    """

    num_elements: int
    boresight_azimuth: float = 0.0
    element_exponent: float = 1.0
    element_spacing: float | None = None
    element_gain_db: float = 0.0
    two_sided: bool = False

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError("num_elements must be >= 1")
        if self.element_spacing is not None and not self.element_spacing > 0:
            raise ValueError("element_spacing must be > 0")
        if self.element_exponent < 0:
            raise ValueError("element_exponent must be >= 0")

    def spacing(self, wavelength: float) -> float:
        return wavelength / 2 if self.element_spacing is None else self.element_spacing


def wrap_angle(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, 2 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def azimuth_between(src: Position3D, dst: Position3D, boresight: float) -> float:
    """Angle of the src -> dst direction measured from ``boresight``, in (-pi, pi]."""
    return wrap_angle(src.heading(dst) - boresight)


def steering_vector(spec: ArraySpec, wavelength: float, angle: float) -> np.ndarray:
    if not wavelength > 0:
        raise ValueError("wavelength must be > 0")
    kd = 2 * np.pi * spec.spacing(wavelength) / wavelength
    return np.exp(1j * kd * np.arange(spec.num_elements) * np.sin(angle))


def element_gain(spec: ArraySpec, angle: float) -> float:
    """Amplitude pattern ``cos(angle)**q`` in the front half-plane, zero behind."""
    a = abs(wrap_angle(angle))
    if spec.two_sided:
        a = min(a, math.pi - a)
    # cos(pi/2) is 6e-17 in floating point; grazing must be exactly zero
    if a >= math.pi / 2:
        return 0.0
    return math.cos(a) ** spec.element_exponent


@dataclass(frozen=True)
class Scene:
    """Node positions and arrays of one deployment.

    Boresights stored in the array specs are used as given; :meth:`facing`
    builds a scene with the default orientation rule (UE and AP face each
    other, the RIS faces the AP).
    """

    ue: Position3D
    ap: Position3D
    ris: Position3D
    pixels: tuple[Position3D, ...]
    ue_array: ArraySpec
    ap_array: ArraySpec
    ris_array: ArraySpec

    def __post_init__(self):
        nodes = [self.ue, self.ap, self.ris, *self.pixels]
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                if a.x == b.x and a.y == b.y:
                    raise DegenerateGeometryError(f"coincident positions {a} and {b}")

    @classmethod
    def facing(cls, ue, ap, ris, pixels, ue_array, ap_array, ris_array, boresights=None):
        """Build a scene, orienting each array unless ``boresights[name]`` is given."""
        boresights = boresights or {}
        auto = {"ue": ue.heading(ap), "ap": ap.heading(ue), "ris": ris.heading(ap)}
        auto.update({k: v for k, v in boresights.items() if v is not None})
        return cls(
            ue, ap, ris, tuple(pixels),
            replace(ue_array, boresight_azimuth=auto["ue"]),
            replace(ap_array, boresight_azimuth=auto["ap"]),
            replace(ris_array, boresight_azimuth=auto["ris"]),
        )

    def angle(self, node: str, target: Position3D) -> float:
        """Azimuth of ``target`` seen from ``node`` ('ue', 'ap' or 'ris'), from boresight."""
        pos = getattr(self, node)
        spec = getattr(self, f"{node}_array")
        return azimuth_between(pos, target, spec.boresight_azimuth)
