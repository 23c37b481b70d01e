"""Uplink rate, incident power density and weighted exposure."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Position3D


@dataclass(frozen=True)
class RadioConfig:
    bandwidth: float = 8e6          # Hz
    noise_psd: float = 10 ** (-174 / 10) * 1e-3  # W/Hz
    wavelength: float = 299_792_458.0 / 28e9      # m
    max_tx_power: float = 0.1       # W

    def __post_init__(self):
        if not (self.bandwidth > 0 and self.noise_psd > 0 and self.wavelength > 0):
            raise ValueError("bandwidth, noise_psd and wavelength must be > 0")
        if not self.max_tx_power >= 0:
            raise ValueError("max_tx_power must be >= 0")

    @property
    def noise_power(self) -> float:
        return self.noise_psd * self.bandwidth

    @property
    def density_factor(self) -> float:
        """``4*pi/lambda**2``: converts W x |h w|^2 into W/m^2."""
        return 4 * math.pi / self.wavelength**2


@dataclass(frozen=True)
class PixelSet:
    positions: tuple[Position3D, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.positions) != len(self.weights):
            raise ValueError("one weight per pixel required")
        if not self.positions:
            raise ValueError("at least one pixel required")
        if any(w < 0 for w in self.weights):
            raise ValueError("pixel weights must be non-negative")

    @property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


def effective_gain(H, w_u, w_a) -> float:
    """``|w_a^H H w_u|^2``."""
    return float(abs(np.vdot(w_a, H @ w_u)) ** 2)


def rate_from_gain(gain, p_tx, cfg: RadioConfig):
    return cfg.bandwidth * np.log1p(gain * p_tx / cfg.noise_power) / math.log(2)


def uplink_rate(H, w_u, w_a, p_tx: float, cfg: RadioConfig) -> float:
    if p_tx < 0:
        raise ValueError("transmit power must be >= 0")
    return float(rate_from_gain(effective_gain(H, w_u, w_a), p_tx, cfg))


def pixel_power_density(h_p, w_u, p_tx: float, cfg: RadioConfig) -> float:
    if p_tx < 0:
        raise ValueError("transmit power must be >= 0")
    g = abs(np.dot(np.ravel(h_p), w_u)) ** 2
    return float(cfg.density_factor * p_tx * g)


def weighted_emfe(densities, pixels: PixelSet) -> float:
    d = np.asarray(densities, dtype=float)
    if d.shape != (len(pixels.weights),):
        raise ValueError(f"{d.size} densities for {len(pixels.weights)} pixels")
    return float(pixels.weight_array @ d)


def w_to_dbm(x):
    """W (or W/m^2) to dBm (dBm/m^2); zero maps to -inf."""
    with np.errstate(divide="ignore"):
        return 10 * np.log10(np.asarray(x, dtype=float)) + 30
