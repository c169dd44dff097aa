"""Fading + AWGN channel simulation with perfect CSI.

Noise convention: ``sigma2`` is the TOTAL variance of the complex noise
sample (sigma2/2 per real dimension).  Fading is normalized to unit mean
square, E[|H|^2] = 1, for every model.  Fading phase is uniform; with
coherent combining under perfect CSI the block error rate is invariant to
the phase, so this is a free (but pinned) choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import ObservationGrid

CHANNEL_KINDS = ("awgn", "rayleigh", "nakagami")


@dataclass(frozen=True)
class ChannelModel:
    """AWGN (h = 1), Rayleigh, or Nakagami-m fading, all with E[|H|^2] = 1."""

    kind: str
    m: float = float("nan")

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(
                f"channel must be one of {CHANNEL_KINDS}, got {self.kind!r}"
            )
        if self.kind == "nakagami":
            if not (math.isfinite(self.m) and self.m >= 0.5):
                raise ValueError(f"nakagami shape m must be >= 0.5, got {self.m}")

    @classmethod
    def awgn(cls) -> "ChannelModel":
        return cls("awgn")

    @classmethod
    def rayleigh(cls) -> "ChannelModel":
        return cls("rayleigh")

    @classmethod
    def nakagami(cls, m: float) -> "ChannelModel":
        return cls("nakagami", m=m)

    def label(self) -> str:
        if self.kind == "nakagami":
            return f"nakagami(m={self.m:g})"
        return self.kind


@dataclass(frozen=True)
class NoiseSpec:
    """Total complex noise variance and the average SNR it was derived from."""

    sigma2: float
    gamma_db: float


def sigma_from_snr(gamma_db: float, c: int, d_min: float) -> NoiseSpec:
    """Noise variance for square QAM at average SNR gamma_db.

    Uses gamma = (2^c - 1) d_min^2 / (6 sigma^2), the mean symbol energy of
    the 2^(c/2) x 2^(c/2) grid over the total noise variance.
    """
    if c % 2 != 0:
        raise ValueError(f"c must be even, got {c}")
    gamma_lin = 10.0 ** (gamma_db / 10.0)
    sigma2 = ((1 << c) - 1) * d_min * d_min / (6.0 * gamma_lin)
    return NoiseSpec(sigma2=sigma2, gamma_db=gamma_db)


def snr_from_sigma(sigma2: float, c: int, d_min: float) -> float:
    """Inverse of sigma_from_snr; returns the SNR in dB."""
    if c % 2 != 0:
        raise ValueError(f"c must be even, got {c}")
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    gamma_lin = ((1 << c) - 1) * d_min * d_min / (6.0 * sigma2)
    return 10.0 * math.log10(gamma_lin)


def sample_fading(model: ChannelModel, rng: np.random.Generator,
                  size=None) -> np.ndarray | complex:
    """Draw i.i.d. fading coefficients h with E[|h|^2] = 1.

    awgn      h = 1 exactly.
    rayleigh  |h|^2 ~ Exp(1), phase uniform.
    nakagami  |h|^2 ~ Gamma(shape m, scale 1/m), phase uniform; sampled
              through the squared modulus, which is exact and rejection-free.
    """
    if model.kind == "awgn":
        if size is None:
            return 1.0 + 0.0j
        return np.ones(size, dtype=np.complex128)
    if model.kind == "rayleigh":
        power = rng.exponential(1.0, size=size)
    else:
        power = rng.gamma(shape=model.m, scale=1.0 / model.m, size=size)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=size)
    h = np.sqrt(power) * np.exp(1j * phase)
    if size is None:
        return complex(h)
    return h


def sample_noise(sigma2: float, rng: np.random.Generator, size) -> np.ndarray:
    """Circularly symmetric complex Gaussian noise with total variance sigma2."""
    scale = math.sqrt(sigma2 / 2.0) if sigma2 > 0 else 0.0
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def transmit(grid: np.ndarray, model: ChannelModel, noise: NoiseSpec,
             rng: np.random.Generator) -> ObservationGrid:
    """Push a coded symbol grid through the channel: y = h*x + n per entry.

    Draw order is pinned (fading first, then noise) so a given rng stream
    always yields the same observations.
    """
    x = np.asarray(grid, dtype=np.complex128)
    h = sample_fading(model, rng, size=x.shape)
    n = sample_noise(noise.sigma2, rng, size=x.shape)
    return ObservationGrid(y=h * x + n, h=h)
