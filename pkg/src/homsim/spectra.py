"""Gaussian detuning spectrum of down-converted photon pairs and pair sampling."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtri

from . import _kernels
from .errors import ArgumentError, ConfigurationError

# Stream ids for the counter-based generator; one per random quantity.
_STREAM_STRATA = 0
_STREAM_PHASE = 1
_STREAM_SIGN = 2
_STREAM_IID = 3

_BELOW_ONE = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class SpectralModel:
    """Gaussian distribution of the per-pair detuning.

    Attributes
    ----------
    sigma : float
        Unfiltered standard deviation of the detuning, rad/s.
    mean_offset : float
        Centre of the distribution, rad/s.
    bandwidth_ratio : float
        Spectral filter factor in (0, 1]; the filtered width is
        ``bandwidth_ratio * sigma``.
    """

    sigma: float
    mean_offset: float = 0.0
    bandwidth_ratio: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigurationError(f"sigma must be a positive finite number, got {self.sigma!r}")
        if not math.isfinite(self.mean_offset):
            raise ConfigurationError(f"mean_offset must be finite, got {self.mean_offset!r}")
        if not (0 < self.bandwidth_ratio <= 1):
            raise ConfigurationError(
                f"bandwidth_ratio must lie in (0, 1], got {self.bandwidth_ratio!r}"
            )

    @property
    def effective_sigma(self) -> float:
        return self.bandwidth_ratio * self.sigma


@dataclass(frozen=True)
class PhotonPair:
    delta_f: float
    global_phase: float = 0.0
    shift_convention: int = 1

    def __post_init__(self):
        if self.shift_convention not in (1, -1):
            raise ArgumentError("shift_convention must be +1 or -1")


class PairEnsemble(Sequence):
    """Array-backed, read-only sequence of :class:`PhotonPair`.

    ``block`` is the number of consecutive pairs that share one random draw
    (2 for antithetic couples, 1 for independent pairs); ensemble statistics
    use it to count independent samples.
    """

    def __init__(self, delta_f, global_phase, shift_convention, block=2):
        self.delta_f = np.asarray(delta_f, dtype=np.float64)
        self.global_phase = np.asarray(global_phase, dtype=np.float64)
        self.shift_convention = np.asarray(shift_convention, dtype=np.int8)
        self.block = int(block)
        for arr in (self.delta_f, self.global_phase, self.shift_convention):
            arr.flags.writeable = False
        if not (self.delta_f.shape == self.global_phase.shape == self.shift_convention.shape):
            raise ArgumentError("ensemble arrays must have equal length")

    def __len__(self):
        return self.delta_f.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return PhotonPair(
            float(self.delta_f[i]), float(self.global_phase[i]), int(self.shift_convention[i])
        )

    def __eq__(self, other):
        if not isinstance(other, PairEnsemble):
            return NotImplemented
        return (
            self.block == other.block
            and np.array_equal(self.delta_f, other.delta_f)
            and np.array_equal(self.global_phase, other.global_phase)
            and np.array_equal(self.shift_convention, other.shift_convention)
        )

    __hash__ = None


def pdf(model: SpectralModel, delta_f):
    """Probability density of the detuning, in s/rad."""
    s = model.effective_sigma
    x = (np.asarray(delta_f, dtype=np.float64) - model.mean_offset) / s
    out = np.exp(-0.5 * x * x) / (s * math.sqrt(2.0 * math.pi))
    return out if out.ndim else float(out)


def apply_filter(model: SpectralModel, ratio: float) -> SpectralModel:
    """Narrow the spectrum by ``ratio``; filters compose multiplicatively."""
    if not (0 < ratio <= 1):
        raise ArgumentError(f"filter ratio must lie in (0, 1], got {ratio!r}")
    return replace(model, bandwidth_ratio=model.bandwidth_ratio * ratio)


def standard_normals(seed: int, count: int, stratified: bool = True) -> np.ndarray:
    """Standard normal deviates from the counter-based stream.

    With ``stratified`` the unit interval is cut into ``count`` equal strata
    and deviate ``k`` is the inverse CDF of a uniform draw inside stratum
    ``k``. Every deviate depends only on ``(seed, k, count)``.
    """
    if stratified:
        v = _kernels.counter_uniforms(_kernels.stream_key(seed, _STREAM_STRATA), 0, count)
        u = np.minimum((np.arange(count, dtype=np.float64) + v) / count, _BELOW_ONE)
    else:
        u = _kernels.counter_uniforms(_kernels.stream_key(seed, _STREAM_IID), 0, count)
    return ndtri(u)


def sample_pairs(model: SpectralModel, n: int, seed: int, antithetic: bool = True) -> PairEnsemble:
    """Draw ``n`` photon pairs from ``model``.

    The default scheme emits stratified antithetic couples
    ``(mu + s*z_k, mu - s*z_k)`` so that odd functions of the detuning
    average to zero exactly. ``antithetic=False`` gives plain independent
    draws and is only meant as a statistical control.
    """
    n = int(n)
    if antithetic:
        if n < 2 or n % 2:
            raise ArgumentError(f"antithetic sampling needs an even n >= 2, got {n}")
        z = standard_normals(seed, n // 2, stratified=True)
        spread = model.effective_sigma * z
        delta_f = np.empty(n)
        delta_f[0::2] = model.mean_offset + spread
        delta_f[1::2] = model.mean_offset - spread
        block = 2
    else:
        if n < 1:
            raise ArgumentError(f"n must be positive, got {n}")
        delta_f = model.mean_offset + model.effective_sigma * standard_normals(
            seed, n, stratified=False
        )
        block = 1
    phase = 2.0 * math.pi * _kernels.counter_uniforms(
        _kernels.stream_key(seed, _STREAM_PHASE), 0, n
    )
    sign_u = _kernels.counter_uniforms(_kernels.stream_key(seed, _STREAM_SIGN), 0, n)
    signs = np.where(sign_u < 0.5, 1, -1).astype(np.int8)
    return PairEnsemble(delta_f, phase, signs, block=block)
