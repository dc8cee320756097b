"""Wave-coherence beam-splitter model of a photon pair.

All intensities are in units of the single-photon intensity, so the
coincidence of a pair is the product of its two port intensities and lies
in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ArgumentError, ConfigurationError
from .spectra import PairEnsemble, PhotonPair, SpectralModel, sample_pairs

MODEL_TAGS = ("coherence-shifted", "coherence-unshifted", "coherence-analytic", "fock")

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class IntensityPair:
    i_a: float
    i_b: float


@dataclass(frozen=True, eq=False)
class CoincidenceCurve:
    """Normalized coincidence sampled on a delay grid."""

    tau_grid: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    model_tag: str
    bandwidth_ratio: float = 1.0
    label: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        tau = np.asarray(self.tau_grid, dtype=np.float64)
        val = np.asarray(self.values, dtype=np.float64)
        err = np.asarray(self.std_errors, dtype=np.float64)
        object.__setattr__(self, "tau_grid", tau)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "std_errors", err)
        if self.model_tag not in MODEL_TAGS:
            raise ConfigurationError(f"unknown model tag {self.model_tag!r}")
        if not (tau.ndim == val.ndim == err.ndim == 1 and tau.size == val.size == err.size):
            raise ConfigurationError("tau_grid, values and std_errors must be 1-d and equal length")
        if tau.size > 1 and not np.all(np.diff(tau) > 0):
            raise ConfigurationError("tau_grid must be strictly increasing")
        # Tiny overshoot allowed for quadrature round-off.
        if val.size and (val.min() < -1e-12 or val.max() > 1 + 1e-12):
            raise ConfigurationError("coincidence values must lie in [0, 1]")

    def __len__(self):
        return self.tau_grid.size

    def __eq__(self, other):
        if not isinstance(other, CoincidenceCurve):
            return NotImplemented
        return (
            self.model_tag == other.model_tag
            and self.bandwidth_ratio == other.bandwidth_ratio
            and self.label == other.label
            and self.extra == other.extra
            and np.array_equal(self.tau_grid, other.tau_grid)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.std_errors, other.std_errors)
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "model": self.model_tag,
            "bandwidth_ratio": self.bandwidth_ratio,
            "tau": self.tau_grid.tolist(),
            "coincidence": self.values.tolist(),
            "std_error": self.std_errors.tolist(),
            "extra": dict(self.extra),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoincidenceCurve":
        return cls(
            tau_grid=np.array(d["tau"], dtype=np.float64),
            values=np.array(d["coincidence"], dtype=np.float64),
            std_errors=np.array(d["std_error"], dtype=np.float64),
            model_tag=d["model"],
            bandwidth_ratio=d["bandwidth_ratio"],
            label=d.get("label", ""),
            extra=dict(d.get("extra", {})),
        )


def delta_phi(pair: PhotonPair, tau: float, shifted: bool = False) -> float:
    """Phase difference of the pair at delay ``tau``, optionally with the pi/2 shift."""
    phi = pair.delta_f * tau
    if shifted:
        phi += pair.shift_convention * HALF_PI
    return phi


def output_intensities(pair: PhotonPair, tau: float) -> IntensityPair:
    s = math.sin(delta_phi(pair, tau))
    return IntensityPair(1.0 - s, 1.0 + s)


def port_intensities(delta_f, tau):
    """Vectorized :func:`output_intensities`: arrays ``(i_a, i_b)``."""
    s = np.sin(np.asarray(delta_f, dtype=np.float64) * tau)
    return 1.0 - s, 1.0 + s


def shifted_port_product(pair: PhotonPair, tau: float) -> float:
    """Coincidence built literally from pi/2-shifted port intensities.

    Equal to ``sin(delta_f*tau)**2`` up to rounding; kept as the long-hand
    route that :func:`pair_coincidence` is checked against.
    """
    s = math.sin(delta_phi(pair, tau, shifted=True))
    return (1.0 - s) * (1.0 + s)


def pair_coincidence(pair: PhotonPair, tau: float, shifted: bool = True) -> float:
    """Normalized coincidence of one pair.

    Unshifted pairs give ``cos^2(delta_f*tau)``; with the pi/2 shift the
    product of port intensities turns into ``sin^2(delta_f*tau)``. The shift
    sign drops out, so the closed form is used and the zero-delay dip is
    exactly zero.
    """
    x = pair.delta_f * tau
    y = math.sin(x) if shifted else math.cos(x)
    return y * y


def _ensemble_moments(ensemble: PairEnsemble, taus, shifted):
    return _kernels.coincidence_moments(ensemble.delta_f, taus, shifted, ensemble.block)


def ensemble_coincidence(
    model: SpectralModel, tau: float, n: int, seed: int, shifted: bool = True
) -> tuple[float, float]:
    """Monte Carlo mean coincidence and its standard error at one delay.

    The standard error counts antithetic couples, not pairs, as the
    independent samples; stratification makes it an upper bound.
    """
    ensemble = sample_pairs(model, n, seed)
    mean, err = _ensemble_moments(ensemble, np.array([tau], dtype=np.float64), shifted)
    return float(mean[0]), float(err[0])


def analytic_coincidence(model: SpectralModel, tau, shifted: bool = True):
    """Gaussian ensemble average of the pair coincidence in closed form.

    ``E[sin^2((mu + X) tau)] = (1 - exp(-2 s^2 tau^2) cos(2 mu tau)) / 2`` for
    ``X ~ N(0, s^2)``; the unshifted cos^2 average is one minus that.
    """
    tau = np.asarray(tau, dtype=np.float64)
    s = model.effective_sigma
    mu = model.mean_offset
    envelope = np.exp(-2.0 * (s * tau) ** 2)
    if mu == 0.0:
        out = -0.5 * np.expm1(-2.0 * (s * tau) ** 2) if shifted else 0.5 * (1.0 + envelope)
    else:
        fringe = envelope * np.cos(2.0 * mu * tau)
        out = 0.5 * (1.0 - fringe) if shifted else 0.5 * (1.0 + fringe)
    return out if out.ndim else float(out)


def scan(
    model: SpectralModel,
    tau_grid,
    n: int = 100_000,
    seed: int = 7,
    shifted: bool = True,
    analytic: bool = False,
    ensemble: PairEnsemble | None = None,
) -> CoincidenceCurve:
    """Coincidence curve over ``tau_grid``.

    Monte Carlo scans draw one ensemble and sweep every pair through all
    delays. Pass ``ensemble`` to reuse an existing draw across scans.
    """
    taus = np.asarray(tau_grid, dtype=np.float64)
    if taus.ndim != 1 or taus.size == 0:
        raise ArgumentError("tau_grid must be a non-empty 1-d sequence")
    if analytic:
        values = np.atleast_1d(analytic_coincidence(model, taus, shifted))
        errors = np.zeros_like(values)
        tag = "coherence-analytic" if shifted else "coherence-unshifted"
        label = "analytic" if shifted else "analytic-unshifted"
    else:
        if ensemble is None:
            ensemble = sample_pairs(model, n, seed)
        values, errors = _ensemble_moments(ensemble, taus, shifted)
        tag = "coherence-shifted" if shifted else "coherence-unshifted"
        label = "monte-carlo" if shifted else "monte-carlo-unshifted"
    return CoincidenceCurve(
        tau_grid=taus,
        values=values,
        std_errors=errors,
        model_tag=tag,
        bandwidth_ratio=model.bandwidth_ratio,
        label=label,
    )
