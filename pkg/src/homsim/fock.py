"""Two-photon Fock-state reference for coincidence behind a 50/50 splitter.

A pair is described by its joint spectral amplitude ``psi(w1, w2)`` on a
uniform grid of detunings from the degenerate frequency; index 1 is input
port 1 (the delayed arm), index 2 is input port 2.

Spectral parameters
-------------------
``sigma`` is the marginal standard deviation of each photon's spectrum.
``ridge_width`` is the standard deviation of the sum frequency
``w1 + w2``. ``None`` means a separable product (``ridge_width =
sqrt(2)*sigma``); smaller values model the energy-conservation ridge of
down-conversion. The half difference ``(w1 - w2)/2`` then has standard
deviation ``sqrt(sigma**2 - ridge_width**2/4)``, which is the detuning
width the coherence model sees (see :func:`coherence_sigma`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.special import ndtr

from . import _kernels
from .errors import ArgumentError, ConfigurationError, ContractError, DegenerateStateError

BEAM_SPLITTER = np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=np.complex128) / math.sqrt(2.0)

NORM_TOL = 1e-10
TAIL_TOL = 1e-6


def beam_splitter_matrix() -> np.ndarray:
    """Lossless 50/50 splitter, reflection picks up a phase of i."""
    return BEAM_SPLITTER.copy()


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if p.ndim != 1 or p.size < 3:
            raise ConfigurationError("frequency grid needs at least 3 points")
        if w.shape != p.shape:
            raise ConfigurationError("weights must match points")
        if not np.all(np.diff(p) > 0):
            raise ConfigurationError("grid points must be strictly increasing")
        p.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "FrequencyGrid":
        """Trapezoid rule on ``n`` equally spaced points."""
        points = np.linspace(lo, hi, int(n))
        h = points[1] - points[0]
        weights = np.full(points.size, h)
        weights[[0, -1]] = 0.5 * h
        return cls(points, weights)

    @classmethod
    def covering(
        cls, sigma: float, center_split: float = 0.0, n_points: int = 257, n_sigma: float = 8.0
    ) -> "FrequencyGrid":
        """Symmetric grid reaching ``n_sigma`` marginal widths past both photon centres."""
        half = abs(center_split) + n_sigma * sigma
        return cls.uniform(-half, half, n_points)

    @property
    def size(self) -> int:
        return self.points.size

    def refined(self) -> "FrequencyGrid":
        """Same span with the spacing halved."""
        return FrequencyGrid.uniform(self.points[0], self.points[-1], 2 * self.size - 1)


@dataclass(frozen=True, eq=False)
class TwoPhotonState:
    amplitude: np.ndarray
    grid: FrequencyGrid
    kind: str
    psi_rel: float | None = None

    def norm(self) -> float:
        w = self.grid.weights
        return float(np.einsum("i,j,ij->", w, w, np.abs(self.amplitude) ** 2))

    def swapped(self) -> np.ndarray:
        """Amplitude with the two ports exchanged, psi(w2, w1)."""
        return self.amplitude.T

    def exchange_overlap(self) -> complex:
        """sum_ij w_i w_j psi(w_i, w_j) conj(psi(w_j, w_i)); 1 for symmetric states."""
        return complex(_kernels.exchange_overlap(self._kernel(), self.grid.points, np.zeros(1))[0])

    def _kernel(self) -> np.ndarray:
        w = self.grid.weights
        return np.outer(w, w) * self.amplitude * np.conj(self.swapped())


def coherence_sigma(sigma: float, ridge_width: float | None = None) -> float:
    """Detuning width of the equivalent coherence model.

    The exchange overlap of a state with difference-frequency spread ``b``
    is ``exp(-b**2 tau**2 / 2)``; matching it to the coherence model's
    ``exp(-2 s**2 tau**2)`` gives ``s = b/2``.
    """
    a = math.sqrt(2.0) * sigma if ridge_width is None else ridge_width
    return math.sqrt(sigma**2 - 0.25 * a**2)


def fock_sigma(coherence_width: float, ridge_width: float | None = None) -> float:
    """Inverse of :func:`coherence_sigma`: marginal photon width for a target detuning width."""
    if ridge_width is None:
        return math.sqrt(2.0) * coherence_width
    return math.sqrt(coherence_width**2 + 0.25 * ridge_width**2)


def _check_parameters(grid, sigma, center_split, ridge_width):
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ConfigurationError(f"sigma must be positive, got {sigma!r}")
    if ridge_width is not None and not (0 < ridge_width < 2.0 * sigma):
        raise ConfigurationError(
            f"ridge_width must lie in (0, 2*sigma) = (0, {2 * sigma!r}), got {ridge_width!r}"
        )
    lo, hi = grid.points[0], grid.points[-1]
    for centre in (center_split, -center_split):
        tail = ndtr((lo - centre) / sigma) + ndtr((centre - hi) / sigma)
        if tail > TAIL_TOL:
            raise ConfigurationError(
                f"grid [{lo:g}, {hi:g}] too narrow: spectral tail mass {tail:.2e} outside grid"
            )


def _joint_amplitude(grid, sigma, center_split, ridge_width):
    """Unnormalized real Gaussian psi(w1, w2): signal at +split on port 1, idler at -split."""
    w1 = grid.points[:, None]
    w2 = grid.points[None, :]
    if ridge_width is None:
        return np.exp(-((w1 - center_split) ** 2) / (4 * sigma**2)) * np.exp(
            -((w2 + center_split) ** 2) / (4 * sigma**2)
        )
    b2 = 4.0 * sigma**2 - ridge_width**2
    total = w1 + w2
    diff = w1 - w2 - 2.0 * center_split
    return np.exp(-(total**2) / (4 * ridge_width**2) - diff**2 / (4 * b2))


def _normalized(amplitude, grid):
    w = grid.weights
    norm2 = float(np.einsum("i,j,ij->", w, w, np.abs(amplitude) ** 2))
    return amplitude / math.sqrt(norm2), norm2


def make_product_state(
    grid: FrequencyGrid,
    sigma: float,
    center_split: float = 0.0,
    ridge_width: float | None = None,
) -> TwoPhotonState:
    """Signal in port 1, idler in port 2, no exchange superposition."""
    _check_parameters(grid, sigma, center_split, ridge_width)
    amp, _ = _normalized(_joint_amplitude(grid, sigma, center_split, ridge_width), grid)
    return TwoPhotonState(amp.astype(np.complex128), grid, "product")


def make_entangled_state(
    grid: FrequencyGrid,
    sigma: float,
    center_split: float,
    psi_rel: float,
    ridge_width: float | None = None,
) -> TwoPhotonState:
    """Path superposition (signal_1 idler_2 + e^{i psi_rel} signal_2 idler_1), normalized."""
    _check_parameters(grid, sigma, center_split, ridge_width)
    base, _ = _normalized(_joint_amplitude(grid, sigma, center_split, ridge_width), grid)
    amp = base.astype(np.complex128) + np.exp(1j * psi_rel) * base.T
    amp, norm2 = _normalized(amp, grid)
    if norm2 < 1e-12:
        raise DegenerateStateError(
            f"superposition with psi_rel={psi_rel!r} cancels to zero norm ({norm2:.1e})"
        )
    return TwoPhotonState(amp, grid, "entangled", psi_rel=float(psi_rel))


def _require_normalized(state: TwoPhotonState):
    n = state.norm()
    if abs(n - 1.0) > NORM_TOL:
        raise ContractError(f"state is not normalized (norm {n!r})")


def coincidence_probability(state: TwoPhotonState, tau):
    """Probability of one photon in each output port, delay ``tau`` on port 1.

    ``P = (1 - Re sum_ij w_i w_j psi_ij conj(psi_ji) e^{i(w_i - w_j) tau}) / 2``
    """
    _require_normalized(state)
    taus = np.atleast_1d(np.asarray(tau, dtype=np.float64))
    overlap = _kernels.exchange_overlap(state._kernel(), state.grid.points, taus)
    p = np.clip(0.5 * (1.0 - overlap.real), 0.0, 1.0)
    return p if np.ndim(tau) else float(p[0])


def coincidence_by_transform(state: TwoPhotonState, tau: float, u: np.ndarray | None = None) -> float:
    """Coincidence from the explicit splitter transform of the creation operators.

    The output amplitude for a photon at frequency x in port A and y in
    port B is ``U_A1 U_B2 psi(x, y) e^{ix tau} + U_B1 U_A2 psi(y, x) e^{iy tau}``;
    its squared norm is the coincidence probability. Slower than
    :func:`coincidence_probability` and used to cross-check it.
    """
    _require_normalized(state)
    u = BEAM_SPLITTER if u is None else np.asarray(u)
    x = state.grid.points
    delayed = state.amplitude * np.exp(1j * x * tau)[:, None]
    amp = u[0, 0] * u[1, 1] * delayed + u[1, 0] * u[0, 1] * delayed.T
    w = state.grid.weights
    return float(np.einsum("i,j,ij->", w, w, np.abs(amp) ** 2))


def fit_dip_rate(taus, values) -> tuple[float, float]:
    """Least-squares ``k`` in ``(1 - exp(-k tau^2))/2`` and the max residual."""
    taus = np.asarray(taus, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if taus.size < 2:
        raise ArgumentError("need at least two delays to fit")

    def resid(p):
        return -0.5 * np.expm1(-p[0] * taus**2) - values

    # Start from the first informative point's inversion.
    mask = (values > 1e-6) & (values < 0.5 - 1e-6)
    if mask.any():
        i = np.flatnonzero(mask)[0]
        k0 = -math.log1p(-2.0 * values[i]) / taus[i] ** 2
    else:
        k0 = 1.0
    sol = least_squares(resid, x0=[k0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return float(sol.x[0]), float(np.max(np.abs(sol.fun)))


@dataclass(frozen=True, eq=False)
class WitnessReport:
    tau_grid: np.ndarray
    product_curve: np.ndarray
    entangled_curve: np.ndarray
    dip_depth_product: float
    dip_depth_entangled: float
    max_curve_gap: float


def dip_depth(curve) -> float:
    """1 - P(0)/P(tau_max), relative to the plateau at the end of the grid."""
    return 1.0 - float(curve[0]) / float(curve[-1])


def witness_compare(
    grid: FrequencyGrid,
    sigma: float,
    center_split: float,
    psi_rel: float,
    tau_grid,
    ridge_width: float | None = None,
) -> WitnessReport:
    """Compare the coincidence curves of a product and an entangled input."""
    taus = np.asarray(tau_grid, dtype=np.float64)
    product = make_product_state(grid, sigma, center_split, ridge_width)
    entangled = make_entangled_state(grid, sigma, center_split, psi_rel, ridge_width)
    p_prod = coincidence_probability(product, taus)
    p_ent = coincidence_probability(entangled, taus)
    return WitnessReport(
        tau_grid=taus,
        product_curve=p_prod,
        entangled_curve=p_ent,
        dip_depth_product=dip_depth(p_prod),
        dip_depth_entangled=dip_depth(p_ent),
        max_curve_gap=float(np.max(np.abs(p_prod - p_ent))),
    )
