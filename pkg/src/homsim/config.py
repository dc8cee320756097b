"""Run configuration shared by the experiment runner and the CLI."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import ConfigurationError

DEFAULT_SEED = 20220625
MODELS = ("coherence", "coherence-unshifted", "fock")
FORMATS = ("csv", "json")
FIG1D_RATIOS = (1.0, 0.75, 0.5, 0.25)


@dataclass(frozen=True)
class RunConfig:
    model: str = "coherence"
    sigma: float = 1.0
    mean_offset: float = 0.0
    bandwidth_ratio: float = 1.0
    tau_max: float | None = None
    tau_steps: int = 65
    n_pairs: int = 100_000
    seed: int = DEFAULT_SEED
    analytic: bool = False
    output_format: str = "csv"
    output_path: str | None = None
    ratios: tuple[float, ...] = FIG1D_RATIOS
    center_split: float = 0.0
    psi_rel: float = 0.0
    ridge_width: float | None = None
    grid_points: int = 257
    command: str = "scan"

    def __post_init__(self):
        problems = self.problems()
        if problems:
            err = ConfigurationError("; ".join(problems))
            err.problems = problems
            raise err

    def problems(self) -> list[str]:
        """One message per invalid field."""
        out = []
        if self.model not in MODELS:
            out.append(f"model must be one of {', '.join(MODELS)}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            out.append("sigma must be positive")
        if not math.isfinite(self.mean_offset):
            out.append("mean-offset must be finite")
        if not (0 < self.bandwidth_ratio <= 1):
            out.append("bandwidth-ratio must lie in (0, 1]")
        if self.tau_max is not None and not (math.isfinite(self.tau_max) and self.tau_max > 0):
            out.append("tau-max must be positive")
        if self.tau_steps < 2:
            out.append("tau-steps must be at least 2")
        if self.n_pairs < 2:
            out.append("n-pairs must be at least 2")
        elif self.n_pairs % 2:
            out.append("n-pairs must be even")
        if self.output_format not in FORMATS:
            out.append("format must be csv or json")
        if not self.ratios or any(not (0 < r <= 1) for r in self.ratios):
            out.append("ratios must all lie in (0, 1]")
        if not math.isfinite(self.center_split):
            out.append("center-split must be finite")
        if not math.isfinite(self.psi_rel):
            out.append("psi-rel must be finite")
        if self.ridge_width is not None and not (self.ridge_width > 0):
            out.append("ridge-width must be positive")
        if self.grid_points < 3:
            out.append("grid-points must be at least 3")
        return out

    @property
    def effective_sigma(self) -> float:
        return self.sigma * self.bandwidth_ratio

    def resolved_tau_max(self, default_units: float = 4.0) -> float:
        """``tau_max`` or ``default_units`` inverse unfiltered widths."""
        return self.tau_max if self.tau_max is not None else default_units / self.sigma

    def to_dict(self) -> dict:
        """Echo of the run parameters; the output path is left out so reports do not depend on it."""
        d = asdict(self)
        d["ratios"] = list(self.ratios)
        del d["output_path"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "ratios" in d:
            d["ratios"] = tuple(d["ratios"])
        return cls(**d)
