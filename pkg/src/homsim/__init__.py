"""Hong-Ou-Mandel coincidence simulator.

Two independent routes to the two-photon dip behind a 50/50 beam splitter:
a wave-coherence model of photon pairs with Gaussian detuning
(:mod:`homsim.coherence`) and a discretized two-photon Fock-state oracle
(:mod:`homsim.fock`).
"""

from ._kernels import BACKEND
from .coherence import (
    CoincidenceCurve,
    IntensityPair,
    analytic_coincidence,
    delta_phi,
    ensemble_coincidence,
    output_intensities,
    pair_coincidence,
    scan,
)
from .config import RunConfig
from .errors import (
    ArgumentError,
    ConfigurationError,
    ContractError,
    DegenerateStateError,
    HomSimError,
    ModelMismatchError,
)
from .experiments import ExperimentReport, run_experiment
from .fock import (
    FrequencyGrid,
    TwoPhotonState,
    coincidence_probability,
    make_entangled_state,
    make_product_state,
    witness_compare,
)
from .spectra import PhotonPair, SpectralModel, apply_filter, pdf, sample_pairs

__version__ = "0.1.0"
