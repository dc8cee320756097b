"""Exception hierarchy."""


class HomSimError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(HomSimError, ValueError):
    """Invalid model or grid parameters."""


class ArgumentError(HomSimError, ValueError):
    """Invalid call argument (odd ensemble size, bad filter ratio, ...)."""


class DegenerateStateError(HomSimError, ValueError):
    """A superposition cancelled to zero norm."""


class ContractError(HomSimError, ValueError):
    """A precondition on an input object was violated."""


class ModelMismatchError(HomSimError):
    """Coherence model and Fock oracle disagree beyond tolerance."""
