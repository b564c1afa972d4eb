"""Exception hierarchy for the pipeline."""


class PromptSRError(Exception):
    """Base class for all package errors."""


class ConfigError(PromptSRError):
    """Invalid configuration: bad value, unknown key, missing file."""


class DegradationError(PromptSRError):
    """Degradation chain produced an invalid intermediate (e.g. too small)."""


class VocabularyError(PromptSRError):
    """Tag outside the shared vocabulary."""


class CheckpointError(PromptSRError):
    """Missing, corrupt, or wrong-kind checkpoint."""


class StateError(PromptSRError):
    """Operation invoked on a model in the wrong state (e.g. untrained)."""


class NumericError(PromptSRError):
    """Non-finite values where finite numerics are required."""
