"""Shared exception types."""


class MvrsError(Exception):
    """Base class for package-specific failures."""


class NormalizationError(MvrsError, ValueError):
    """A vector could not be scaled to unit length (zero or non-finite norm)."""


class ProviderUnavailableError(MvrsError, RuntimeError):
    """A remote embedding/mask provider did not answer after retries."""


class ProtocolError(MvrsError, RuntimeError):
    """A remote provider answered with a malformed or mismatched payload."""


class CorruptIndexError(MvrsError, RuntimeError):
    """An index file failed magic/version/size validation."""


class MaskFormatError(MvrsError, ValueError):
    """A run-length mask or mask artifact failed validation."""


class PredictorError(MvrsError, RuntimeError):
    """A mask predictor failed; the message carries the frame range."""
