"""Exception types raised by wavepitch."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class ConfigurationError(ValueError):
    """An analysis configuration is inconsistent with its input."""


class WavError(Exception):
    """Base class for WAV ingestion failures."""


class MalformedWavError(WavError):
    pass


class UnsupportedEncodingError(WavError):
    pass


class ChannelSelectionError(WavError):
    pass
