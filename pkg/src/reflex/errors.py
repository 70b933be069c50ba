"""Exception types shared across the engine."""


class ReflexError(Exception):
    """Base class for all engine errors."""


class OutOfOrderEvent(ReflexError):
    """An event arrived with a timestamp earlier than the session clock."""


class MalformedPayload(ReflexError):
    """Event payload does not match its declared kind."""


class NonMonotoneTimestamp(ReflexError):
    """Prosody frame timestamps must be strictly increasing."""


class EmptyTrack(ReflexError):
    """Feature extraction requested on a track with no prosody frames."""


class SchemaMismatch(ReflexError):
    """Feature vector schema does not match the model's schema."""


class NonFiniteFeature(ReflexError):
    """A feature vector contains NaN or infinity."""


class ModelIoError(ReflexError):
    """Model file could not be read or written."""


class VersionMismatch(ReflexError):
    """Model file has an unsupported format version."""


class IllegalTransition(ReflexError):
    """Turn-machine input is not defined for the current state."""


class MissingFocus(ReflexError):
    """A focus-based response was requested without a focus word."""


class NoModelsLoaded(ReflexError):
    """Backchannel form selection requires at least one form model."""


class IllegalPhase(ReflexError):
    """Interview step received an event that is invalid in its phase."""


class IpuOpen(ReflexError):
    """TRP detection requires a closed IPU or an observed VadOff."""


class CorpusParseError(ReflexError):
    """A corpus line could not be parsed.

    Carries the 1-based line number when raised by the corpus reader.
    """

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no


class ConfigError(ReflexError):
    """Session configuration is invalid or references missing files."""
