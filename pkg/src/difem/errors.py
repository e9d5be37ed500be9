"""Exception types shared across the package."""


class DifemError(Exception):
    """Base class for every error raised by this package."""


class ParseError(DifemError):
    """A frame document could not be decoded.

    ``offset`` is the byte position of the failure when known; ``frame_index``
    is attached when the failure surfaced while loading a whole sequence.
    """

    def __init__(self, message, offset=None, frame_index=None):
        super().__init__(message)
        self.offset = offset
        self.frame_index = frame_index


class SchemaError(ParseError):
    """Document decoded but violates the expected structure."""

    def __init__(self, message, person_index=None, frame_index=None):
        super().__init__(message, frame_index=frame_index)
        self.person_index = person_index


class DuplicateFrameError(DifemError):
    """Two frame sources claim the same frame index."""


class ConfigError(DifemError):
    """Invalid configuration or option combination."""


class ContractViolation(DifemError):
    """A documented precondition was violated by the caller."""


class DimensionError(DifemError):
    """Feature dimensionality differs from what a model was trained on."""


class StratificationError(DifemError):
    """Dataset too small to keep every class present in every training fold."""
