"""Exception hierarchy.

Each leaf carries an ``exit_code`` so the command-line layer can map failures
to its fixed exit-code table without a lookup of its own.
"""


class CRSError(Exception):
    exit_code = 1


class ConfigError(CRSError, ValueError):
    exit_code = 2


class InvalidSpec(ConfigError):
    pass


class SpecInvalid(ConfigError):
    """Malformed syndrome-trellis parameters."""


class WrongKind(ConfigError):
    pass


class TooShort(ConfigError):
    pass


class MaskOnZeroDelta(ConfigError):
    pass


class ShapeMismatch(ConfigError):
    pass


class LengthMismatch(ConfigError):
    pass


class EmptyInput(ConfigError):
    pass


class TooLarge(ConfigError):
    pass


class StorageError(CRSError, OSError):
    exit_code = 3


class ParseError(StorageError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormat(StorageError):
    pass


class Infeasible(CRSError):
    exit_code = 4


class AllWet(Infeasible):
    pass


class NoPath(Infeasible):
    pass


class CodecError(CRSError):
    exit_code = 5


class NotConverged(CodecError):
    def __init__(self, message, achieved_bits=None):
        super().__init__(message)
        self.achieved_bits = achieved_bits


class PaddingExhausted(CodecError):
    pass


class ModelMismatch(CodecError):
    pass


class PrecisionCollapse(CodecError):
    pass


class InsufficientBits(CodecError):
    pass


class CapacityShortfall(CodecError):
    """The realized pattern pins down fewer message bits than requested."""


class RangeViolation(CodecError):
    pass


class DegenerateVariance(CRSError, ArithmeticError):
    pass


class Desync(CRSError):
    exit_code = 6


class PatternOutOfRange(Desync):
    pass
