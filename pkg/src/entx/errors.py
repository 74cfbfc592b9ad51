"""Exception types shared across the package.

Contract violations (mismatched lengths, invalid sizes) raise plain
ValueError; these classes cover runtime failures that callers are
expected to handle.
"""


class EntxError(Exception):
    """Base class for entx runtime errors."""


class EntropyExhaustedError(EntxError):
    """A bounded entropy source could not supply the requested bits.

    ``bits_consumed`` records how many bits had been drawn from the
    source before the failing request.
    """

    def __init__(self, message: str, bits_consumed: int = 0):
        super().__init__(message)
        self.bits_consumed = bits_consumed


class FormatError(EntxError):
    """A media container (pixmap, RIFF PCM) could not be parsed or built."""


class KeyFileError(EntxError):
    """A key file is corrupt, truncated, or of an unsupported version."""
