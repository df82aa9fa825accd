"""Exception types shared across the library."""


class SkelAugError(Exception):
    """Base class for all library errors."""


class InvalidInput(SkelAugError):
    """An argument violates a documented precondition."""


class ParseError(SkelAugError):
    """A skeleton text file does not follow the expected layout.

    Carries the 1-based line number where parsing failed.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FormatError(SkelAugError):
    """A corpus file (jsonl or packed) is malformed."""


class AlignmentDegenerate(SkelAugError):
    """The first frame has no usable spine/shoulder vectors for axis alignment."""


class NoValidBody(SkelAugError):
    """A recording contains no body with non-degenerate motion."""
