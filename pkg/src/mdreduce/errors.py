"""Exception types shared across the package."""


class SizeError(ValueError):
    """An operand has the wrong number of elements."""


class UnsupportedBlockSize(SizeError):
    """A block size outside what the chosen reduction method supports."""


class NumericDomainError(ArithmeticError):
    """A non-finite value reached an operation that requires finite input."""


class InstanceParseError(ValueError):
    """Malformed ligand instance text; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")
