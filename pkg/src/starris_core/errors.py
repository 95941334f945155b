"""
Exception hierarchy for the STAR-RIS optimization core.
Library code raises these; the experiment pipeline and CLI translate them
into stage results and exit codes.
"""

from typing import Optional


class StarRisError(Exception):
    """Base class for every error raised by starris_core"""


class InvalidInputError(StarRisError, ValueError):
    """Malformed input: non-finite values, mismatched lengths, bad geometry"""


class InvalidBracketError(InvalidInputError):
    """Root bracket does not satisfy f(lo) >= 0 >= f(hi)"""


class NumericalError(StarRisError):
    """Factorization or solve failure inside a named optimization block"""

    def __init__(self, message: str, block: Optional[str] = None):
        self.block = block
        if block:
            message = f"[{block}] {message}"
        super().__init__(message)


class InternalError(StarRisError):
    """A block update increased the augmented Lagrangian objective"""

    def __init__(self, block: str, before: float, after: float):
        self.block = block
        self.before = before
        self.after = after
        super().__init__(
            f"Block '{block}' increased the AL objective: "
            f"{before:.12g} -> {after:.12g} (+{after - before:.3e})"
        )


class ConfigError(InvalidInputError):
    """Configuration parse or validation failure"""

    def __init__(
        self, message: str, path: Optional[str] = None, line: Optional[int] = None
    ):
        self.path = path
        self.line = line
        location = ""
        if path:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class FeasibilityError(StarRisError):
    """A scheme output violates its own constraint set"""
