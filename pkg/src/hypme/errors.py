"""Exception taxonomy shared across the toolkit.

The CLI maps these onto exit codes: parse/precondition/budget failures are
ordinary errors (exit 1), while MathCheckError marks a violated mathematical
invariant (exit 2) so CI can tell broken math from broken IO.
"""


class HypmeError(Exception):
    pass


class ParseError(HypmeError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PreconditionError(HypmeError):
    pass


class BudgetError(HypmeError):
    pass


class MathCheckError(HypmeError):
    """A checkable mathematical assertion failed (the theorem-contradiction signal)."""
