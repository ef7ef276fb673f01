"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or schema."""


class HypothesisViolation(ValidationError):
    """A bound was queried outside its theorem hypotheses.

    `hypothesis` names the violated condition so callers (and the CLI) can
    surface which assumption failed.
    """

    def __init__(self, hypothesis: str, message: str = ""):
        self.hypothesis = hypothesis
        super().__init__(message or hypothesis)


class NumericFailure(RuntimeError):
    """Internal numeric contract broken (e.g. rejection envelope violated)."""
