"""
Error types.
Every failure the toolkit reports carries a machine-readable code.
"""


class MoeaError(Exception):
    """Base class for all toolkit errors."""

    code = 'MOEA_ERROR'

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code:
            self.code = code


class ConfigurationError(MoeaError):
    """Invalid run, provider or problem configuration."""

    code = 'CONFIG_ERROR'


class EvaluationError(MoeaError):
    """An objective evaluator produced a non-finite value."""

    code = 'EVALUATION_ERROR'

    def __init__(self, message: str, individual_id: int | None = None):
        super().__init__(message)
        self.individual_id = individual_id


class ProviderError(MoeaError):
    """
    Transport-level provider failure (timeout, bad status, missing usage).
    Recoverable: the caller retries with a fresh session.
    """

    code = 'PROVIDER_ERROR'


class ParseFailure(MoeaError):
    """
    A provider response could not be turned into enough valid offspring.

    The code names the defect: MISSING_DELIMITERS, WRONG_ARITY, NON_NUMERIC,
    NON_FINITE or TOO_FEW.
    """

    code = 'PARSE_FAILURE'

    @property
    def defect(self) -> str:
        return self.code


class BudgetExhausted(MoeaError):
    """The evaluation budget cannot cover the current generation."""

    code = 'BUDGET_EXHAUSTED'


class OutputError(MoeaError):
    """An output artifact could not be written."""

    code = 'OUTPUT_ERROR'

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path
