"""Exception and warning types shared across the pipeline."""


class ValidationError(ValueError):
    """Input data or configuration violates a record or file contract."""


class DataWarning(UserWarning):
    """Recoverable data issue (skipped record, degenerate group, short sample)."""
