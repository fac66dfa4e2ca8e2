"""Error types shared across the package."""


class DataError(Exception):
    """Invalid or inconsistent input tables. Scripts map this to exit code 2."""


class UsageError(Exception):
    """Bad invocation. Scripts map this to exit code 1."""
