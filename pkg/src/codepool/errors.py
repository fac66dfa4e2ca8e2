"""Error types shared across the package."""


class DataError(Exception):
    """Invalid or inconsistent input data (bad record, label gap, schema violation).

    The CLI maps this to exit code 2.
    """


class UsageError(Exception):
    """Bad invocation: unknown names, contradictory flags. CLI exit code 1."""
