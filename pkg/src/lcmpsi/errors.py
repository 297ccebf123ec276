"""Exception types shared across the package."""


class ResourceLimitError(ValueError):
    """A configured size cap was exceeded.

    ``cap`` names the limit and ``flag`` the CLI option that overrides it.
    """

    def __init__(self, message, cap=None, flag=None):
        if cap is not None:
            message = f"{message} [cap: {cap}" + (f"; override with {flag}]" if flag else "]")
        super().__init__(message)
        self.cap = cap
        self.flag = flag


class OutOfTableError(ValueError):
    """Argument lies outside the range a PrimeTable can answer."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""
