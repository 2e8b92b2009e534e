"""Exception types shared by the isofk modules."""


class InvalidParameter(ValueError):
    """A scalar parameter lies outside its admissible range."""


class OutOfDomain(ValueError):
    """The requested quantity is undefined for this cluster weight."""


class InvalidEmbedding(ValueError):
    """A graph fails the isoradial checks.

    ``violations`` lists the offending faces or edges.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class InvalidDomain(ValueError):
    """A region or Dobrushin domain is malformed."""


class TooLarge(RuntimeError):
    """Exact enumeration was requested above the configured cap."""


class NotOnPath(LookupError):
    """A diamond edge is not crossed by the exploration path."""
