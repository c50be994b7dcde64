"""Exception types shared across modules."""


class FormatError(ValueError):
    """Malformed or semantically invalid input file (game, HOA, strategy, grid)."""


class CapExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured size cap."""
