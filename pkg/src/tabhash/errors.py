"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid scheme, table, instance, or experiment configuration."""


class PreconditionError(ValueError):
    """An operation was called with arguments violating its contract."""


class DuplicateKeyError(PreconditionError):
    """Insertion of a key that is already stored."""


class KeyNotFoundError(KeyError):
    """Lookup/delete of a key that is not stored."""


class CapacityError(RuntimeError):
    """Table cannot accept another key."""
