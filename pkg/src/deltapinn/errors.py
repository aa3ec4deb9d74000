"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad run configuration: unknown key, wrong type, failed validation."""


class GeometryError(ValueError):
    """Inconsistent geometry, e.g. a source ball that misses the domain."""


class NumericError(FloatingPointError):
    """A non-finite value appeared where finite math was required."""


class UnsupportedPrimitiveError(TypeError):
    """A loss graph used an operation outside the engine's primitive set."""


class FormatError(ValueError):
    """An output file has a missing/unknown format version or a bad layout."""


class DivergenceError(RuntimeError):
    """Training aborted on a non-finite loss or gradient."""
