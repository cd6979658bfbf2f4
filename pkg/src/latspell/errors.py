"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError (and subclasses) -> 2,
NumericError -> 3. Everything else is a bug and propagates.
"""


class LatspellError(Exception):
    pass


class ShapeError(LatspellError):
    """Dimension mismatch between tensors; message names both shapes."""


class ContractError(LatspellError):
    """An API contract was violated (bad argument, wrong call order)."""


class ConfigError(LatspellError):
    """Bad configuration value, unknown key, or unreadable input file."""


class ParseError(ConfigError):
    """Malformed resource or corpus file; message carries the line number."""


class NumericError(LatspellError):
    """Training diverged (NaN/inf loss) or numerics otherwise broke down."""
