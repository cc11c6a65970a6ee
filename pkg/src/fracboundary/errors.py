"""Exception taxonomy shared across the package.

Four failure classes are distinguished so that callers (and the CLI exit-code
mapping) can react without string matching:

* ConfigError      - a run request that can never be valid (bad s, p, grid, paths)
* DomainError      - a geometry request the lattice cannot represent
* ContractError    - an operation invoked outside its stated preconditions
* ReportIOError    - filesystem trouble while emitting outputs
"""


class FracBoundaryError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FracBoundaryError, ValueError):
    """Invalid configuration value (parameters, grid sizes, file schema)."""


class DomainError(FracBoundaryError, ValueError):
    """Geometry that cannot be represented on the requested lattice."""


class ContractError(FracBoundaryError, RuntimeError):
    """An operation was called outside its documented preconditions."""


class ReportIOError(FracBoundaryError, OSError):
    """Failed to write or serialize an output artifact."""
