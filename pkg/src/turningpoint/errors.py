"""Exception taxonomy shared across the package.

Input errors (bad files, bad configuration) map to CLI exit code 1;
contract errors (caller violated an API precondition) map to exit code 2.
"""

from __future__ import annotations


class TurningPointError(Exception):
    """Base class for all errors raised by this package."""


class InputError(TurningPointError):
    """A problem with user-supplied data or configuration."""


class CorpusError(InputError):
    """Corpus file violates the schema or an invariant."""


class StoreError(InputError):
    """Embedding store file is malformed or a lookup key is missing."""


class ConfigError(InputError):
    """Inconsistent or incomplete run configuration."""


class ContractError(TurningPointError, ValueError):
    """An API precondition was violated by the caller."""


class ShapeError(ContractError):
    """Operands have incompatible dimensions."""
