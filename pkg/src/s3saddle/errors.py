"""Exception hierarchy shared by all modules."""

import numpy as np


class S3Error(Exception):
    """Base class for errors raised by s3saddle."""


class StructureError(S3Error, ValueError):
    """Block dimensions are inconsistent with the requested layout."""

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class UnsupportedLayoutError(S3Error, ValueError):
    pass


class FactorizationError(S3Error, np.linalg.LinAlgError):
    """A block that must be SPD (or invertible) is not."""

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class ContractError(S3Error, ValueError):
    """An operation's precondition or postcondition does not hold."""


class BoundInapplicableError(ContractError):
    """The hypotheses of an eigenvalue bound are not met."""


class ManifestError(S3Error, ValueError):
    def __init__(self, message, path=None, field=None):
        where = []
        if path is not None:
            where.append(str(path))
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{': '.join(where)}: {message}"
        super().__init__(message)
        self.path = path
        self.field = field
