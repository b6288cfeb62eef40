"""Exception types shared across the package."""


class LatticeMismatchError(ValueError):
    """Operands live on different wave lattices."""


class ConfigError(ValueError):
    """A run or parameter configuration violates a stated constraint."""

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class BlowUpError(RuntimeError):
    """Time integration produced non-finite values or a collapsing step."""

    def __init__(self, message, t=None, mode=None):
        super().__init__(message)
        self.t = t
        self.mode = mode


class InvalidCertificateError(ValueError):
    """A Diophantine certificate has c_K = 0 (resonant direction)."""


class CheckpointError(IOError):
    """Base class for checkpoint read/write failures."""


class CheckpointVersionError(CheckpointError):
    """Unrecognized header or unsupported format version."""


class CheckpointTruncatedError(CheckpointError):
    """File ends before the declared payload."""


class CheckpointInvariantError(CheckpointError):
    """Payload decoded but violates divergence or mean-zero invariants."""
