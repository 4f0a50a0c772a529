"""Exception types shared across the package."""


class PhaseSyncError(Exception):
    """Base class for all errors raised by this package."""


class IngestionError(PhaseSyncError):
    """Malformed or inconsistent input file."""


class ContractError(PhaseSyncError, ValueError):
    """An argument violates a documented precondition."""


class DegeneratePhaseError(PhaseSyncError):
    """Instantaneous amplitude too small for the phase to be meaningful."""
