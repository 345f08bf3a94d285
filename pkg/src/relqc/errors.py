"""Exception types raised across the package."""


class RelqcError(Exception):
    """Base class for all package errors."""


class InvalidStateError(RelqcError, ValueError):
    """A state is not a valid state vector or density matrix."""


class InvalidBlochError(RelqcError, ValueError):
    """A Bloch vector lies outside the unit ball."""


class InvalidArgumentError(RelqcError, ValueError):
    pass


class InvalidPairError(RelqcError, ValueError):
    """Qubit pair with equal or out-of-range indices."""


class ImpossibleBranchError(RelqcError):
    """Requested measurement branch has (numerically) zero probability."""


class UnpurifiableError(RelqcError, ValueError):
    """The maximally mixed state has no direction to purify towards."""


class DegenerateSuppliesError(RelqcError, ValueError):
    """Supply Bloch vectors are linearly dependent."""


class InsufficientSupplyError(RelqcError):
    """A protocol ran out of input qubits.

    ``stats`` carries whatever progress was made before exhaustion.
    """

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


class CannotTrimError(RelqcError, ValueError):
    """Redundancy cannot be reduced below one physical qubit."""


class RetryLimitError(RelqcError):
    """A postselected recipe did not succeed within the retry cap."""


class ConfigError(RelqcError, ValueError):
    """Invalid experiment configuration."""
