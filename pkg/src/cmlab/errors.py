"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(ValueError):
    """A request exceeds the configured desk-scale resource bounds."""


class ContractError(ValueError):
    """Inputs violate a structural precondition (support shape, sign, ...)."""
