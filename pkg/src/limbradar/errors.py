"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid scenario, gait, or radar configuration."""


class DataContractError(ValueError):
    """Input data violates a documented format or invariant."""


class MocapFormatError(DataContractError):
    """Marker CSV file does not conform to the documented format."""
