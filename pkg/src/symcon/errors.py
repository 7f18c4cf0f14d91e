"""Exception types shared across the package."""


class SymconError(Exception):
    """Base class for all package-specific errors."""


class DegenerateInputError(SymconError):
    """An input lies outside the domain where the model is defined.

    Raised e.g. for a committee too small to tolerate any fault, or a
    differential SNR of zero where the spreading bound diverges.
    """


class BlocklengthError(SymconError):
    """A time/bandwidth combination yields fewer than one channel use."""


class InfeasibleRateError(SymconError):
    """The requested rate meets or exceeds capacity, so no finite
    blocklength can reach the target reliability."""


class ValidityError(SymconError):
    """A consensus mechanism cannot be instantiated at the requested
    network size (e.g. a shard would fall below its quorum minimum)."""


class CatalogError(SymconError):
    """Unknown mechanism id or malformed catalog request."""


class EnumerationSizeError(SymconError):
    """Exact outcome enumeration was requested for a plan whose
    rule-relevant link count exceeds the supported limit."""


class ConfigError(SymconError):
    """Malformed run configuration (unknown keys, bad schema version,
    unparseable values)."""
