"""Exception types shared across the package."""


class HartogsError(Exception):
    """Base class for all package-specific errors."""


class InvalidPartition(HartogsError):
    """Partition entries are not positive or their sum reaches the dimension."""


class InvalidExponent(HartogsError):
    """The integer exponent of the domain is below 1."""


class DomainViolation(HartogsError):
    """A point required to lie in the domain does not."""


class MalformedIndex(HartogsError):
    """A multi-index has a negative entry in its ball block."""


class NotAdmissible(HartogsError):
    """The monomial of the multi-index is not square integrable."""


class SingularPair(HartogsError):
    """A kernel denominator vanished (boundary contact)."""


class PoleCoincidence(HartogsError):
    """Green function evaluated at its pole."""


class EmptySublevel(HartogsError):
    """No sample point fell inside the requested Green sublevel set."""


class NonFiniteIntegrand(HartogsError):
    """An integrand evaluated to nan/inf on the sample set."""


class ResourceLimit(HartogsError):
    """A requested grid exceeds the configured node cap."""


class ParameterOutOfRange(HartogsError):
    """An estimate was requested outside its valid parameter range."""


class Divergent(HartogsError):
    """A closed-form moment does not exist for the requested exponent."""


class ConfigError(HartogsError):
    """A run configuration is malformed."""
