"""Exception hierarchy shared by the library and the CLI."""


class IonWireError(Exception):
    """Base class for all errors raised by ionwire."""


class DomainError(IonWireError, ValueError):
    """A geometric or physical quantity lies outside the formula's domain."""


class ConfigError(IonWireError, ValueError):
    """A configuration failed validation or could not be parsed.

    ``errors`` holds one human-readable message per problem so that callers
    can report all of them at once.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class UnknownSpeciesError(IonWireError, KeyError):
    def __init__(self, name, known):
        self.name = name
        self.known = tuple(known)
        super().__init__(f"unknown ion species {name!r}; known species: {', '.join(self.known)}")

    def __str__(self):
        return self.args[0]


class ResonanceError(IonWireError, ValueError):
    """A closed-form result that only holds for resonant ions was requested off resonance."""


class NumericalError(IonWireError, RuntimeError):
    """Base class for failures of a numerical method (CLI exit code 3)."""


class UnstableCouplingError(NumericalError):
    """The coupling is strong enough that a normal-mode frequency is imaginary."""


class TruncationError(NumericalError):
    """Population leaked into the top layer of a truncated Fock basis."""


class SolverError(NumericalError):
    """A time integrator missed its accuracy target."""

    def __init__(self, message, achieved_error=None):
        self.achieved_error = achieved_error
        super().__init__(message)


class AccuracyWarning(UserWarning):
    """Issued when a numerical parameter is likely to degrade accuracy."""
