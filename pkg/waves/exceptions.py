class WaveLabError(Exception):
    """
    Base class for every error raised by the wave laboratory.
    Management commands translate it into a CommandError.
    """


class InvalidRange(WaveLabError):
    """
    Raised when a parameter or a requested window lies outside its admissible range.
    """


class InvalidField(WaveLabError):
    """
    Raised when a radial field violates its invariants (grid, finiteness, Dirichlet condition).
    """


class IntegrationDiverged(WaveLabError):
    """
    Raised when the Emden-Fowler integration produces a non-finite state.
    """


class ZerosExhausted(WaveLabError):
    """
    Raised when the requested number of zeros cannot be reached below the integration ceiling.
    """


class TailTooFat(WaveLabError):
    """
    Raised when the closed-form tail of an energy integral exceeds 1% of the tabulated part.
    """


class OutOfTable(WaveLabError):
    """
    Raised when a stationary profile is evaluated outside its tabulated window.
    """


class OutOfWindow(WaveLabError):
    """
    Raised when the linear propagator is asked for a point that the tabulated d'Alembert
    function does not reach.
    """


class NotApplicable(WaveLabError):
    """
    Raised when a diagnostic is requested on a trajectory it cannot describe (blow-up runs).
    """


class InsufficientData(WaveLabError):
    """
    Raised when a time series holds too few snapshots for finite differences.
    """


class DegenerateInput(WaveLabError):
    """
    Raised when a functional is evaluated on input where it is undefined (e.g. the zero function).
    """


class NoTransitionInRange(WaveLabError):
    """
    Raised when an amplitude sweep produces the same outcome for every amplitude.
    """


class NoExit(WaveLabError):
    """
    Raised when a perturbed stationary solution never leaves its epsilon-neighbourhood.
    """


class ParseError(WaveLabError):
    """
    Raised when an on-disk snapshot is malformed; `line` is the first offending line (1-based).
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(WaveLabError):
    """
    Raised when an experiment configuration fails validation.
    `errors` holds the serializer error dict, `minimal_domain_end` the causal bound when it applies.
    """

    def __init__(self, message, errors=None, minimal_domain_end=None):
        self.errors = errors or {}
        self.minimal_domain_end = minimal_domain_end
        super().__init__(message)
