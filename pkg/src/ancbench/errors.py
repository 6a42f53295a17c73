"""Exception hierarchy shared across the package."""


class AncError(Exception):
    """Base class for all errors raised by ancbench."""


class ConfigurationError(AncError, ValueError):
    """Invalid parameters, mismatched dimensions or incompatible signals."""


class DivergenceError(AncError, ArithmeticError):
    """An adaptive filter produced a non-finite weight.

    ``index`` is the sample index (within the processed block) at which the
    first non-finite weight appeared.
    """

    def __init__(self, index, algorithm=None):
        self.index = int(index)
        self.algorithm = algorithm
        name = f"{algorithm} " if algorithm else ""
        super().__init__(f"{name}filter diverged at sample {self.index}")


class NumericalBreakdownError(DivergenceError):
    """RLS inverse-correlation recursion broke down (non-positive or
    non-finite gain denominator, or non-finite matrix entries).

    Recoverable by resetting the inverse correlation matrix.
    """

    def __init__(self, index, algorithm="rls"):
        super().__init__(index, algorithm)
        self.args = (f"{algorithm} inverse correlation matrix broke down at sample {self.index}",)


class UndefinedBoundError(AncError, ValueError):
    """The LMS step-size bound is undefined (all-zero reference)."""


class DegenerateMetricError(AncError, ValueError):
    """A metric is undefined for the given inputs (e.g. zero variance)."""


class WavError(AncError):
    """Base class for WAV parse errors. ``chunk`` names the offending chunk."""

    def __init__(self, message, chunk):
        self.chunk = chunk
        super().__init__(f"{chunk}: {message}")


class WavHeaderError(WavError):
    """Malformed RIFF/WAVE header or chunk structure."""


class UnsupportedCodecError(WavError):
    """Valid WAV file whose encoding is not 16-bit PCM."""


class TruncatedDataError(WavError):
    """File ends before a declared chunk is complete."""
