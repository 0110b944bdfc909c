"""Exception hierarchy shared by every stage of the solver."""


class SpectralError(Exception):
    """Base class for all library errors."""


class DegenerateParameter(SpectralError):
    """alpha or omega vanishes, so the problem leaves the admissible class."""


class UnorderedSpectrum(SpectralError):
    pass


class CountMismatch(SpectralError):
    pass


class StepUnderflow(SpectralError):
    """Cell subdivision cannot resolve the potential to the requested tolerance."""


class RootCountMismatch(SpectralError):
    """Sign-change counting disagrees with the asymptotic zero count."""


class FitDiverged(SpectralError):
    pass


class InconsistentOmega(SpectralError):
    pass


class RadicandNegative(SpectralError):
    """v+(theta_n)^2 < 4 omega^2: admissibility condition 3 is violated."""


class NonpositiveNorming(SpectralError):
    pass


class SingularSystem(SpectralError):
    pass


class NoProgress(SpectralError):
    pass


class InterlacingViolation(SpectralError):
    pass


class Inadmissible(SpectralError):
    """The admissibility checker rejected the input; ``report`` holds the details."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
