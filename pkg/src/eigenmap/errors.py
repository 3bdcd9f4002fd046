"""Exception types shared across the library."""


class EigenmapError(Exception):
    """Base class for all library errors."""


class PointOutOfDomain(EigenmapError):
    pass


class SingularMetric(EigenmapError):
    pass


class DegenerateSection(EigenmapError):
    pass


class CodomainExit(EigenmapError):
    pass


class EigenvalueCollision(EigenmapError):
    pass


class RankDeficient(EigenmapError):
    pass


class NoFibre(EigenmapError):
    pass


class OddCodomain(EigenmapError):
    pass


class NotPHWC(EigenmapError):
    pass


class RankOdd(EigenmapError):
    pass


class NotHWC(EigenmapError):
    pass


class NonPositiveConformalFactor(EigenmapError):
    pass


class NotDoubledSpectrum(EigenmapError):
    pass


class DilatationExceeded(EigenmapError):
    pass


class DegenerateRank(EigenmapError):
    pass


class MissingCurvatureBounds(EigenmapError):
    pass


class DomainViolation(EigenmapError):
    pass


class InvalidModel(EigenmapError):
    pass


class NonPositiveA(EigenmapError):
    pass


class JetOrderInsufficient(EigenmapError):
    pass


class RangeEscape(EigenmapError):
    pass


class GroupCollision(EigenmapError):
    pass


class HypothesisViolated(EigenmapError):
    """A theorem precondition failed; carries the list of violated gates."""

    def __init__(self, violated):
        self.violated = list(violated)
        super().__init__("hypotheses violated: " + ", ".join(self.violated))


class CatalogLoadError(EigenmapError):
    """Load-time re-verification of a declared property failed."""

    def __init__(self, record):
        self.record = record
        super().__init__(f"catalog verification failed: {record}")


class UnknownExample(EigenmapError):
    pass


class UnknownSuite(EigenmapError):
    pass


class ConfigError(EigenmapError):
    pass
