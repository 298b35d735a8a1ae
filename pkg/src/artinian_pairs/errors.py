"""Exception types shared across the package."""


class ArtinianPairsError(Exception):
    """Base class for all package errors."""


# field layer

class ZeroInversion(ArtinianPairsError):
    pass


class NotASquare(ArtinianPairsError):
    pass


class UnsupportedField(ArtinianPairsError):
    pass


# algebra layer

class InfiniteDimension(ArtinianPairsError):
    pass


class MixedFields(ArtinianPairsError):
    pass


class NotAProduct(ArtinianPairsError):
    pass


class NotAnIdeal(ArtinianPairsError):
    pass


class DimensionTooSmall(ArtinianPairsError):
    pass


# pair / module layer

class NotLocalA(ArtinianPairsError):
    pass


class NotAStable(ArtinianPairsError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotGenerating(ArtinianPairsError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class PairMismatch(ArtinianPairsError):
    pass


class NotIdempotent(ArtinianPairsError):
    pass


class TrivialIdempotent(ArtinianPairsError):
    pass


class UndecidedSummand(ArtinianPairsError):
    pass


class NotNilpotent(ArtinianPairsError):
    pass


class NotComponentwise(ArtinianPairsError):
    pass


# constructions

class LengthMismatch(ArtinianPairsError):
    pass


class NeedAtLeastFourFactors(ArtinianPairsError):
    pass


class CaseMismatch(ArtinianPairsError):
    pass


class ExtractionFailed(ArtinianPairsError):
    pass


class HypothesisViolated(ArtinianPairsError):
    pass


class CertificationFailed(ArtinianPairsError):
    pass


class FiniteTypeConditionsHold(ArtinianPairsError):
    pass


# hypersurface example

class InvariantViolation(ArtinianPairsError):
    pass


class RankMismatch(ArtinianPairsError):
    pass


class BudgetExceeded(ArtinianPairsError):
    pass
