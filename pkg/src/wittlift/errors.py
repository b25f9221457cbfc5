"""Exception hierarchy shared by all wittlift modules."""


class WittliftError(Exception):
    """Base class for all errors raised by this package."""


# -- coefficient rings ------------------------------------------------------

class NotPrime(WittliftError):
    pass


class EllTooSmall(WittliftError):
    pass


class ParamMismatch(WittliftError):
    pass


class ZeroInverse(WittliftError):
    pass


class ZeroPolynomial(WittliftError):
    pass


class NonDivisibleDegrees(WittliftError):
    pass


class NotASimpleRoot(WittliftError):
    pass


# -- matrix toolkit ---------------------------------------------------------

class Singular(WittliftError):
    pass


class RepeatedResidualEigenvalues(WittliftError):
    pass


class EigenvaluesNotInField(WittliftError):
    pass


class ResidualImageTooSmall(WittliftError):
    pass


class DoesNotSpan(WittliftError):
    pass


class PrecisionExhausted(WittliftError):
    pass


class UnboundedGroup(WittliftError):
    pass


# -- group model and cohomology --------------------------------------------

class UnknownGenerator(WittliftError):
    pass


class NotACocycle(WittliftError):
    pass


class LiftsDoNotReduce(WittliftError):
    pass


class DetNotEpsilon(WittliftError):
    pass


# -- lifting engine ---------------------------------------------------------

class Inconsistent(WittliftError):
    pass


class Unreachable(WittliftError):
    pass


class OracleNotFound(WittliftError):
    pass


class PoolExhausted(WittliftError):
    pass


class ShaNotTrivial(WittliftError):
    pass


class SupportConditionUnavailable(WittliftError):
    pass


# -- density / CLI ----------------------------------------------------------

class AlphaExceedsPrecision(WittliftError):
    pass


class NotConjugationInvariant(WittliftError):
    pass


class SchemaError(WittliftError):
    pass
