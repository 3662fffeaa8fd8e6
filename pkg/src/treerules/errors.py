"""Exception types raised across the library.

All library-specific failures derive from :class:`TreeRulesError` so callers
can catch one base class; the subclasses exist because tests and CLI error
reporting need to distinguish the rejection reasons.
"""


class TreeRulesError(Exception):
    """Base class for all treerules errors."""


class NonNumericFeatureError(TreeRulesError):
    """A feature cell could not be parsed as a number."""


class NaNValueError(TreeRulesError):
    """A feature cell parsed to NaN or infinity."""


class NotBinaryError(TreeRulesError):
    """The label column does not define a usable binary problem."""


class TooFewInstancesError(TreeRulesError):
    """A class has fewer members than the requested fold count."""


class FeatureOutOfRangeError(TreeRulesError):
    """A condition or tree references a feature index >= m."""


class DegenerateDataError(TreeRulesError):
    """Training was attempted on an empty dataset."""


class MissingClassError(TreeRulesError):
    """An operation requiring both classes saw only one."""


class SchemaError(TreeRulesError):
    """An ensemble JSON document does not match the expected schema."""


class DimensionMismatchError(TreeRulesError):
    """An input vector's length does not match the feature count."""


class LengthMismatchError(TreeRulesError):
    """Two parallel sequences (predictions/labels) differ in length."""


class NonPositiveEtaError(TreeRulesError):
    """Smoothing strength eta must be > 0."""


class UnknownAtomError(TreeRulesError):
    """A condition was looked up that the probability tables do not hold."""


class ZeroCountsError(TreeRulesError):
    """Leaf shrinkage with tau=0 was asked to normalize an all-zero count vector."""


class MissingModeError(TreeRulesError):
    """A report operation needed rows for a mode that is absent."""
