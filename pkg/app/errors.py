# app/errors.py
"""Exception hierarchy shared by every pipeline stage.

Each error exposes ``code`` (the class name) so sweep rows and API
responses can record the failure without carrying the traceback.
"""


class CausalityError(RuntimeError):
    """Base class for all toolkit errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidParameter(CausalityError, ValueError):
    pass


class ConstantChannel(CausalityError):
    pass


class SeriesTooShort(CausalityError):
    pass


class KTooSmall(InvalidParameter):
    pass


class PersistentDivergence(CausalityError):
    pass


class NumericBlowup(CausalityError):
    pass


class IllConditioned(CausalityError):
    pass


class SingularAtFrequency(CausalityError):
    pass


class SingularConditioningBlock(CausalityError):
    pass


class EmptyBand(CausalityError):
    pass


class TooFewSamples(CausalityError):
    pass


class DimensionMismatch(CausalityError):
    pass


class ConfigError(CausalityError, ValueError):
    pass
