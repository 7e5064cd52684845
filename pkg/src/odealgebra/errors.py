"""Exception hierarchy shared by every module of the package."""


class OdeAlgebraError(Exception):
    """Base class for all package errors."""


class ParseError(OdeAlgebraError):
    pass


class UnboundVariable(OdeAlgebraError):
    pass


class HSlotOutOfRange(OdeAlgebraError):
    pass


class DomainError(OdeAlgebraError):
    """A basic function received an argument outside its domain (e.g. a negative length)."""


class SchemaViolation(OdeAlgebraError):
    """A dynamic side condition of a schema failed while running it."""


class NotLinear(OdeAlgebraError):
    pass


class UnknownFunction(OdeAlgebraError):
    pass


class ArityError(OdeAlgebraError):
    pass


class BadModulus(OdeAlgebraError):
    pass


class MalformedCircuit(OdeAlgebraError):
    pass


class UnsupportedGate(OdeAlgebraError):
    pass


class NotNormalForm(OdeAlgebraError):
    pass


class MixedModuli(OdeAlgebraError):
    pass


class UnsupportedSchema(OdeAlgebraError):
    pass


class UnsupportedSymbol(OdeAlgebraError):
    pass


class WidthOverflow(OdeAlgebraError):
    pass
