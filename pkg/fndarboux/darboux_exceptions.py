"""fndarboux Exception Inheritance Tree

DarbouxException
  ExprException
     ExprSyntaxError
     ExprUnknownSymbolError
     ExprExponentError
     ExprRationalError
     NotHomogeneousError
  FieldException
     AlphaExponentError
  GradedException
     CascadePreconditionError
  CertificateException
     ConstraintError
     NotDarbouxError
  CalculusException
     ManifestSyntaxError
     NonAlgebraicOperationError
  NumericException
     NoRealRootError
  UsageError
"""


class DarbouxException(Exception):
    """Base class for ALL exceptions that may be raised by ANY fndarboux code"""


class ExprException(DarbouxException):
    """Base class for exceptions raised while parsing or grading polynomials"""

class FieldException(DarbouxException):
    """Base class for exceptions raised by vector field operations"""

class GradedException(DarbouxException):
    """Base class for exceptions raised by the graded slice machinery"""

class CertificateException(DarbouxException):
    """Base class for exceptions raised while verifying or recovering Darboux data"""

class CalculusException(DarbouxException):
    """Base class for exceptions raised by the differential field code"""

class NumericException(DarbouxException):
    """Base class for exceptions raised by the floating-point validation code"""

class UsageError(DarbouxException):
    """Raised when the command line or a config file asks for something malformed"""


class ExprSyntaxError(ExprException):
    """Raised when an expression string does not follow the grammar"""
    def __init__(self, text, pos, what):
        self.text = text
        self.pos = pos
        super().__init__('syntax error at position {:d} in \'{:s}\': {:s}'.format(pos, text, what))

class ExprUnknownSymbolError(ExprException):
    """Raised when an expression names a symbol outside the declared set"""
    def __init__(self, text, pos, name):
        self.pos = pos
        self.name = name
        super().__init__('unknown symbol \'{:s}\' at position {:d} in \'{:s}\''.format(
            name, pos, text))

class ExprExponentError(ExprException):
    """Raised when an exponent is negative or not an integer"""
    def __init__(self, text, pos):
        self.pos = pos
        super().__init__('exponent at position {:d} in \'{:s}\' must be a non-negative '
                         'integer'.format(pos, text))

class ExprRationalError(ExprException):
    """Raised when a string cannot be read as an exact rational 'p/q'"""
    def __init__(self, string):
        super().__init__('failed to parse \'{:s}\' as exact rational p/q'.format(string))

class NotHomogeneousError(ExprException):
    """Raised when a weight degree is requested for a polynomial spanning several weights"""
    def __init__(self, weights):
        super().__init__('not homogeneous: terms of weight {:s}'.format(
            ', '.join(str(w) for w in weights)))


class AlphaExponentError(FieldException):
    """Raised when alpha conjugation would produce a negative power of alpha"""
    def __init__(self, l, weight):
        super().__init__('alpha_conjugate with l={:d} meets a term of weight {:d}'.format(
            l, weight))


class CascadePreconditionError(GradedException):
    """Raised when the top component is not annihilated by L - k1*x"""


class ConstraintError(CertificateException):
    """Raised when parameter constraints cannot be applied as declared"""

class NotDarbouxError(CertificateException):
    """Raised when a polynomial has no polynomial cofactor of degree at most 2"""
    def __init__(self, f, reason):
        self.reason = reason
        super().__init__('not Darboux: {:s} ({:s})'.format(f, reason))


class ManifestSyntaxError(CalculusException):
    """Raised when an identity manifest expression cannot be read"""
    def __init__(self, text, pos, what):
        self.pos = pos
        super().__init__('manifest syntax error at position {:d} in \'{:s}\': {:s}'.format(
            pos, text, what))

class NonAlgebraicOperationError(CalculusException):
    """Raised when an operation would leave the span of 1, A, B, C over the base field"""


class NoRealRootError(NumericException):
    """Raised when no point of a surface could be sampled inside the requested box"""
    def __init__(self, f, tries):
        super().__init__('no real root of {:s} = 0 found in box after {:d} tries'.format(
            f, tries))
