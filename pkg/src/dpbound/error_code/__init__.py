#############################################
# Python exceptions for dpbound error codes #
#############################################


class DpBoundError(Exception):
    """
    DpBoundError is the root of every exception raised by dpbound.
    Each subclass carries the process exit code the command line tool reports for it.
    """
    exit_code = 1

    def __init__(self, message=''):
        super().__init__(message)
        self.message = message


class ValidationError(DpBoundError):
    """Bad program text, bad flags, or sets that do not meet an algorithm's precondition"""
    exit_code = 2


class ResourceLimitError(DpBoundError):
    """A configured cap (node budget, coin count, set size) would be exceeded"""
    exit_code = 3


class EngineError(DpBoundError):
    """Misuse of the decision diagram engine"""
    exit_code = 1


class ParseError(ValidationError):
    def __init__(self, message='', line=None, column=None):
        if line is not None and line > 0:
            message = f'line {line}, column {column}: {message}'
        super().__init__(message)
        self.line = line
        self.column = column


class ProgramFileError(ValidationError):
    pass


class ProbabilityRangeError(ParseError):
    pass


class UnboundVariableError(ValidationError):
    def __init__(self, name, message=''):
        super().__init__(message or f'unbound variable {name!r}')
        self.name = name


class TypeMismatchError(ValidationError):
    pass


class CategoricalError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class CoverageError(ValidationError):
    def __init__(self, message='', missing=None):
        super().__init__(message)
        self.missing = missing


class ParameterError(ValidationError):
    pass


class NodeBudgetExceeded(ResourceLimitError):
    pass


class CoinCapExceeded(ResourceLimitError):
    pass


class SizeGuardExceeded(ResourceLimitError):
    pass


class ManagerMismatchError(EngineError):
    pass


class UnknownVariableError(EngineError):
    pass


class MissingWeightError(EngineError):
    pass
