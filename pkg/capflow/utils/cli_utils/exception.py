class ExceptionBase(Exception):
    exit_code: int = 1

    def __init__(self, detail):
        super().__init__(detail)
        self.detail = detail


class UsageException(ExceptionBase):
    exit_code = 2


class ResourceGuardException(ExceptionBase):
    exit_code = 3


class InputValidationException(ExceptionBase):
    exit_code = 4


class SolverFailureException(ExceptionBase):
    exit_code = 5


class PartialFailureException(ExceptionBase):
    exit_code = 6


class DomainException(UsageException, ValueError):
    pass


class DegenerateTriple(DomainException):
    pass


class DimensionMismatch(DomainException):
    pass


class SingularPoint(DomainException):
    pass


class AxisOutOfRange(DomainException):
    pass


class ParameterDomainError(DomainException):
    pass


class NumericConsistencyError(DomainException):
    pass
