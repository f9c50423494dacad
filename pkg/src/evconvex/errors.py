class EvconvexError(Exception):
    pass


class InvalidMatrix(EvconvexError, ValueError):
    pass


class DimError(EvconvexError, ValueError):
    pass


class DegenerateInput(EvconvexError, ValueError):
    pass


class DomainError(EvconvexError, ValueError):
    pass


class ParamError(EvconvexError, ValueError):
    pass


class OutsideDomain(EvconvexError, ValueError):
    """Point is not in E = {x != 0 : b - mu.x > 0}"""


class OutsideX(EvconvexError, ValueError):
    pass


class WrongMarginal(EvconvexError, ValueError):
    pass


class AssumptionViolated(EvconvexError, ValueError):
    pass


class InfeasibleBuild(EvconvexError, ValueError):
    def __init__(self, message: str, corner=None):
        super().__init__(message)
        self.corner = corner


class NotDecreasing(EvconvexError, RuntimeError):
    pass


class MissingTheta(EvconvexError, RuntimeError):
    def __init__(self, message: str, row: int):
        super().__init__(message)
        self.row = row


class MethodUnavailable(EvconvexError, RuntimeError):
    pass


class SamplingExhausted(EvconvexError, RuntimeError):
    pass


class OriginNotMember(EvconvexError, RuntimeError):
    pass


class NotCertified(EvconvexError, RuntimeError):
    pass


class Infeasible(EvconvexError, RuntimeError):
    pass
