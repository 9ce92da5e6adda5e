"""Exception hierarchy for sc2."""


class SC2Error(Exception):
    """Base class for all sc2 errors."""


class ParseError(SC2Error):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class ValidationError(SC2Error):
    pass


class DisconnectedComplex(ValidationError):
    pass


class TriangleInequalityViolation(ValidationError):
    def __init__(self, face, lengths, where=""):
        self.face = face
        self.lengths = lengths
        super().__init__(f"{where}face {face!r} violates the strict triangle inequality: {lengths}")


class DanglingReference(ValidationError):
    pass


class RefinementBudgetExceeded(SC2Error):
    pass


class MatrixTooLarge(SC2Error):
    pass


class CycleDetected(SC2Error):
    def __init__(self, message, evidence=None):
        self.evidence = evidence or {}
        super().__init__(message)


class NotATree(SC2Error):
    pass


class NoLeaves(SC2Error):
    pass


class OracleBudgetExhausted(SC2Error):
    pass


class StructureViolation(SC2Error):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class NonContractibleCut(SC2Error):
    pass


class PolygonalizationFailure(SC2Error):
    pass


class NoUnfreeComponentFound(SC2Error):
    pass


class FreeComplexRefused(SC2Error):
    pass


class InfeasibleStart(SC2Error):
    pass


class UnknownFixture(SC2Error):
    pass
