"""Exception types shared across the package."""


class ArtifactError(Exception):
    pass


class NoSolution(ArtifactError):
    pass


class DimensionMismatch(ArtifactError):
    pass


class NotASubspace(ArtifactError):
    pass


class BadExponent(ArtifactError):
    pass


class EvenPrime(ArtifactError):
    pass


class TwistConditionViolated(ArtifactError):
    pass


class InvalidAction(ArtifactError):
    pass


class NotAPermutationGroup(ArtifactError):
    pass


class CocycleIdentityFails(ArtifactError):
    pass


class MismatchedExtensions(ArtifactError):
    pass


class TooLarge(ArtifactError):
    pass


class PreconditionFail(ArtifactError):
    pass


class NotUniserial(ArtifactError):
    pass


class PrecisionExceeded(ArtifactError):
    pass


class DivisibilityViolated(ArtifactError):
    pass


class BudgetExceeded(ArtifactError):
    def __init__(self, what, required, budget):
        super().__init__(f"{what}: needs {required} basis elements, budget is {budget}")
        self.what = what
        self.required = required
        self.budget = budget


class DegreeOverflow(ArtifactError):
    pass


class LiftFailed(ArtifactError):
    pass


class RankTooLarge(ArtifactError):
    pass


class QuasiIsoFails(ArtifactError):
    def __init__(self, degree, msg=""):
        super().__init__(f"not a quasi-isomorphism in degree {degree} {msg}".strip())
        self.degree = degree


class NoLifting(ArtifactError):
    pass


class MalformedWitness(ArtifactError):
    pass


class PredicateFail(ArtifactError):
    pass


class ParseError(ArtifactError):
    def __init__(self, msg, line=1, column=1):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class InvalidForm(ArtifactError):
    pass


class NotEquivariant(InvalidAction):
    pass
