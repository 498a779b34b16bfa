"""Exception types shared across the library.

Every exact procedure either returns a validated object or raises one of
these; nothing degrades silently to a heuristic answer.
"""


class ChromthreshError(Exception):
    """Base class for all library errors."""


class VertexOutOfRange(ChromthreshError):
    pass


class EmptyEdge(ChromthreshError):
    pass


class NonUniform(ChromthreshError):
    pass


class DuplicateVertexInTuple(ChromthreshError):
    pass


class PartialColoring(ChromthreshError):
    pass


class NotWithinLimit(ChromthreshError):
    """Chromatic number exceeds the requested color limit."""

    def __init__(self, limit):
        super().__init__(f"no proper coloring with at most {limit} colors")
        self.limit = limit


class SearchCapExceeded(ChromthreshError):
    """An exact search ran past its configured node/instance budget."""


class BadArity(ChromthreshError):
    pass


class BudgetExceeded(ChromthreshError):
    pass


class ParamViolation(ChromthreshError):
    """A construction parameter violates a hypothesis its freeness needs."""


class AttemptsExhausted(ChromthreshError):
    pass


class EdgesOverlap(ChromthreshError):
    pass


class EmptyS(ChromthreshError):
    pass


class PostconditionFailed(ChromthreshError):
    """An a-posteriori validator rejected a computed refinement outcome.

    Carries the validator's diagnostic; raised instead of returning an
    object that does not satisfy the advertised postconditions.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details


class AuditFailed(ChromthreshError):
    """A claimed dimension witness has a transversal section without the
    required fiber pattern."""


class ImproperInput(ChromthreshError):
    pass


class HypothesisViolated(ChromthreshError):
    """A bundle does not meet the fiber-density hypothesis of the coloring
    procedure."""


class NotF5Free(ChromthreshError):
    """The input to the 5-cut finder contains the generalized triangle.

    ``embedding`` holds the witness found by the gate check.
    """

    def __init__(self, embedding):
        super().__init__("input is not F5-free")
        self.embedding = embedding


class InternalInvariant(ChromthreshError):
    """A structural fact the construction relies on was contradicted
    mid-run; for the 5-cut finder this always carries the F5 copy whose
    absence was assumed."""

    def __init__(self, message, embedding=None):
        super().__init__(message)
        self.embedding = embedding


class NoWitness(ChromthreshError):
    pass


class GroundTooLarge(ChromthreshError):
    pass


class ImproperColoring(ChromthreshError):
    pass
