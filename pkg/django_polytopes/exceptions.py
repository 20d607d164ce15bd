class PolytopeLabError(Exception):
    """Base class for every error raised by the lab."""


class InvalidArgument(PolytopeLabError, ValueError):
    pass


class InvalidInput(InvalidArgument):
    """Data handed to an analysis step (for example a scaling fit) is unusable."""


class DegenerateSimplex(PolytopeLabError):
    pass


class DegenerateHull(PolytopeLabError):
    """The hull is flat, so no facet statistics exist."""


class PackingFailure(PolytopeLabError):
    pass


class TrialFailure(PolytopeLabError):
    pass


class NumericalFailure(PolytopeLabError):
    pass


class Unsupported(PolytopeLabError, NotImplementedError):
    pass
