"""Exception hierarchy shared by all modules."""


class EquidistError(Exception):
    """Base class for every error raised by this package."""


class InvalidDomain(EquidistError, ValueError):
    pass


class NotConvex(InvalidDomain):
    pass


class PointOutside(EquidistError, ValueError):
    pass


class SingularMatrix(EquidistError, ValueError):
    pass


class DegenerateBasis(EquidistError, ValueError):
    pass


class RegionTooLarge(EquidistError, RuntimeError):
    pass


class NotAdmissible(EquidistError, RuntimeError):
    pass


class TooManyFlagged(EquidistError, RuntimeError):
    pass


class UnboundedDomain(EquidistError, ValueError):
    pass


class InvalidGrid(EquidistError, ValueError):
    pass


class EmptyInput(EquidistError, ValueError):
    pass


class OpenContour(EquidistError, ValueError):
    pass


class CenterOutside(EquidistError, ValueError):
    pass


class NonConvex(EquidistError, ValueError):
    pass


class DegenerateFit(EquidistError, ValueError):
    pass


class FrameSingular(EquidistError, ValueError):
    pass


class EmptyField(EquidistError, ValueError):
    pass
