"""Exception hierarchy shared by the solvers and the benchmark harness."""


class HopeTreeError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(HopeTreeError, ValueError):
    pass


class RankDeficient(HopeTreeError):
    """The column submatrix for a support is numerically rank deficient."""


class SupportTooLarge(HopeTreeError, ValueError):
    pass


class NotEnoughCandidates(HopeTreeError, ValueError):
    pass


class AllPathsDegenerate(HopeTreeError):
    """Every candidate path of a hope-tree hit a rank-deficient support."""


class DriverStalled(HopeTreeError):
    pass


class InstanceTooLarge(HopeTreeError, ValueError):
    pass


class ZeroSignal(HopeTreeError, ValueError):
    pass


class ConfigError(HopeTreeError, ValueError):
    pass
