"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented exit statuses (2 config/parse, 3 data, 4 internal invariant).
"""


class CovImputeError(Exception):
    exit_code = 3


class DimensionMismatch(CovImputeError):
    pass


class InsufficientData(CovImputeError):
    pass


class RankDeficient(CovImputeError):
    pass


class NotPositiveDefinite(CovImputeError):
    pass


class InvalidParameter(CovImputeError):
    exit_code = 2


class DegenerateScenario(CovImputeError):
    pass


class MissingRng(CovImputeError):
    exit_code = 2


class InvalidMethod(CovImputeError):
    exit_code = 2


class InsufficientImputations(CovImputeError):
    pass


class ParseError(CovImputeError):
    exit_code = 2


class InvalidConfig(CovImputeError):
    exit_code = 2


class InvariantViolation(CovImputeError):
    exit_code = 4
