"""Exception hierarchy shared by every module.

The CLI maps any ``FounderRankError`` to exit code 1 and prints one
structured line; anything else is a bug.
"""


class FounderRankError(Exception):
    """Base class for domain errors."""

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class MalformedEvent(FounderRankError):
    def __init__(self, index, reason):
        self.index = index
        self.reason = reason
        super().__init__(f"record {index}: {reason}")


class CorruptSnapshot(FounderRankError):
    pass


class UnsupportedVersion(FounderRankError):
    pass


class NonConvergence(FounderRankError):
    def __init__(self, max_iter, residual=None, partial=None):
        self.max_iter = max_iter
        self.residual = residual
        self.partial = partial
        msg = f"no convergence after {max_iter} iterations"
        if residual is not None:
            msg += f" (residual {residual:.3e})"
        super().__init__(msg)


class UnknownMetric(FounderRankError):
    pass


class SingularDesign(FounderRankError):
    def __init__(self, message, columns=()):
        self.columns = tuple(columns)
        super().__init__(message)


class IdentityConflict(FounderRankError):
    pass


class UnknownNode(FounderRankError):
    pass


class UnknownCompanyId(FounderRankError):
    pass


class UnknownTopicId(FounderRankError):
    pass


class InvalidQuery(FounderRankError):
    pass


class CatalogError(FounderRankError):
    pass


class InvalidTimeline(FounderRankError):
    pass


class InputError(FounderRankError):
    """A file could not be read or did not match its documented format."""
