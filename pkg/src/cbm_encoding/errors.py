"""Exception hierarchy.

Everything raised on bad input derives from :class:`CbmDataError` so the CLI
can map it to the data/schema exit code.
"""


class CbmError(Exception):
    """Base class for all package errors."""


class CbmDataError(CbmError, ValueError):
    """Invalid data, schema or model file."""


class UnsupportedMomentCount(CbmDataError):
    pass


class EmptyTargetError(CbmDataError):
    pass


class TaskMismatchError(CbmDataError):
    pass


class SchemaMismatchError(CbmDataError):
    pass


class IngestError(CbmDataError):
    pass


class MalformedModelError(CbmDataError):
    pass


class UnsupportedVersionError(CbmDataError):
    pass


class UndefinedMomentError(CbmDataError):
    pass


class UndefinedMetricError(CbmDataError):
    pass


class UnsupportedCombinationError(CbmDataError):
    pass
