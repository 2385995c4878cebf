import contextlib

from absl import logging


class DmkdeError(Exception):
    """Base class of every error raised by the dmkde package."""


class ParameterError(DmkdeError, ValueError):
    pass


class DegenerateEmbeddingError(DmkdeError):
    pass


class DegenerateModelError(DmkdeError):
    pass


class EigenSolverError(DmkdeError):
    pass


class UndefinedMetricError(DmkdeError):
    pass


class TrainingDivergedError(DmkdeError):
    def __init__(self, epoch, loss):
        super().__init__(
            'AFF training diverged at epoch %d (loss=%r)' % (epoch, loss))
        self.epoch = epoch
        self.loss = loss


class IngestionError(DmkdeError):
    def __init__(self, message, row=None, column=None):
        location = []
        if row is not None:
            location.append('row %d' % row)
        if column is not None:
            location.append('column %r' % column)
        if location:
            message = '%s (%s)' % (message, ', '.join(location))
        super().__init__(message)
        self.row = row
        self.column = column


class PipelineError(DmkdeError):
    def __init__(self, stage, cause):
        super().__init__('[%s] %s' % (stage, cause))
        self.stage = stage
        self.cause = cause


@contextlib.contextmanager
def stage(name):
    """Re-raises package errors as PipelineError tagged with `name`; errors
    already tagged by an inner stage pass through unchanged."""
    logging.debug('stage %s', name)
    try:
        yield
    except PipelineError:
        raise
    except DmkdeError as e:
        raise PipelineError(name, e) from e
