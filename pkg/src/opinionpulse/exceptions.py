"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all opinionpulse errors."""


class InputError(PipelineError):
    """A file or data item violates its declared format or contract."""
