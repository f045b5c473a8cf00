"""Exception types shared across the pipeline."""


class CamwatchError(Exception):
    """Base class for all pipeline errors."""


class InvalidInput(CamwatchError):
    pass


class DimensionMismatch(CamwatchError):
    pass


class InsufficientSamples(CamwatchError):
    pass


class DecodeError(CamwatchError):
    pass


class CrawlFailed(CamwatchError):
    """All seeds unreachable. ``causes`` maps seed URL -> failure reason."""

    def __init__(self, causes: dict):
        self.causes = dict(causes)
        super().__init__(f"all seeds unreachable: {self.causes}")


class ArchiveError(CamwatchError):
    pass


class SchemaError(CamwatchError):
    pass


class MissingTruth(CamwatchError):
    pass


class InvalidBox(CamwatchError):
    pass


class ConfigError(CamwatchError):
    """Invalid pipeline configuration. ``problems`` lists one message per field."""

    def __init__(self, problems: list):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
