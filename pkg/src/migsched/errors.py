"""Exception types raised across the package."""


class MigSchedError(Exception):
    """Base class for every error raised by migsched."""


class InvalidPlacement(MigSchedError):
    pass


class SlicesBusy(MigSchedError):
    pass


class BadThreshold(MigSchedError):
    pass


class UnknownJob(MigSchedError):
    pass


class UnknownProfile(MigSchedError):
    pass


class UnknownGpu(MigSchedError):
    pass


class NotLazy(MigSchedError):
    pass


class BadConcurrency(MigSchedError):
    pass


class JobsPending(MigSchedError):
    pass


class TraceUnsorted(MigSchedError):
    pass


class BadSpec(MigSchedError):
    pass


class ParseError(MigSchedError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class SimulationStalled(MigSchedError):
    """Queued jobs remain but nothing can ever free capacity for them."""
