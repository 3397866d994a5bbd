"""Exception hierarchy shared by all pipeline stages."""


class DaoKpiError(Exception):
    """Base class for every error raised by the toolchain."""


class ArgumentError(DaoKpiError, ValueError):
    pass


class ConfigError(DaoKpiError, ValueError):
    pass


class TransportError(DaoKpiError):
    """Provider unreachable, unknown block, missing contract or exhausted retry budget."""


class ProviderError(DaoKpiError):
    """JSON-RPC error object returned by a provider."""

    def __init__(self, message: str, code: int = None):
        super().__init__(message)
        self.code = code


class AbiParseError(DaoKpiError, ValueError):

    def __init__(self, message: str, position: int = None):
        if position is not None:
            message = f'{message} (at position {position})'
        super().__init__(message)
        self.position = position


class UnsupportedTypeError(DaoKpiError, ValueError):

    def __init__(self, type_str: str, event_name: str = None):
        where = f' in event {event_name}' if event_name else ''
        super().__init__(f'Unsupported ABI type "{type_str}"{where}')
        self.type_str = type_str


class WrongEventError(DaoKpiError, ValueError):
    pass


class MalformedLogError(DaoKpiError, ValueError):
    pass


class DataIntegrityError(DaoKpiError):
    pass


class InsufficientSampleError(DaoKpiError, ValueError):
    pass


class DegenerateSampleError(DaoKpiError, ValueError):
    pass


class SpecError(DaoKpiError, ValueError):
    pass


class StageError(DaoKpiError):
    """A pipeline stage could not run; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f'[{stage}] {message}')
        self.stage = stage
