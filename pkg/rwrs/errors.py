class RwrsError(ValueError):
    """Base class for every error raised by the toolkit."""


class InvalidPmf(RwrsError):
    pass


class NotCentered(RwrsError):
    pass


class SupportDoesNotGenerateZ(RwrsError):
    pass


class ZeroVariance(RwrsError):
    pass


class UnknownStatistic(RwrsError):
    pass


class ZeroReps(RwrsError):
    pass


class ZOverflow(RwrsError):
    pass


class CapExceeded(RwrsError):
    pass


class NonRationalModel(RwrsError):
    pass


class ObservableNotCentered(RwrsError):
    pass


class DegenerateInput(RwrsError):
    pass


class MissingComponents(RwrsError):
    pass


class InvalidBudget(RwrsError):
    pass


class ConfigParseError(RwrsError):
    pass


class UnknownExperiment(RwrsError):
    pass


class IoFailure(RwrsError):
    pass


class EmptyDirectory(RwrsError):
    pass


# Exit status for each CLI-facing error; anything else derived from
# RwrsError exits with 1.
EXIT_CODES = {
    ConfigParseError: 2,
    UnknownExperiment: 3,
    IoFailure: 4,
    EmptyDirectory: 5,
}


def exit_code_for(error: Exception) -> int:
    for error_type, code in EXIT_CODES.items():
        if isinstance(error, error_type):
            return code
    return 1
