"""Exception hierarchy shared by all heraldspec modules."""


class HeraldspecError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HeraldspecError, ValueError):
    """An argument lies outside the domain of the operation."""


class SaturationError(DomainError):
    """Absorbance diverges because the sample transmits nothing."""


class CalibrationError(HeraldspecError, ValueError):
    """Temperature outside the calibration table, or an inconsistent table."""


class ParseError(HeraldspecError, ValueError):
    """A numeric text file could not be parsed.

    ``lineno`` is 1-based, or ``None`` when the problem concerns the whole
    file (e.g. no data rows).
    """

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}"
            if lineno is not None:
                where += f":{lineno}"
            where += ": "
        elif lineno is not None:
            where = f"line {lineno}: "
        super().__init__(where + message)


class InsufficientDataError(HeraldspecError):
    """A trial recorded no herald detections, so the estimator is undefined."""


class EnsembleError(HeraldspecError):
    """No usable trials were produced by an ensemble."""


class FitError(HeraldspecError, ValueError):
    """Degenerate input to a scaling fit."""


class ResolutionUndefinedError(HeraldspecError, ValueError):
    """Two samples have identical mean absorption and cannot be resolved."""


class ConfigError(HeraldspecError, ValueError):
    """A configuration failed validation.

    ``problems`` lists every violated constraint, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
