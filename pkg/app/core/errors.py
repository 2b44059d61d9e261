"""Иерархия ошибок проекта. Сообщение каждой ошибки начинается с фиксированного токена."""


class HankelTseError(Exception):
    token = "error"

    def __init__(self, detail: str = ""):
        self.detail = detail
        message = self.token if not detail else f"{self.token}: {detail}"
        super().__init__(message)

    def __reduce__(self):
        # Исключения пересекают границу процесса в пуле испытаний
        return type(self), (self.detail,)


# --- ВХОДНЫЕ ДАННЫЕ ---

class InputError(HankelTseError, ValueError):
    token = "invalid input"


class MalformedRecordError(InputError):
    token = "malformed record"

    def __init__(self, detail: str = "", row: int | None = None):
        self.row = row
        self.raw_detail = detail
        if row is not None:
            detail = f"row {row}" + (f" ({detail})" if detail else "")
        super().__init__(detail)

    def __reduce__(self):
        return type(self), (self.raw_detail, self.row)


class EmptyObservationsError(InputError):
    token = "no observations"


class EmptyFieldError(InputError):
    token = "empty field"


class NothingToScoreError(InputError):
    token = "nothing to score"


class IncompleteFieldError(InputError):
    token = "requires complete field"


# --- КОНФИГУРАЦИЯ ---

class ConfigError(HankelTseError, ValueError):
    token = "invalid config"


class InvalidFractionError(ConfigError):
    token = "invalid fraction"


class EmbeddingTooLargeError(ConfigError):
    token = "embedding too large"


class InconsistentTensorError(ConfigError):
    token = "inconsistent tensor"


class FoldShapeError(ConfigError):
    token = "fold shape error"


class InvalidPatternError(ConfigError):
    token = "invalid pattern"


# --- ЧИСЛЕННЫЕ ОШИБКИ ---

class NumericalError(HankelTseError, ArithmeticError):
    token = "numerical error"


class NumericalFailureError(NumericalError):
    token = "numerical failure"


class DecompositionError(NumericalError):
    token = "decomposition failure"


class DegenerateNormalizerError(NumericalError):
    token = "degenerate normalizer"


class TrialFailedError(HankelTseError):
    token = "trial failed"

    def __init__(self, seed: int, cause: BaseException):
        self.seed = seed
        self.cause = cause
        super().__init__(f"seed {seed}: {cause}")

    def __reduce__(self):
        return type(self), (self.seed, self.cause)
