from __future__ import annotations

import warnings


class FlockException(Exception):
    pass


class FlockArgumentError(FlockException):
    pass


class FlockUsageError(FlockException):
    pass


class ConfigError(FlockUsageError, ValueError):
    pass


class DomainError(FlockUsageError, ValueError):
    pass


class PersistenceError(ConfigError):
    pass


class DegenerateScheduleError(FlockUsageError):
    pass


class HistoryRangeError(FlockException, IndexError):
    pass


class OrderingError(FlockException, ValueError):
    pass


class KernelError(FlockException, ArithmeticError):
    pass


class IntegrationError(FlockException, RuntimeError):
    def __init__(self, message: str, time: float) -> None:
        super().__init__(f"{message} (t = {time:.6g})")
        self.time = time


class ScenarioError(FlockUsageError):
    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"[primary]{path}[/]: {reason}")
        self.path = path
        self.reason = reason


class ChecksFailed(FlockUsageError):
    def __init__(self, failed: list[str]) -> None:
        super().__init__(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        self.failed = tuple(failed)


class NoConfigError(FlockUsageError, KeyError):
    def __str__(self) -> str:
        return f"No such config key: {self.args[0]!r}"


class FlockWarning(Warning):
    pass


class ResolutionWarning(FlockWarning):
    pass


warnings.simplefilter("default", category=ResolutionWarning)
