"""Registry is responsible for managing the registered property suites and scenario checks."""
from __future__ import annotations

import inspect
import logging
import threading
from collections import defaultdict
from typing import Any, Callable, Dict, Iterable, List

from . import settings
from .signals import check_failed
from .verdicts import CheckResult

RegistryType = Dict[str, List[Callable]]
logger = logging.getLogger(__name__)


def fname(func: Callable) -> str:
    """Return fully-qualified function name."""
    return "{}.{}".format(func.__module__, func.__name__)


def docstring(func: Callable) -> list[str] | None:
    """Split and strip function docstrings into a list of lines."""
    try:
        lines = func.__doc__.strip().split("\n")  # type: ignore
        return [line.strip() for line in lines]
    except AttributeError:
        return None


class SignatureMismatch(Exception):
    def __init__(self, func: Callable):
        super().__init__(
            f"Check signature mismatch for function "
            f"`{func.__name__}{inspect.signature(func)}`."
        )


class UnknownSuite(KeyError):
    def __init__(self, label: str, kind: str = "suite") -> None:
        self.label = label
        super().__init__(f"No {kind} is registered as `{label}`.")


class Registry(defaultdict):
    """
    Registry of check functions.

    This class is a defaultdict(list) that contains a mapping of a label
    to the functions that implement it. A property suite function takes a
    `random.Random` and checks one generated instance; a scenario check
    takes the scenario run it inspects. Both return a CheckResult or a
    list of them.

    """

    def __init__(self, kind: str) -> None:
        self.kind = kind
        self._lock = threading.Lock()
        super().__init__(list)

    def by_label(self, value: str) -> RegistryType:
        """Filter registry by label (exact match)."""
        return {k: v for k, v in self.items() if k == value}

    def by_label_contains(self, value: str) -> RegistryType:
        """Filter registry by label (contains string)."""
        return {k: v for k, v in self.items() if value in k}

    def contains(self, label: str, func: Callable) -> bool:
        """
        Lookup label: function mapping in the registry.

        The fname of the function is used in the lookup, as running
        a simple `func in list` check doesn't work.

        """
        return fname(func) in [fname(f) for f in self.get(label, [])]

    def require(self, label: str) -> List[Callable]:
        """Return the functions registered for a label, which must exist."""
        if label not in self:
            raise UnknownSuite(label, self.kind)
        return self[label]

    def add(self, label: str, func: Callable) -> None:
        """Add a function to the registry."""
        with self._lock:
            self[label].append(func)

    def run(self, label: str, *args: Any) -> List[CheckResult]:
        """Run all functions registered for a label and collect their results."""
        results: List[CheckResult] = []
        for func in self.get(label, []):
            results.extend(_run_func(label, func, *args))
        for result in results:
            if not result.passed:
                check_failed.send(Registry, label=result.name, witness=result.witness)
        return results


class capture_failures:
    """
    Context manager used to collect the labels of failing checks.

    It connects a receiver to the `check_failed` signal for the duration
    of the block.

    """

    def __init__(self) -> None:
        self.failures: list[str] = []

    def __enter__(self) -> list[str]:
        check_failed.connect(self.on_failure, dispatch_uid="capture_failures")
        return self.failures

    def __exit__(self, *args: Any) -> None:
        check_failed.disconnect(self.on_failure, dispatch_uid="capture_failures")

    def on_failure(self, sender: Any, **kwargs: Any) -> None:
        self.failures.append(kwargs["label"])


def _as_results(label: str, value: Any) -> List[CheckResult]:
    if isinstance(value, CheckResult):
        return [value]
    if value is None:
        return [CheckResult.ok(label)]
    return list(value)


def _run_func(label: str, func: Callable, *args: Any) -> List[CheckResult]:
    """Run a single check function and handle errors."""
    if not try_bind(func, *args):
        # the function cannot be run at all, so this is never recorded
        raise SignatureMismatch(func)
    try:
        return _as_results(label, func(*args))
    except Exception as ex:  # noqa: B902
        logger.exception("Error running check function '%s'", fname(func))
        if settings.ABORT_ON_ERROR:
            raise
        return [CheckResult.fail(label, f"{type(ex).__name__}: {ex}")]


def try_bind(func: Callable, *args: Any, **kwargs: Any) -> bool:
    """Try binding args & kwargs to a given func."""
    try:
        inspect.signature(func).bind(*args, **kwargs)
    except TypeError:
        return False
    else:
        return True


def register_suite(label: str, func: Callable) -> None:
    """Add a property suite function to the registry."""
    if _suites.contains(label, func):
        return
    _suites.add(label, func)


def register_check(label: str, func: Callable) -> None:
    """Add a scenario check function to the registry."""
    if _checks.contains(label, func):
        return
    _checks.add(label, func)


def get_suites(label: str) -> List[Callable]:
    return _suites.require(label)


def get_checks(label: str) -> List[Callable]:
    return _checks.get(label, [])


def suite_labels() -> Iterable[str]:
    return sorted(_suites)


# global registries
_suites = Registry("suite")
_checks = Registry("check")
