from __future__ import annotations

from functools import wraps
from typing import Any, Callable

from . import registry


def is_property_suite(label: str) -> Callable:
    """
    Register a function as (one of) the checks of a randomized property suite.

    The function is called once per generated instance with a seeded
    `random.Random`, and returns a CheckResult or a list of them. A failing
    result should carry a witness reproducing the instance.

    """

    def decorator(func: Callable) -> Callable:
        registry.register_suite(label, func)

        @wraps(func)
        def inner_func(*args: Any, **kwargs: Any) -> Any:
            return func(*args, **kwargs)

        return inner_func

    return decorator


def is_scenario_check(label: str) -> Callable:
    """Register a function as a named check run against a scenario."""

    def decorator(func: Callable) -> Callable:
        registry.register_check(label, func)

        @wraps(func)
        def inner_func(*args: Any, **kwargs: Any) -> Any:
            return func(*args, **kwargs)

        return inner_func

    return decorator


def capture_failures() -> Callable:
    """Collect the labels of failing checks - used for testing."""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def inner_func(*args: Any, **kwargs: Any) -> Any:
            with registry.capture_failures() as failures:
                return func(*args, failures, **kwargs)

        return inner_func

    return decorator
