from __future__ import annotations

import random
from typing import Any, List

from django.apps import AppConfig
from django.core.checks import CheckMessage, Error, Warning, register

from . import registry, settings

CHECK_ID_CLOSURE_CAP = "fam_kernel.E001"
CHECK_ID_SUITE_SIGNATURE = "fam_kernel.E002"
CHECK_ID_CORPUS_DIR = "fam_kernel.W001"


@register()
def check_closure_cap(app_configs: list[AppConfig], **kwargs: Any) -> List[CheckMessage]:
    """Check that the orbit closure cap allows at least one generator."""
    if isinstance(settings.CLOSURE_CAP, int) and settings.CLOSURE_CAP >= 1:
        return []
    return [
        Error(
            f"FAM_KERNEL_CLOSURE_CAP must be a positive integer, not {settings.CLOSURE_CAP!r}.",
            hint="Remove the setting to use the default of 64 generators.",
            id=CHECK_ID_CLOSURE_CAP,
        )
    ]


@register()
def check_corpus_dir(app_configs: list[AppConfig], **kwargs: Any) -> List[CheckMessage]:
    """Check that the golden corpus directory exists."""
    if settings.CORPUS_DIR.is_dir():
        return []
    return [
        Warning(
            f'Scenario corpus directory "{settings.CORPUS_DIR}" does not exist.',
            hint="Set FAM_KERNEL_CORPUS_DIR (setting or environment variable).",
            id=CHECK_ID_CORPUS_DIR,
        )
    ]


@register()
def check_suite_signatures(app_configs: list[AppConfig], **kwargs: Any) -> List[CheckMessage]:
    """Check that every registered suite function can be called as `suite(rng)`."""
    errors: List[CheckMessage] = []
    rng = random.Random(0)
    for label, funcs in registry._suites.items():
        for func in funcs:
            if not registry.try_bind(func, rng):
                errors.append(
                    Error(
                        f'Suite function "{registry.fname(func)}" cannot be called '
                        f'as suite(rng) for suite "{label}".',
                        hint="Suite functions take a single random.Random argument.",
                        id=CHECK_ID_SUITE_SIGNATURE,
                    )
                )
    return errors
