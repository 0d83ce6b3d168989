from __future__ import annotations

import logging

from django.apps import AppConfig

logger = logging.getLogger(__name__)


class FamKernelConfig(AppConfig):
    name = "fam_kernel"
    verbose_name = "Finitely Additive Markov Kernels"

    def ready(self) -> None:
        logger.debug("Registering fam_kernel suites and scenario checks")
        from . import scenarios, suites  # noqa: F401

        logger.debug("Registering fam_kernel system checks")
        from . import checks  # noqa: F401
