from __future__ import annotations

import argparse
import sys
from typing import Any

from django.core.management.base import BaseCommand, CommandError

from fam_kernel.scenarios import ScenarioError, run_scenario


class Command(BaseCommand):
    help = "Runs a scenario file and prints its JSON report."  # noqa: A003

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("path", help="Scenario file (schema fam-kernel/1).")
        parser.add_argument("--seed", type=int, default=None, help="Override the scenario seed.")
        parser.add_argument(
            "--no-timing",
            action="store_true",
            default=False,
            help="Leave timing out of the report (byte-identical reruns).",
        )

    def handle(self, *args: Any, **options: Any) -> None:
        try:
            report = run_scenario(options["path"], seed=options["seed"])
        except (OSError, ScenarioError) as ex:
            raise CommandError(str(ex))
        self.stdout.write(report.to_json(include_timing=not options["no_timing"]), ending="")
        if not report.passed:
            for failure in report.failures:
                self.stderr.write(f"FAILED {failure.name}: {failure.detail}")
            sys.exit(1)
