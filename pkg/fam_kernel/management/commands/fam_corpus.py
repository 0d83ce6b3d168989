from __future__ import annotations

import argparse
import sys
from typing import Any

from django.core.management.base import BaseCommand, CommandError

from fam_kernel import codec, settings
from fam_kernel.scenarios import ScenarioError, run_corpus


class Command(BaseCommand):
    help = "Runs every golden scenario of the corpus directory."  # noqa: A003

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--directory", default=None, help="Defaults to FAM_KERNEL_CORPUS_DIR.")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--jobs", type=int, default=1, help="Scenarios run in parallel.")
        parser.add_argument(
            "--json", action="store_true", default=False, help="Print the reports."
        )
        parser.add_argument("--no-timing", action="store_true", default=False)

    def handle(self, *args: Any, **options: Any) -> None:
        directory = options["directory"] or settings.CORPUS_DIR
        try:
            reports = run_corpus(directory, seed=options["seed"], jobs=options["jobs"])
        except ScenarioError as ex:
            raise CommandError(str(ex))
        if not reports:
            raise CommandError(f"No scenarios found in {directory}.")
        if options["json"]:
            documents = [
                report.as_dict(include_timing=not options["no_timing"]) for report in reports
            ]
            self.stdout.write(codec.dumps(documents), ending="")
        else:
            for report in reports:
                status = "ok" if report.passed else "FAILED"
                self.stdout.write(f"{report.name}: {status} ({len(report.results)} checks)")
                for failure in report.failures:
                    self.stdout.write(f"  x {failure.name}: {failure.detail}")
        failed = sum(not report.passed for report in reports)
        if failed:
            sys.exit(1)
