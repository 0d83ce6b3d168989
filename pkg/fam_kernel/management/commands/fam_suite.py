from __future__ import annotations

import argparse
import sys
from typing import Any

from django.core.management.base import BaseCommand, CommandError

from fam_kernel.registry import UnknownSuite
from fam_kernel.scenarios import Report
from fam_kernel.suites import run_property_suite


def describe_failure(report: Report) -> str:
    """The summary line and the first failing instance with its coordinates."""
    summary = report.results[0]
    failure = next((r for r in report.results[1:] if not r.passed), summary)
    if failure is summary:
        return f"{summary.name}: {summary.detail}"
    witness = failure.witness or {}
    where = f"seed={witness.get('seed')} index={witness.get('index')}"
    detail = f": {failure.detail}" if failure.detail else ""
    return f"{summary.name}: {summary.detail}\n{failure.name} ({where}){detail}"


class Command(BaseCommand):
    help = "Runs a randomized property suite and prints its JSON report."  # noqa: A003

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("name", help="Registered suite label (see display_suites).")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument(
            "--count", type=int, default=None, help="Defaults to the suite's reference count."
        )
        parser.add_argument("--no-timing", action="store_true", default=False)

    def handle(self, *args: Any, **options: Any) -> None:
        if options["count"] is not None and options["count"] < 1:
            raise CommandError("--count must be at least 1.")
        try:
            report = run_property_suite(options["name"], options["seed"], options["count"])
        except UnknownSuite as ex:
            raise CommandError(ex.args[0])
        self.stdout.write(report.to_json(include_timing=not options["no_timing"]), ending="")
        if not report.passed:
            self.stderr.write(describe_failure(report))
            sys.exit(1)
