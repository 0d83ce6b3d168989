from __future__ import annotations

import argparse
from typing import Any

from django.core.management.base import BaseCommand, CommandError

from fam_kernel import codec
from fam_kernel.kernels import UndecidedLimit
from fam_kernel.operators import check_H1, check_H2, iterate
from fam_kernel.scenarios import ScenarioError, load_scenario


class Command(BaseCommand):
    help = "Prints the norm trace of a scenario as CSV or JSON."  # noqa: A003

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("path", help="Scenario file (schema fam-kernel/1).")
        parser.add_argument("--format", choices=("csv", "json"), default="csv")
        parser.add_argument("--n-max", type=int, default=None, help="Override the horizon.")

    def handle(self, *args: Any, **options: Any) -> None:
        try:
            scenario = load_scenario(options["path"])
        except (OSError, ScenarioError) as ex:
            raise CommandError(str(ex))
        operator = scenario.operator
        n_max = options["n_max"] or scenario.n_max
        try:
            trace = iterate(operator, scenario.initial, n_max)
        except UndecidedLimit as ex:
            raise CommandError(str(ex))
        if options["format"] == "csv":
            self.stdout.write(codec.trace_to_csv(trace), ending="")
        else:
            document = codec.trace_to_json(trace, check_H1(operator), check_H2(operator))
            self.stdout.write(codec.dumps(document), ending="")
