from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Callable, List

from django.core.management.base import BaseCommand

from fam_kernel.registry import RegistryType, _checks, _suites, docstring, fname
from fam_kernel.scenarios import DEFAULT_CHECKS
from fam_kernel.suites import DEFAULT_COUNT, REFERENCE_COUNTS


def sort_entries(
    entries: RegistryType,
    func_sort_key: Callable[[Callable], Any],
) -> RegistryType:
    """
    Sort a registry dict by label and function.

    Use the ``func_sort_key`` parameter to determine how the functions
    registered under a label are sorted.
    """
    sorted_by_label = sorted(entries.items(), key=lambda label_and_funcs: label_and_funcs[0])
    return {label: sorted(funcs, key=func_sort_key) for label, funcs in sorted_by_label}


def label_heading(label: str, checks: bool = False) -> str:
    """A label with the instance count of a suite, or whether a check runs by default."""
    if checks:
        return f"{label} (default)" if label in DEFAULT_CHECKS else label
    return f"{label} ({REFERENCE_COUNTS.get(label, DEFAULT_COUNT)} instances)"


class Command(BaseCommand):
    help = "Displays registered property suites and scenario checks."  # noqa: A003

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        self.missing_docstrings: List[str] = []
        self.checks = False
        super().__init__(*args, **kwargs)

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--checks",
            action="store_true",
            help="Display scenario checks instead of property suites.",
        )
        parser.add_argument(
            "--raw",
            action="store_true",
            help="Display raw mapping of labels to functions.",
        )
        parser.add_argument(
            "--verbose",
            action="store_true",
            help="Display full docstring for all functions.",
        )
        parser.add_argument(
            "--strict",
            action="store_true",
            default=False,
            dest="strict",
            help=(
                "Exit with a non-zero exit code if any registered functions "
                "have no docstrings."
            ),
        )
        parser.add_argument(
            "--label",
            action="store",
            dest="label",
            help="Filter on a single label.",
        )
        parser.add_argument(
            "--label-contains",
            action="store",
            dest="label-contains",
            help="Filter on labels containing the supplied value.",
        )

    def handle(self, *args: Any, **options: Any) -> None:
        self.checks = options["checks"]
        registry = _checks if options["checks"] else _suites
        kind = "scenario checks" if options["checks"] else "property suites"
        if options["label"]:
            self.stdout.write(f"\nRegistered {kind} matching '{options['label']}':")
            entries = registry.by_label(options["label"])
        elif options["label-contains"]:
            self.stdout.write(
                f"\nRegistered {kind} matching '*{options['label-contains']}*':"
            )
            entries = registry.by_label_contains(options["label-contains"])
        else:
            self.stdout.write(f"\nRegistered {kind}:")
            entries = registry

        entries = sort_entries(entries, func_sort_key=fname)

        if options["raw"]:
            self.print_raw(entries)
        elif options["verbose"]:
            self.print_verbose(entries)
        else:
            self.print_default(entries)

        self.print_missing()

        if options["strict"]:
            self.exit()

    def print_raw(self, entries: RegistryType) -> None:
        """Print out the fully-qualified named for each mapped function."""
        raw = {label: [fname(f) for f in funcs] for label, funcs in entries.items()}
        self.stdout.write(json.dumps(raw, indent=4))

    def print_verbose(self, entries: RegistryType) -> None:
        """Print the entire docstring for each mapped function."""
        for label, funcs in entries.items():
            self.stdout.write("")
            self.stdout.write(label_heading(label, self.checks))
            self.stdout.write("")
            for func in funcs:
                docs = docstring(func)
                if docs is None:
                    self.missing_docstrings.append(fname(func))
                    self.stderr.write(f"  x {fname(func)} (no docstring)")
                    self.stdout.write("")
                else:
                    self.stdout.write(f"  - {fname(func)}:")
                    for line in docs:
                        self.stdout.write(f"    {line}")
                    self.stdout.write("")

    def print_default(self, entries: RegistryType) -> None:
        """Print the first line of the docstring for each mapped function."""
        for label, funcs in entries.items():
            self.stdout.write("")
            self.stdout.write(label_heading(label, self.checks))
            for func in funcs:
                docs = docstring(func)
                if docs is None:
                    self.missing_docstrings.append(fname(func))
                    self.stderr.write(f"  x {fname(func)} (no docstring)")
                else:
                    self.stdout.write(f"  - {docs[0]}")

    def print_missing(self) -> None:
        """Print out the contents of self.missing_docstrings."""
        if self.missing_docstrings:
            self.stderr.write("\nThe following functions have no docstrings:")
            for md in self.missing_docstrings:
                self.stderr.write(f"  {md}")
        else:
            self.stdout.write("\nAll registered functions have docstrings")

    def exit(self) -> None:  # noqa: A003
        """Exit with the number of functions missing a docstring (CI use)."""
        sys.exit(len(self.missing_docstrings))
