import json
import random
import tempfile
from fractions import Fraction
from pathlib import Path
from unittest import mock

from django.test import SimpleTestCase

from fam_kernel import registry, settings
from fam_kernel.generators import random_atomic_chain, random_combined, random_universe
from fam_kernel.kernels import convolve
from fam_kernel.measures import dirac
from fam_kernel.registry import UnknownSuite
from fam_kernel.scenarios import parse_scenario, run_scenario
from fam_kernel.suites import (
    matrix_power,
    matrix_product,
    run_property_suite,
    scenario_witness,
    stationary_oracle,
)
from fam_kernel.verdicts import CheckResult

half = Fraction(1, 2)


class AcceptanceTests(SimpleTestCase):
    """Every registered suite passes on its reference instance count."""

    def assertSuitePasses(self, name: str, count: int, seed: int = 0) -> None:
        report = run_property_suite(name, seed=seed, count=count)
        self.assertTrue(report.passed, [r.as_dict() for r in report.failures[:3]])
        self.assertEqual(report.tables["instances"], count)
        self.assertEqual(report.tables["failed"], 0)
        self.assertEqual(report.results[0].name, name)

    def test_pfa_criterion(self) -> None:
        self.assertSuitePasses("pfa_criterion", 200)

    def test_pfa_kernel_range(self) -> None:
        self.assertSuitePasses("pfa_kernel_range", 200)

    def test_pfa_kernel_powers(self) -> None:
        self.assertSuitePasses("pfa_kernel_powers", 50)

    def test_superpositions(self) -> None:
        self.assertSuitePasses("superpositions", 100)

    def test_decomposition(self) -> None:
        self.assertSuitePasses("decomposition", 500)

    def test_kernel_decomposition(self) -> None:
        self.assertSuitePasses("kernel_decomposition", 100)

    def test_matrix_oracle(self) -> None:
        self.assertSuitePasses("matrix_oracle", 100)

    def test_invariant_classes(self) -> None:
        self.assertSuitePasses("invariant_classes", 50)

    def test_h1_norm_law(self) -> None:
        self.assertSuitePasses("h1_norm_law", 50)

    def test_h2_norm_law(self) -> None:
        self.assertSuitePasses("h2_norm_law", 50)

    def test_uniform_decay(self) -> None:
        self.assertSuitePasses("uniform_decay", 30)

    def test_linearity(self) -> None:
        self.assertSuitePasses("linearity", 100, seed=11)


class RunPropertySuiteTests(SimpleTestCase):
    def test_unknown_suite(self) -> None:
        self.assertRaises(UnknownSuite, run_property_suite, "no_such_suite")

    def test_reports_are_reproducible(self) -> None:
        first = run_property_suite("linearity", seed=3, count=5)
        second = run_property_suite("linearity", seed=3, count=5)
        self.assertEqual(first.to_json(include_timing=False), second.to_json(include_timing=False))
        self.assertEqual(first.results[0].detail, "5/5 instances passed, 0 skipped")

    def test_failures_carry_their_coordinates(self) -> None:
        def failing(rng: random.Random) -> CheckResult:
            universe = random_universe(rng)
            combined = random_combined(rng, universe)
            witness = scenario_witness("broken", combined, dirac(combined.ground, 0), universe)
            return CheckResult.fail("broken", "always fails", witness)

        suites = registry.Registry("suite")
        suites.add("broken", failing)
        with tempfile.TemporaryDirectory() as tmp, mock.patch.object(
            registry, "_suites", suites
        ), mock.patch.object(settings, "FAILURE_DUMP_DIR", tmp):
            report = run_property_suite("broken", seed=4, count=2)
            dumped = sorted(p.name for p in Path(tmp).iterdir())
            document = json.loads((Path(tmp) / "broken-4-1.json").read_text())
        self.assertFalse(report.passed)
        self.assertEqual(report.tables["failed"], 2)
        self.assertEqual(
            [r.name for r in report.results], ["broken", "broken[0]", "broken[1]"]
        )
        witness = report.results[2].witness
        self.assertEqual((witness["suite"], witness["seed"], witness["index"]), ("broken", 4, 1))
        self.assertEqual(witness["scenario"], document)
        self.assertEqual(dumped, ["broken-4-0.json", "broken-4-1.json"])
        # the dumped scenario runs as it stands
        self.assertEqual(run_scenario(parse_scenario(document)).name, "broken")

    def test_plain_witnesses_are_kept_as_detail(self) -> None:
        suites = registry.Registry("suite")
        suites.add("plain", lambda rng: CheckResult.fail("plain", witness=[1, 2]))
        with mock.patch.object(registry, "_suites", suites):
            report = run_property_suite("plain", count=1)
        self.assertEqual(
            report.results[1].witness, {"suite": "plain", "seed": 0, "index": 0, "detail": [1, 2]}
        )


class MatrixOracleTests(SimpleTestCase):
    def test_matrix_arithmetic(self) -> None:
        swap = [[0, 1], [1, 0]]
        self.assertEqual(matrix_product(swap, swap), [[1, 0], [0, 1]])
        self.assertEqual(matrix_power(swap, 3), [[0, 1], [1, 0]])

    def test_stationary_oracle(self) -> None:
        self.assertEqual(stationary_oracle([[0, 1], [1, 0]]), [half, half])
        chain = [[half, half, 0], [0, half, half], [half, 0, half]]
        third = Fraction(1, 3)
        self.assertEqual(stationary_oracle(chain), [third, third, third])
        lopsided = [[Fraction(3, 4), Fraction(1, 4)], [half, half]]
        self.assertEqual(stationary_oracle(lopsided), [Fraction(2, 3), Fraction(1, 3)])

    def test_random_chains_match_their_matrix(self) -> None:
        chain = random_atomic_chain(random.Random(5), size=3)
        states = chain.ground.points
        self.assertEqual(len(states), 3)
        for i, x in enumerate(states):
            row = chain.kernel.row(x)
            self.assertEqual([row.atomic[y] for y in states], list(chain.matrix[i]))

    def test_matrix_oracle_covers_apply_powers_and_convolution(self) -> None:
        results = registry._suites.run("matrix_oracle", random.Random("oracle"))
        names = [result.name for result in results]
        self.assertEqual(names[0], "matrix_oracle.apply")
        self.assertEqual(names[1:6], [f"matrix_oracle.power[{n}]" for n in range(1, 6)])
        self.assertEqual(names[6:], ["matrix_oracle.convolve", "matrix_oracle.stationary"])
        self.assertTrue(all(result.passed for result in results))

    def test_convolution_of_two_chains(self) -> None:
        rng = random.Random(5)
        first, second = random_atomic_chain(rng, 3), random_atomic_chain(rng, 3)
        product = convolve(first.kernel, second.kernel)
        states = first.ground.points
        self.assertEqual(
            [[product.row(x).atomic[y] for y in states] for x in states],
            matrix_product(first.matrix, second.matrix),
        )
