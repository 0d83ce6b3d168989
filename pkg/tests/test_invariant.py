from fractions import Fraction
from typing import Dict, List

from django.test import SimpleTestCase

from fam_kernel.invariant import (
    ClosureDiverged,
    Generator,
    NoRepresentableSolution,
    classify_invariants,
    default_seeds,
    generators_of,
    h_condition_corollaries,
    invariant_measure,
    orbit_closure,
    solve_invariant,
    uniform_decay,
)
from fam_kernel.kernels import Kernel, KernelRule, RowTemplate, make_combined
from fam_kernel.measures import Measure, MeasureType, dirac, filter_measure, zero_measure
from fam_kernel.operators import MarkovOperator
from fam_kernel.sets import (
    FilterFunctional,
    GroundKind,
    GroundSpace,
    TailFamily,
    full,
    interval,
    points,
)
from fam_kernel.verdicts import CheckResult, CheckStatus

SEGMENT = GroundSpace(GroundKind.UNIT_INTERVAL, "[0,1]")
INTEGERS = GroundSpace(GroundKind.INTEGERS, "Z")
ETA = FilterFunctional("eta0plus", SEGMENT, TailFamily.LEFT_OF_POINT, Fraction(0))


def everywhere(value: RowTemplate) -> Kernel:
    return Kernel(value.ground, (KernelRule(full(value.ground), value),), "markov")


def finite_chain(ground: GroundSpace, targets: Dict[str, str]) -> MarkovOperator:
    """A deterministic chain moving x to targets[x]."""
    rules = tuple(
        KernelRule(points(ground, x), RowTemplate(dirac(ground, y))) for x, y in targets.items()
    )
    return MarkovOperator(Kernel(ground, rules, "markov"))


def combined_operator(ca: RowTemplate, q1: str = "1/2") -> MarkovOperator:
    return MarkovOperator(
        make_combined(q1, everywhere(ca), everywhere(RowTemplate(filter_measure(ETA))))
    )


def by_name(results: List[CheckResult]) -> Dict[str, CheckResult]:
    return {result.name: result for result in results}


class GeneratorTests(SimpleTestCase):
    def test_labels_and_coefficients(self) -> None:
        mu = Measure.build(SEGMENT, [("1/2", "1/3")], [(ETA, "2/3")])
        atom, eta = generators_of(mu)
        self.assertEqual(atom.label, "atom:1/2")
        self.assertEqual(eta.label, "filter:eta0plus")
        self.assertEqual(atom.coefficient(mu), Fraction(1, 3))
        self.assertEqual(eta.coefficient(mu), Fraction(2, 3))
        self.assertEqual(eta.measure(SEGMENT), filter_measure(ETA))
        self.assertEqual(Generator.atom(Fraction(1, 2)), atom)


class OrbitClosureTests(SimpleTestCase):
    def test_closure_of_half_atom_half_filter(self) -> None:
        operator = combined_operator(RowTemplate(dirac(SEGMENT, 0)))
        closure = orbit_closure(operator, default_seeds(operator, dirac(SEGMENT, 1)))
        self.assertEqual(
            [g.label for g in closure.basis], ["atom:1", "atom:0", "filter:eta0plus"]
        )
        half = Fraction(1, 2)
        self.assertEqual(
            closure.matrix, ((0, 0, 0), (half, half, half), (half, half, half))
        )
        self.assertEqual(closure.column_sums(), (1, 1, 1))
        mu = closure.to_measure([0, half, half])
        self.assertEqual(closure.coordinates(mu), (0, half, half))

    def test_shift_kernel_diverges(self) -> None:
        shift = MarkovOperator(everywhere(RowTemplate.build(zero_measure(INTEGERS), {1: 1})))
        with self.assertRaises(ClosureDiverged) as ctx:
            orbit_closure(shift, [dirac(INTEGERS, 0)], cap=10)
        self.assertEqual(ctx.exception.cap, 10)

    def test_cap_must_be_positive(self) -> None:
        operator = combined_operator(RowTemplate(dirac(SEGMENT, 0)))
        self.assertRaises(ValueError, orbit_closure, operator, [], 0)


class SolveInvariantTests(SimpleTestCase):
    def test_half_atom_half_filter(self) -> None:
        operator = combined_operator(RowTemplate(dirac(SEGMENT, 0)))
        report = invariant_measure(operator, default_seeds(operator, dirac(SEGMENT, 1)))
        self.assertEqual(report.dimension, 1)
        self.assertTrue(report.enumerated)
        self.assertEqual(
            report.solutions, (Measure.build(SEGMENT, [(0, "1/2")], [(ETA, "1/2")]),)
        )
        self.assertEqual(report.classifications, (MeasureType.MIXED,))
        self.assertTrue(report.delta_ba_nonempty)
        self.assertTrue(report.delta_ca_empty)
        self.assertFalse(report.delta_pfa_nonempty)

    def test_half_diagonal_half_filter(self) -> None:
        operator = combined_operator(RowTemplate.diagonal(SEGMENT, 1))
        report = invariant_measure(operator, default_seeds(operator, dirac(SEGMENT, "1/2")))
        self.assertEqual(report.solutions, (filter_measure(ETA),))
        self.assertTrue(report.delta_pfa_nonempty)

    def test_mixed_atoms(self) -> None:
        ca = Kernel(
            SEGMENT,
            (
                KernelRule(
                    interval(SEGMENT, 0, "1/2", hi_closed=False),
                    RowTemplate.diagonal(SEGMENT, "1/2") + RowTemplate(dirac(SEGMENT, 0, "1/2")),
                ),
                KernelRule(interval(SEGMENT, "1/2", 1), RowTemplate(dirac(SEGMENT, 1))),
            ),
            "markov",
        )
        operator = MarkovOperator(
            make_combined("1/2", ca, everywhere(RowTemplate(filter_measure(ETA))))
        )
        report = invariant_measure(operator, default_seeds(operator, dirac(SEGMENT, 1)))
        self.assertEqual(
            report.solutions, (Measure.build(SEGMENT, [(0, "1/3")], [(ETA, "2/3")]),)
        )

    def test_two_state_swap(self) -> None:
        ground = GroundSpace(GroundKind.FINITE, "S2", ("a", "b"))
        operator = finite_chain(ground, {"a": "b", "b": "a"})
        report = invariant_measure(operator)
        self.assertEqual(report.solutions, (Measure.build(ground, [("a", "1/2"), ("b", "1/2")]),))
        self.assertEqual(report.classifications, (MeasureType.CA,))
        self.assertFalse(report.delta_ca_empty)

    def test_two_dimensional_nullspace_gives_the_extreme_points(self) -> None:
        ground = GroundSpace(GroundKind.FINITE, "S2", ("a", "b"))
        report = invariant_measure(finite_chain(ground, {"a": "a", "b": "b"}))
        self.assertEqual(report.dimension, 2)
        self.assertTrue(report.enumerated)
        self.assertEqual(report.solutions, (dirac(ground, "a"), dirac(ground, "b")))

    def test_larger_nullspaces_are_not_enumerated(self) -> None:
        ground = GroundSpace(GroundKind.FINITE, "S3", ("a", "b", "c"))
        report = invariant_measure(finite_chain(ground, {"a": "a", "b": "b", "c": "c"}))
        self.assertEqual(report.dimension, 3)
        self.assertFalse(report.enumerated)
        self.assertEqual(len(report.solutions), 3)

    def test_no_representable_solution(self) -> None:
        ground = GroundSpace(GroundKind.FINITE, "S1", ("a",))
        half = RowTemplate(dirac(ground, "a", "1/2"))
        leaking = Kernel(ground, (KernelRule(full(ground), half),))
        closure = orbit_closure(MarkovOperator(leaking), [dirac(ground, "a")])
        self.assertRaises(NoRepresentableSolution, solve_invariant, closure)


class ClassifyTests(SimpleTestCase):
    def test_mixed_invariant_of_a_nondegenerate_chain(self) -> None:
        operator = combined_operator(RowTemplate(dirac(SEGMENT, 0)))
        report = invariant_measure(operator, default_seeds(operator, dirac(SEGMENT, 1)))
        results = by_name(classify_invariants(report, operator))
        self.assertEqual(
            sorted(results),
            [
                "component_not_invariant[0].ca",
                "component_not_invariant[0].pfa",
                "fixed_point[0]",
                "no_ca_invariant",
                "pfa_kernel_invariants",
            ],
        )
        self.assertIs(results["pfa_kernel_invariants"].status, CheckStatus.SKIPPED)
        self.assertTrue(all(result.passed for result in results.values()))
        self.assertIn("atom:0", results["component_not_invariant[0].ca"].detail)

    def test_pure_filter_kernel(self) -> None:
        operator = MarkovOperator(everywhere(RowTemplate(filter_measure(ETA))))
        report = invariant_measure(operator, default_seeds(operator, dirac(SEGMENT, "1/2")))
        results = by_name(classify_invariants(report, operator))
        self.assertIs(results["pfa_kernel_invariants"].status, CheckStatus.PASS)
        self.assertIs(results["no_ca_invariant"].status, CheckStatus.SKIPPED)

    def test_purely_atomic_kernels_have_invariant_components(self) -> None:
        ground = GroundSpace(GroundKind.FINITE, "S2", ("a", "b"))
        operator = finite_chain(ground, {"a": "b", "b": "a"})
        results = by_name(classify_invariants(invariant_measure(operator), operator))
        self.assertIs(results["ca_components_invariant[0]"].status, CheckStatus.PASS)


class CorollaryTests(SimpleTestCase):
    def test_h1_norms(self) -> None:
        operator = combined_operator(RowTemplate(dirac(SEGMENT, 0)), "1/3")
        report = invariant_measure(operator, default_seeds(operator, dirac(SEGMENT, 1)))
        results = by_name(h_condition_corollaries(operator, report))
        self.assertIs(results["h1_invariant_norms"].status, CheckStatus.PASS)
        self.assertIs(results["h2_invariants_pfa"].status, CheckStatus.SKIPPED)
        (solution,) = report.solutions
        self.assertEqual(solution.atomic.total, Fraction(1, 3))

    def test_h2_pfa(self) -> None:
        operator = combined_operator(RowTemplate.diagonal(SEGMENT, 1))
        report = invariant_measure(operator, default_seeds(operator, dirac(SEGMENT, "1/2")))
        results = by_name(h_condition_corollaries(operator, report))
        self.assertIs(results["h1_invariant_norms"].status, CheckStatus.SKIPPED)
        self.assertIs(results["h2_invariants_pfa"].status, CheckStatus.PASS)

    def test_degenerate_chains_are_skipped(self) -> None:
        operator = MarkovOperator(everywhere(RowTemplate(filter_measure(ETA))))
        report = invariant_measure(operator, default_seeds(operator))
        statuses = {r.status for r in h_condition_corollaries(operator, report)}
        self.assertEqual(statuses, {CheckStatus.SKIPPED})

    def test_uniform_decay(self) -> None:
        operator = combined_operator(RowTemplate.diagonal(SEGMENT, 1), "2/3")
        initials = [
            dirac(SEGMENT, "1/2"),
            filter_measure(ETA),
            Measure.build(SEGMENT, [("1/4", "1/4")], [(ETA, "3/4")]),
        ]
        result = uniform_decay(operator, initials, 12)
        self.assertIs(result.status, CheckStatus.PASS)
        self.assertIn("3 initials", result.detail)
        skipped = uniform_decay(combined_operator(RowTemplate(dirac(SEGMENT, 0))), initials, 5)
        self.assertIs(skipped.status, CheckStatus.SKIPPED)
