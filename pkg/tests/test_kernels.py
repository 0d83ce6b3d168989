from fractions import Fraction

from django.test import SimpleTestCase

from fam_kernel.kernels import (
    CombinedKernel,
    Kernel,
    KernelError,
    KernelKind,
    KernelRule,
    RowTemplate,
    UndecidedLimit,
    add_kernels,
    combined_from_kernel,
    convolve,
    decompose_kernel,
    integrate,
    kernel_power,
    kernel_power_singletons,
    kernels_equal,
    limit_row,
    make_combined,
    row_atomic_support,
    scale_kernel,
    validate,
    zero_kernel,
)
from fam_kernel.measures import Measure, dirac, filter_measure, zero_measure
from fam_kernel.sets import (
    FilterFunctional,
    GroundKind,
    GroundMismatch,
    GroundSpace,
    TailFamily,
    full,
    interval,
    points,
    residue_class,
)

SEGMENT = GroundSpace(GroundKind.UNIT_INTERVAL, "[0,1]")
INTEGERS = GroundSpace(GroundKind.INTEGERS, "Z")
ETA = FilterFunctional("eta0plus", SEGMENT, TailFamily.LEFT_OF_POINT, Fraction(0))
FAR = FilterFunctional("etainf", INTEGERS, TailFamily.GEQ_THRESHOLD)


def constant(mu: Measure) -> RowTemplate:
    return RowTemplate(mu)


def everywhere(ground: GroundSpace, value: RowTemplate, kind: str = "markov") -> Kernel:
    return Kernel(ground, (KernelRule(full(ground), value),), kind)


def filter_power_kernel() -> Kernel:
    """P(0, .) = delta_1 and P(x, .) = eta for x > 0."""
    return Kernel(
        SEGMENT,
        (
            KernelRule(points(SEGMENT, 0), constant(dirac(SEGMENT, 1))),
            KernelRule(
                interval(SEGMENT, 0, 1, lo_closed=False), constant(filter_measure(ETA))
            ),
        ),
        KernelKind.MARKOV,
    )


class RowTemplateTests(SimpleTestCase):
    def test_build_merges_shifts(self) -> None:
        template = RowTemplate.build(zero_measure(INTEGERS), [(1, "1/4"), (1, "1/4"), (2, 0)])
        self.assertEqual(template.shifts, ((1, Fraction(1, 2)),))
        self.assertEqual(template.mass, Fraction(1, 2))
        self.assertEqual(template.at(5), dirac(INTEGERS, 6, "1/2"))

    def test_translations_need_integers(self) -> None:
        self.assertRaises(KernelError, RowTemplate.build, zero_measure(SEGMENT), {1: 1})
        diagonal = RowTemplate.diagonal(SEGMENT, "1/2")
        self.assertEqual(diagonal.at(Fraction(1, 3)), dirac(SEGMENT, "1/3", "1/2"))

    def test_parts(self) -> None:
        template = RowTemplate.diagonal(SEGMENT, "1/2") + constant(filter_measure(ETA, "1/2"))
        self.assertFalse(template.is_purely_atomic)
        self.assertFalse(template.is_purely_pfa)
        self.assertTrue(template.ca_part().is_purely_atomic)
        self.assertTrue(template.pfa_part().is_purely_pfa)


class ValidateTests(SimpleTestCase):
    def test_markov_and_sub_markov(self) -> None:
        self.assertIs(validate(filter_power_kernel()), KernelKind.MARKOV)
        half = everywhere(SEGMENT, constant(dirac(SEGMENT, 0, "1/2")), None)
        self.assertIs(validate(half), KernelKind.SUB_MARKOV)

    def test_axiom_violations(self) -> None:
        left = interval(SEGMENT, 0, "1/2")
        right = interval(SEGMENT, "1/2", 1, lo_closed=False)
        one = constant(dirac(SEGMENT, 0))
        cases = {
            "negative": everywhere(SEGMENT, constant(-dirac(SEGMENT, 0)), None),
            "too-heavy": everywhere(SEGMENT, constant(dirac(SEGMENT, 0, 2)), None),
            "overlap": Kernel(
                SEGMENT, (KernelRule(left, one), KernelRule(interval(SEGMENT, "1/2", 1), one))
            ),
            "gap": Kernel(
                SEGMENT,
                (KernelRule(left - points(SEGMENT, "1/4"), one), KernelRule(right, one)),
            ),
            "declared-markov": everywhere(SEGMENT, constant(dirac(SEGMENT, 0, "1/2"))),
        }
        for name, kernel in cases.items():
            with self.subTest(case=name):
                self.assertRaises(KernelError, validate, kernel)

    def test_rule_ground_mismatch(self) -> None:
        self.assertRaises(
            GroundMismatch, KernelRule, full(INTEGERS), constant(dirac(SEGMENT, 0))
        )


class KernelTests(SimpleTestCase):
    def test_row_atoms_and_filters(self) -> None:
        kernel = filter_power_kernel()
        self.assertEqual(kernel.row(0), dirac(SEGMENT, 1))
        self.assertEqual(kernel.row("1/2"), filter_measure(ETA))
        self.assertEqual(kernel.atoms, (Fraction(1),))
        self.assertEqual(kernel.filters, (ETA,))

    def test_decompose_and_add(self) -> None:
        value = RowTemplate.diagonal(SEGMENT, "1/2") + constant(filter_measure(ETA, "1/2"))
        kernel = everywhere(SEGMENT, value)
        ca, pfa = decompose_kernel(kernel)
        self.assertEqual(ca.row("1/3"), dirac(SEGMENT, "1/3", "1/2"))
        self.assertEqual(pfa.row("1/3"), filter_measure(ETA, "1/2"))
        self.assertTrue(kernels_equal(add_kernels(ca, pfa), kernel))
        self.assertFalse(kernels_equal(ca, kernel))

    def test_scale_kernel(self) -> None:
        scaled = scale_kernel("1/3", filter_power_kernel())
        self.assertEqual(scaled.row(0), dirac(SEGMENT, 1, "1/3"))

    def test_kernels_equal_across_refinements(self) -> None:
        one = constant(filter_measure(ETA))
        split = Kernel(
            SEGMENT,
            (
                KernelRule(interval(SEGMENT, 0, "1/2", hi_closed=False), one),
                KernelRule(interval(SEGMENT, "1/2", 1), one),
            ),
        )
        self.assertTrue(kernels_equal(split, everywhere(SEGMENT, one)))
        self.assertFalse(kernels_equal(split, zero_kernel(SEGMENT)))


class CombinedKernelTests(SimpleTestCase):
    def setUp(self) -> None:
        self.kca = everywhere(SEGMENT, constant(dirac(SEGMENT, 0)))
        self.kpfa = everywhere(SEGMENT, constant(filter_measure(ETA)))

    def test_make_combined(self) -> None:
        combined = make_combined("1/2", self.kca, self.kpfa)
        self.assertEqual((combined.q1, combined.q2), (Fraction(1, 2), Fraction(1, 2)))
        self.assertTrue(combined.nondegenerate)
        self.assertEqual(
            combined.kernel.row(1), Measure.build(SEGMENT, [(0, "1/2")], [(ETA, "1/2")])
        )
        ca, pfa = combined.normalized()
        self.assertTrue(kernels_equal(ca, self.kca))  # type: ignore
        self.assertTrue(kernels_equal(pfa, self.kpfa))  # type: ignore

    def test_degenerate_parts(self) -> None:
        combined = make_combined(0, None, self.kpfa)
        self.assertFalse(combined.nondegenerate)
        self.assertEqual(combined.normalized()[0], None)
        self.assertTrue(kernels_equal(combined.kernel, self.kpfa))
        self.assertRaises(KernelError, make_combined, "1/2", None, self.kpfa)
        self.assertRaises(KernelError, make_combined, 0, None, None)

    def test_make_combined_checks_part_types(self) -> None:
        self.assertRaises(KernelError, make_combined, "1/2", self.kpfa, self.kpfa)
        self.assertRaises(KernelError, make_combined, "1/2", self.kca, self.kca)
        self.assertRaises(KernelError, make_combined, "3/2", self.kca, self.kpfa)
        half = everywhere(SEGMENT, constant(dirac(SEGMENT, 0, "1/2")), None)
        self.assertRaises(KernelError, make_combined, "1/2", half, self.kpfa)

    def test_invalid_masses(self) -> None:
        zero = zero_kernel(SEGMENT)
        self.assertRaises(KernelError, CombinedKernel, "1/2", "1/3", zero, zero)

    def test_combined_from_kernel(self) -> None:
        combined = make_combined("1/3", self.kca, self.kpfa)
        recognised = combined_from_kernel(combined.kernel)
        self.assertEqual(recognised.q1, Fraction(1, 3))
        self.assertTrue(kernels_equal(recognised.kernel, combined.kernel))
        # the ca mass of this kernel is 1 at 0 and 0 elsewhere
        self.assertRaises(KernelError, combined_from_kernel, filter_power_kernel())


class IntegrationTests(SimpleTestCase):
    def test_integrate(self) -> None:
        kernel = filter_power_kernel()
        self.assertEqual(integrate(kernel, dirac(SEGMENT, 0)), dirac(SEGMENT, 1))
        self.assertEqual(integrate(kernel, dirac(SEGMENT, 1)), filter_measure(ETA))
        self.assertEqual(integrate(kernel, filter_measure(ETA)), filter_measure(ETA))

    def test_limit_row_of_a_diagonal(self) -> None:
        value = RowTemplate.diagonal(SEGMENT, "1/2") + constant(filter_measure(ETA, "1/2"))
        self.assertEqual(limit_row(everywhere(SEGMENT, value), ETA), filter_measure(ETA))

    def test_undecided_limit(self) -> None:
        kernel = Kernel(
            INTEGERS,
            (
                KernelRule(residue_class(INTEGERS, 2, 0), constant(dirac(INTEGERS, 0))),
                KernelRule(residue_class(INTEGERS, 2, 1), constant(dirac(INTEGERS, 1))),
            ),
        )
        with self.assertRaises(UndecidedLimit) as ctx:
            integrate(kernel, filter_measure(FAR))
        self.assertEqual(ctx.exception.filter_id, "etainf")

    def test_integrate_ground_mismatch(self) -> None:
        self.assertRaises(
            GroundMismatch, integrate, filter_power_kernel(), dirac(INTEGERS, 0)
        )


class KernelPowerTests(SimpleTestCase):
    def test_filter_kernel_power_vanishes_on_singletons(self) -> None:
        kernel = filter_power_kernel()
        self.assertEqual(
            kernel_power_singletons(kernel, 1, [(0, 1)]), [(Fraction(0), Fraction(1), 1)]
        )
        chosen = [Fraction(i, 9) for i in range(10)]
        table = kernel_power_singletons(kernel, 2, [(x, y) for x in chosen for y in chosen])
        self.assertEqual(len(table), 100)
        self.assertTrue(all(value == 0 for _, _, value in table))
        square = kernel_power(kernel, 2)
        self.assertTrue(kernels_equal(square, everywhere(SEGMENT, constant(filter_measure(ETA)))))

    def test_shift_powers(self) -> None:
        shift = everywhere(INTEGERS, RowTemplate.build(zero_measure(INTEGERS), {1: 1}))
        self.assertEqual(kernel_power(shift, 3).row(0), dirac(INTEGERS, 3))
        self.assertEqual(kernel_power(shift, 3).row(-7), dirac(INTEGERS, -4))
        self.assertRaises(ValueError, kernel_power, shift, 0)

    def test_convolve_refines_translated_pieces(self) -> None:
        # x < 0 moves right by one, x >= 0 jumps to 0
        kernel = Kernel(
            INTEGERS,
            (
                KernelRule(
                    interval(INTEGERS, None, -1),
                    RowTemplate.build(zero_measure(INTEGERS), {1: 1}),
                ),
                KernelRule(interval(INTEGERS, 0, None), constant(dirac(INTEGERS, 0))),
            ),
        )
        square = convolve(kernel, kernel)
        self.assertEqual(square.row(-5), dirac(INTEGERS, -3))
        self.assertEqual(square.row(-2), dirac(INTEGERS, 0))
        self.assertEqual(square.row(-1), dirac(INTEGERS, 0))
        self.assertEqual(square.row(4), dirac(INTEGERS, 0))
        self.assertIs(validate(square), KernelKind.MARKOV)

    def test_row_atomic_support(self) -> None:
        combined = make_combined(
            "1/2",
            everywhere(SEGMENT, RowTemplate.diagonal(SEGMENT, 1)),
            everywhere(SEGMENT, constant(filter_measure(ETA))),
        )
        support = row_atomic_support(combined.kernel, "1/3")
        self.assertEqual(support.atoms.weights, ((Fraction(1, 3), Fraction(1, 2)),))
        self.assertEqual(support.total, Fraction(1, 2))
        self.assertFalse(support.purely_pfa)
        self.assertTrue(row_atomic_support(filter_power_kernel(), "1/2").purely_pfa)
