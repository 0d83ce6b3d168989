import csv
import io
import json
from fractions import Fraction

from django.test import SimpleTestCase

from fam_kernel import codec
from fam_kernel.invariant import default_seeds, invariant_measure
from fam_kernel.kernels import Kernel, KernelRule, RowTemplate, kernels_equal, make_combined
from fam_kernel.measures import Measure, dirac, filter_measure, zero_measure
from fam_kernel.operators import MarkovOperator, check_H1, check_H2, iterate
from fam_kernel.sets import (
    FilterFunctional,
    GroundKind,
    GroundSpace,
    TailFamily,
    equivalent,
    full,
    interval,
    points,
    residue_class,
)

SEGMENT = GroundSpace(GroundKind.UNIT_INTERVAL, "[0,1]")
INTEGERS = GroundSpace(GroundKind.INTEGERS, "Z")
ETA = FilterFunctional("eta0plus", SEGMENT, TailFamily.LEFT_OF_POINT, Fraction(0))
FILTERS = {"eta0plus": ETA}


class RationalTests(SimpleTestCase):
    def test_parse_rational(self) -> None:
        self.assertEqual(codec.parse_rational("3/6", "x"), Fraction(1, 2))
        self.assertEqual(codec.parse_rational(-2, "x"), -2)
        for bad in (0.5, True, None, "1/0", "half"):
            with self.subTest(value=bad):
                self.assertRaises(codec.CodecError, codec.parse_rational, bad, "x")

    def test_decimal_str(self) -> None:
        self.assertEqual(codec.decimal_str(Fraction(1, 3), 4), "0.3333")
        self.assertEqual(codec.decimal_str(Fraction(2, 3), 4), "0.6667")
        self.assertEqual(codec.decimal_str(Fraction(1), 2), "1.00")

    def test_dumps_is_canonical(self) -> None:
        text = codec.dumps({"b": 1, "a": [1, 2]})
        self.assertEqual(text, '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n')


class GroundAndSetTests(SimpleTestCase):
    def test_ground(self) -> None:
        letters = GroundSpace(GroundKind.FINITE, "S2", ("a", "b"))
        self.assertEqual(
            codec.ground_to_json(letters),
            {"kind": "finite-labeled-set", "label": "S2", "points": ["a", "b"]},
        )
        self.assertEqual(codec.ground_from_json(codec.ground_to_json(letters)), letters)
        with self.assertRaises(codec.CodecError) as ctx:
            codec.ground_from_json({"kind": "reals", "label": "R"})
        self.assertEqual(ctx.exception.path, "ground")
        self.assertRaises(codec.CodecError, codec.ground_from_json, {"label": "R"})

    def test_set_expressions(self) -> None:
        data = {
            "op": "difference",
            "args": [
                {"op": "interval", "lo": "0", "hi": "1/2", "lo_closed": True, "hi_closed": False},
                {"op": "points", "points": ["1/4"]},
            ],
        }
        expr = codec.set_from_json(SEGMENT, data)
        expected = interval(SEGMENT, 0, "1/2", hi_closed=False) - points(SEGMENT, "1/4")
        self.assertTrue(equivalent(expr, expected))
        again = codec.set_from_json(SEGMENT, codec.set_to_json(expr))
        self.assertTrue(equivalent(again, expr))

    def test_integer_sets(self) -> None:
        data = {
            "op": "union",
            "args": [
                {"op": "residue", "modulus": 3, "residue": 1},
                {"op": "complement", "arg": {"op": "interval", "lo": None, "hi": "10"}},
            ],
        }
        expr = codec.set_from_json(INTEGERS, data)
        expected = residue_class(INTEGERS, 3, 1) | ~interval(INTEGERS, None, 10)
        self.assertTrue(equivalent(expr, expected))

    def test_residue_fields_must_be_integers(self) -> None:
        cases = {
            "set.modulus": {"op": "residue", "modulus": "three", "residue": 1},
            "set.residue": {"op": "residue", "modulus": 3, "residue": 1.5},
        }
        for path, data in cases.items():
            with self.subTest(path=path):
                with self.assertRaises(codec.CodecError) as ctx:
                    codec.set_from_json(INTEGERS, data)
                self.assertEqual(ctx.exception.path, path)

    def test_set_errors_name_the_field(self) -> None:
        cases = {
            "set.op": {"op": "xor"},
            "set.points[1]": {"op": "points", "points": ["0", "2"]},
            "set.args": {"op": "complement", "args": [{"op": "full"}, {"op": "empty"}]},
            "set": {"op": "interval", "lo": None, "hi": "1"},
        }
        for path, data in cases.items():
            with self.subTest(path=path):
                with self.assertRaises(codec.CodecError) as ctx:
                    codec.set_from_json(SEGMENT, data)
                self.assertEqual(ctx.exception.path, path)


class MeasureCodecTests(SimpleTestCase):
    def test_measure(self) -> None:
        mu = Measure.build(SEGMENT, [("1/2", "1/3")], [(ETA, "2/3")])
        data = codec.measure_to_json(mu)
        self.assertEqual(data, {"atoms": [["1/2", "1/3"]], "pfa": [["eta0plus", "2/3"]]})
        self.assertEqual(codec.measure_from_json(SEGMENT, FILTERS, data), mu)

    def test_measure_errors(self) -> None:
        cases = {
            "measure": [],
            "measure.atoms[0]": {"atoms": [["1/2"]]},
            "measure.pfa[0]": {"pfa": [["eta9", "1"]]},
        }
        for path, data in cases.items():
            with self.subTest(path=path):
                with self.assertRaises(codec.CodecError) as ctx:
                    codec.measure_from_json(SEGMENT, FILTERS, data)
                self.assertEqual(ctx.exception.path, path)

    def test_filters(self) -> None:
        data = [{"id": "eta0plus", "tails": {"family": "left-of-point", "point": "0"}}]
        self.assertEqual(codec.filters_by_id(SEGMENT, data), FILTERS)
        self.assertEqual(codec.filter_to_json(ETA), data[0])
        with self.assertRaises(codec.CodecError) as ctx:
            codec.filters_by_id(SEGMENT, data + data)
        self.assertEqual(ctx.exception.path, "filters[1].id")
        bad = [{"id": "eta", "tails": {"family": "left-of-point", "point": "1"}}]
        self.assertRaises(codec.CodecError, codec.filters_by_id, SEGMENT, bad)


class KernelCodecTests(SimpleTestCase):
    def test_template_terms(self) -> None:
        data = [
            {"kind": "point", "target": "0", "coef": "1/2"},
            {"kind": "diagonal", "coef": "1/4"},
            {"kind": "constant", "measure": {"pfa": [["eta0plus", "1/4"]]}},
        ]
        template = codec.template_from_json(SEGMENT, FILTERS, data)
        self.assertEqual(template.shifts, ((0, Fraction(1, 4)),))
        self.assertEqual(
            template.constant, Measure.build(SEGMENT, [(0, "1/2")], [(ETA, "1/4")])
        )
        encoded = codec.template_to_json(template)
        self.assertEqual(codec.template_from_json(SEGMENT, FILTERS, encoded), template)

    def test_template_errors(self) -> None:
        cases = {
            "value.kind": {"kind": "gaussian"},
            "value[0].offset": [{"kind": "shift", "offset": "1", "coef": "1"}],
            "value": {"kind": "shift", "offset": 1, "coef": "1"},
        }
        for path, data in cases.items():
            with self.subTest(path=path):
                with self.assertRaises(codec.CodecError) as ctx:
                    codec.template_from_json(SEGMENT, FILTERS, data)
                self.assertEqual(ctx.exception.path, path)

    def test_kernel(self) -> None:
        kernel = Kernel(
            INTEGERS,
            (
                KernelRule(
                    interval(INTEGERS, None, -1), RowTemplate.build(zero_measure(INTEGERS), {1: 1})
                ),
                KernelRule(interval(INTEGERS, 0, None), RowTemplate(dirac(INTEGERS, 0))),
            ),
            "markov",
        )
        data = codec.kernel_to_json(kernel)
        self.assertEqual(data["kind"], "markov")
        decoded = codec.kernel_from_json(data, {})
        self.assertTrue(kernels_equal(decoded, kernel))

    def test_kernel_ground_must_match(self) -> None:
        data = {"ground": codec.ground_to_json(INTEGERS), "rules": []}
        with self.assertRaises(codec.CodecError) as ctx:
            codec.kernel_from_json(data, {}, "kernel", SEGMENT)
        self.assertEqual(ctx.exception.path, "kernel.ground")
        self.assertRaises(codec.CodecError, codec.kernel_from_json, {"rules": []}, {})

    def test_kernel_must_be_an_object(self) -> None:
        for data in (["rules"], "kernel", None):
            with self.subTest(data=data):
                with self.assertRaises(codec.CodecError) as ctx:
                    codec.kernel_from_json(data, {}, "kernel", SEGMENT)
                self.assertEqual(ctx.exception.path, "kernel")

    def test_combined(self) -> None:
        combined = make_combined(
            "1/2",
            Kernel(SEGMENT, (KernelRule(full(SEGMENT), RowTemplate.diagonal(SEGMENT, 1)),)),
            Kernel(SEGMENT, (KernelRule(full(SEGMENT), RowTemplate(filter_measure(ETA))),)),
        )
        data = codec.combined_to_json(combined)
        self.assertEqual(data["q1"], "1/2")
        decoded = codec.combined_from_json(data, FILTERS)
        self.assertEqual(decoded.q1, combined.q1)
        self.assertTrue(kernels_equal(decoded.kernel, combined.kernel))

    def test_degenerate_combined(self) -> None:
        row = {"kind": "constant", "measure": {"pfa": [["eta0plus", "1"]]}}
        pfa = {"rules": [{"piece": {"op": "full"}, "value": row}]}
        decoded = codec.combined_from_json(
            {"q1": "0", "ca": None, "pfa": pfa}, FILTERS, "combined", SEGMENT
        )
        self.assertFalse(decoded.nondegenerate)
        with self.assertRaises(codec.CodecError) as ctx:
            codec.combined_from_json(
                {"q1": "1/2", "ca": None, "pfa": pfa}, FILTERS, "combined", SEGMENT
            )
        self.assertEqual(ctx.exception.path, "combined")


class ReportCodecTests(SimpleTestCase):
    def setUp(self) -> None:
        combined = make_combined(
            "1/2",
            Kernel(SEGMENT, (KernelRule(full(SEGMENT), RowTemplate.diagonal(SEGMENT, 1)),)),
            Kernel(SEGMENT, (KernelRule(full(SEGMENT), RowTemplate(filter_measure(ETA))),)),
        )
        self.operator = MarkovOperator(combined)
        self.trace = iterate(self.operator, dirac(SEGMENT, "1/2"), 3)

    def test_trace_csv(self) -> None:
        rows = list(csv.DictReader(io.StringIO(codec.trace_to_csv(self.trace))))
        self.assertEqual(len(rows), 4)
        self.assertEqual(tuple(rows[0]), codec.TRACE_COLUMNS)
        self.assertEqual(rows[2]["ca_norm"], "1/4")
        self.assertEqual(rows[2]["pfa_norm_decimal"], "0.750000000000")

    def test_trace_json(self) -> None:
        data = codec.trace_to_json(self.trace, check_H1(self.operator), check_H2(self.operator))
        self.assertEqual(data["h1"]["status"], "fails")
        self.assertEqual(data["h1"]["witness"], "eta0plus")
        self.assertEqual(data["h1"]["image"], {"atoms": [], "pfa": [["eta0plus", "1/2"]]})
        self.assertEqual(data["h2"], {"condition": "H2", "status": "holds-on-basis"})
        json.loads(codec.dumps(data))

    def test_invariant_report(self) -> None:
        report = invariant_measure(
            self.operator, default_seeds(self.operator, dirac(SEGMENT, "1/2"))
        )
        data = codec.invariant_report_to_json(report)
        self.assertEqual(data["closure"], ["atom:1/2", "filter:eta0plus"])
        self.assertEqual(
            data["solutions"],
            [{"measure": {"atoms": [], "pfa": [["eta0plus", "1"]]}, "classification": "pfa"}],
        )
        self.assertEqual(
            data["delta"], {"ba_nonempty": True, "ca_empty": True, "pfa_nonempty": True}
        )
