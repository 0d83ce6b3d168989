"""
Scenario files and the checks run against them.

A scenario is a JSON document (schema "fam-kernel/1") naming a ground,
its filters, a kernel (plain or combined), an initial probability
measure, the iteration horizon and the checks to run. Optional
`expected` values are compared exactly against what the run produces.

"""
from __future__ import annotations

import dataclasses
import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from . import codec, settings
from .decorators import is_scenario_check
from .invariant import (
    ClosureDiverged,
    InvariantReport,
    NoRepresentableSolution,
    classify_invariants,
    default_seeds,
    h_condition_corollaries,
    invariant_measure,
    uniform_decay,
)
from .kernels import (
    CombinedKernel,
    Kernel,
    KernelError,
    KernelKind,
    add_kernels,
    decompose_kernel,
    kernel_power_singletons,
    kernels_equal,
    make_combined,
    row_atomic_support,
)
from .measures import Measure, combine, dirac, filter_measure, in_S, measure_type, yosida_hewitt
from .operators import (
    HStatus,
    HVerdict,
    MarkovOperator,
    NormTrace,
    apply,
    check_H1,
    check_H2,
    h_summary,
    iterate,
    norm_law,
    range_inclusions,
)
from .registry import _checks
from .sets import FilterFunctional, GroundMismatch, GroundSpace, Point, sample_points
from .verdicts import CheckResult

logger = logging.getLogger(__name__)

SCHEMA = "fam-kernel/1"
DEFAULT_CHECKS = ("trace", "h_conditions", "invariant", "classify", "corollaries")


class ScenarioError(ValueError):
    """Raised for scenario documents that do not parse or do not validate."""


@dataclass(frozen=True)
class SingletonRequest:
    """Values P^power(x, {y}) to tabulate."""

    power: int
    pairs: Tuple[Tuple[Point, Point], ...]


@dataclass(frozen=True)
class Scenario:
    name: str
    ground: GroundSpace
    filters: Tuple[FilterFunctional, ...]
    kernel: Union[Kernel, CombinedKernel]
    initial: Measure
    n_max: int
    checks: Tuple[str, ...] = DEFAULT_CHECKS
    seed: int = 0
    cap: Optional[int] = None
    singletons: Optional[SingletonRequest] = None
    support: Tuple[Point, ...] = ()
    expected: Dict[str, Any] = field(default_factory=dict, compare=False)

    @cached_property
    def operator(self) -> MarkovOperator:
        return MarkovOperator(self.kernel, self.filters)


def parse_scenario(data: Any, source: str = "<scenario>") -> Scenario:
    """Build a Scenario from a decoded JSON document; errors name the field."""
    try:
        return _parse(data)
    except codec.CodecError as ex:
        raise ScenarioError(f"{source}: {ex}")
    except (KernelError, GroundMismatch) as ex:
        raise ScenarioError(f"{source}: kernel: {ex}")


def _parse(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise codec.CodecError("$", "a scenario is a JSON object")
    schema = data.get("schema")
    if schema != SCHEMA:
        raise codec.CodecError("schema", f"expected {SCHEMA!r}, got {schema!r}")
    ground = codec.ground_from_json(data.get("ground"), "ground")
    filters = codec.filters_by_id(ground, data.get("filters", []))
    if ("kernel" in data) == ("combined" in data):
        raise codec.CodecError("kernel", "give exactly one of `kernel` and `combined`")
    kernel: Union[Kernel, CombinedKernel]
    if "kernel" in data:
        kernel = codec.kernel_from_json(data["kernel"], filters, "kernel", ground)
    else:
        kernel = codec.combined_from_json(data["combined"], filters, "combined", ground)
    initial = codec.measure_from_json(ground, filters, data.get("initial"), "initial")
    if not in_S(initial):
        raise codec.CodecError("initial", "the initial measure must be a probability measure")
    n_max = data.get("n_max")
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
        raise codec.CodecError("n_max", f"expected an integer >= 1, got {n_max!r}")
    checks = tuple(data.get("checks", DEFAULT_CHECKS))
    for i, label in enumerate(checks):
        if not _checks.get(label):
            raise codec.CodecError(f"checks[{i}]", f"unknown check {label!r}")
    scenario = Scenario(
        name=str(data.get("name", "scenario")),
        ground=ground,
        filters=tuple(filters.values()),
        kernel=kernel,
        initial=initial,
        n_max=n_max,
        checks=checks,
        seed=int(data.get("seed", 0)),
        cap=data.get("cap"),
        singletons=_parse_singletons(ground, data.get("singletons")),
        support=tuple(
            codec.point_from_json(ground, x, f"support[{i}]")
            for i, x in enumerate(data.get("support", []))
        ),
        expected=dict(data.get("expected", {})),
    )
    # validates the kernel
    scenario.operator
    return scenario


def _parse_singletons(ground: GroundSpace, data: Any) -> Optional[SingletonRequest]:
    if data is None:
        return None
    power = data.get("power", 1)
    if isinstance(power, bool) or not isinstance(power, int) or power < 1:
        raise codec.CodecError("singletons.power", f"expected an integer >= 1, got {power!r}")
    if "pairs" in data:
        pairs = tuple(
            (
                codec.point_from_json(ground, x, f"singletons.pairs[{i}]"),
                codec.point_from_json(ground, y, f"singletons.pairs[{i}]"),
            )
            for i, (x, y) in enumerate(data["pairs"])
        )
    else:
        chosen = [
            codec.point_from_json(ground, x, f"singletons.points[{i}]")
            for i, x in enumerate(data.get("points", []))
        ]
        pairs = tuple((x, y) for x in chosen for y in chosen)
    return SingletonRequest(power, pairs)


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as ex:
        raise ScenarioError(f"{path}:{ex.lineno}:{ex.colno}: {ex.msg}")
    return parse_scenario(data, str(path))


def scenario_to_json(scenario: Scenario) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "schema": SCHEMA,
        "name": scenario.name,
        "ground": codec.ground_to_json(scenario.ground),
        "filters": [codec.filter_to_json(eta) for eta in scenario.filters],
        "initial": codec.measure_to_json(scenario.initial),
        "n_max": scenario.n_max,
        "checks": list(scenario.checks),
        "seed": scenario.seed,
    }
    if isinstance(scenario.kernel, CombinedKernel):
        data["combined"] = codec.combined_to_json(scenario.kernel)
    else:
        data["kernel"] = codec.kernel_to_json(scenario.kernel)
    if scenario.cap is not None:
        data["cap"] = scenario.cap
    if scenario.singletons is not None:
        data["singletons"] = {
            "power": scenario.singletons.power,
            "pairs": [[str(x), str(y)] for x, y in scenario.singletons.pairs],
        }
    if scenario.support:
        data["support"] = [str(x) for x in scenario.support]
    if scenario.expected:
        data["expected"] = scenario.expected
    return data


class ScenarioRun:
    """
    The state shared by the checks of one scenario run.

    Trace, (H1)/(H2) verdicts and invariant report are computed on first
    use, so a check only pays for what it reads.

    """

    def __init__(self, scenario: Scenario, seed: int) -> None:
        self.scenario = scenario
        self.seed = seed
        self.operator = scenario.operator
        self.rng = random.Random(f"{scenario.name}:{seed}")
        self.tables: Dict[str, Any] = {}

    @cached_property
    def trace(self) -> NormTrace:
        return iterate(self.operator, self.scenario.initial, self.scenario.n_max)

    @cached_property
    def h_verdicts(self) -> Tuple[HVerdict, HVerdict]:
        return check_H1(self.operator), check_H2(self.operator)

    @cached_property
    def invariant_report(self) -> InvariantReport:
        seeds = default_seeds(self.operator, self.scenario.initial)
        return invariant_measure(self.operator, seeds, self.scenario.cap)

    def sample_measures(self, count: int = 4) -> List[Measure]:
        """The initial measure, the generators the kernel meets and a few random mixtures."""
        ground = self.operator.ground
        found = [self.scenario.initial]
        found += [dirac(ground, x) for x in self.operator.kernel.atoms]
        found += [filter_measure(eta) for eta in self.operator.basis]
        for _ in range(count if len(found) > 1 else 0):
            first, second = self.rng.sample(found, 2)
            weight = Fraction(self.rng.randint(1, 9), 10)
            found.append(combine(weight, first, 1 - weight, second))
        return found


def _invariant_or_error(run: ScenarioRun) -> Union[InvariantReport, Exception]:
    try:
        return run.invariant_report
    except (ClosureDiverged, NoRepresentableSolution) as ex:
        return ex


@is_scenario_check("trace")
def check_trace(run: ScenarioRun) -> List[CheckResult]:
    """Iterate A from the initial measure; under (H1) or (H2) the exact norm law must hold."""
    trace = run.trace
    totals = [row.total for row in trace.rows]
    if run.operator.kind is KernelKind.MARKOV:
        conserved = all(total == 1 for total in totals)
    else:
        # sub-markov rows only ever lose mass
        conserved = totals[0] <= 1 and all(b <= a for a, b in zip(totals, totals[1:]))
    results = [
        CheckResult.expect(
            "trace.mass",
            conserved,
            f"{run.operator.kind.value} kernel, {len(trace.rows)} rows, final norms "
            f"ca={trace.rows[-1].ca_norm} pfa={trace.rows[-1].pfa_norm}",
        )
    ]
    operator = run.operator
    if not operator.nondegenerate:
        results.append(CheckResult.skip("trace.norm_law", "not a nondegenerate combined chain"))
        return results
    for verdict in run.h_verdicts:
        if not verdict.holds:
            continue
        row = norm_law(trace, operator.q1, verdict.condition)  # type: ignore
        results.append(
            CheckResult.expect(
                f"trace.norm_law.{verdict.condition}",
                row is None,
                "exact norm law" if row is None else f"violated at row {row.n}: {row}",
            )
        )
        break
    else:
        results.append(CheckResult.skip("trace.norm_law", "neither (H1) nor (H2) holds"))
    return results


@is_scenario_check("h_conditions")
def check_h_conditions(run: ScenarioRun) -> List[CheckResult]:
    """Decide (H1) and (H2) on the filter basis."""
    h1, h2 = run.h_verdicts
    run.tables["h_summary"] = h_summary(h1, h2)
    return [
        CheckResult.expect(
            f"h_conditions.{verdict.condition}",
            verdict.status is not HStatus.UNDECIDED,
            verdict.detail or verdict.status.value,
        )
        for verdict in (h1, h2)
    ]


@is_scenario_check("invariant")
def check_invariant(run: ScenarioRun) -> List[CheckResult]:
    """Solve mu = A mu on the orbit closure of the initial measure, kernel atoms and filters."""
    report = _invariant_or_error(run)
    if isinstance(report, Exception):
        name = type(report).__name__
        run.tables["invariant_error"] = name
        return [
            CheckResult.expect(
                "invariant",
                run.scenario.expected.get("invariant_error") == name,
                f"{name}: {report}",
            )
        ]
    results = [
        CheckResult.ok(
            "invariant",
            f"{len(report.solutions)} solution(s), nullspace dimension {report.dimension}",
        )
    ]
    if run.operator.kind is KernelKind.MARKOV:
        sums = report.closure.column_sums()
        results.append(
            CheckResult.expect(
                "invariant.column_sums",
                all(total == 1 for total in sums),
                f"column sums {[str(s) for s in sums]}",
            )
        )
    return results


@is_scenario_check("classify")
def check_classify(run: ScenarioRun) -> List[CheckResult]:
    """Structure of the invariant measures (types, fixed points, components)."""
    report = _invariant_or_error(run)
    if isinstance(report, Exception):
        return [CheckResult.skip("classify", "no invariant report")]
    return classify_invariants(report, run.operator)


@is_scenario_check("corollaries")
def check_corollaries(run: ScenarioRun) -> List[CheckResult]:
    """Norms of invariant components under (H1)/(H2) and uniform decay under (H2)."""
    report = _invariant_or_error(run)
    results = []
    if isinstance(report, Exception):
        results.append(CheckResult.skip("corollaries", "no invariant report"))
    else:
        results.extend(h_condition_corollaries(run.operator, report, *run.h_verdicts))
    results.append(uniform_decay(run.operator, run.sample_measures(), run.scenario.n_max))
    return results


@is_scenario_check("range_inclusions")
def check_range_inclusions(run: ScenarioRun) -> CheckResult:
    """A_ca A_ca keeps ca measures ca; A_pfa A_pfa and A_pfa A_ca land in pfa."""
    report = range_inclusions(run.operator, run.sample_measures())
    run.tables["range_inclusions"] = {"checked": report.checked, "skipped": len(report.skipped)}
    return CheckResult.expect(
        "range_inclusions",
        report.passed,
        f"{report.checked} measures checked, {len(report.skipped)} undecided",
        witness=[
            {
                "inclusion": name,
                "measure": codec.measure_to_json(mu),
                "image": codec.measure_to_json(image),
            }
            for name, mu, image in report.violations
        ]
        or None,
    )


def singleton_table(run: ScenarioRun) -> List[List[str]]:
    request = run.scenario.singletons
    if request is None:
        chosen = list(run.operator.kernel.atoms[:6])
        if not chosen:
            chosen = sample_points(run.operator.ground, count=2)[:4]
        request = SingletonRequest(2, tuple((x, y) for x in chosen for y in chosen))
    if "singletons" not in run.tables:
        table = kernel_power_singletons(run.operator.kernel, request.power, request.pairs)
        run.tables["singletons"] = {
            "power": request.power,
            "values": [[str(x), str(y), str(value)] for x, y, value in table],
        }
    return run.tables["singletons"]["values"]


@is_scenario_check("singletons")
def check_singletons(run: ScenarioRun) -> CheckResult:
    """Tabulate P^n(x, {y}); a kernel with purely pfa rows must give zero everywhere."""
    values = singleton_table(run)
    if not all(rule.value.is_purely_pfa for rule in run.operator.kernel.rules):
        return CheckResult.ok("singletons", f"{len(values)} values")
    nonzero = [row for row in values if row[2] != "0"]
    return CheckResult.expect(
        "singletons.pfa_kernel",
        not nonzero,
        "purely pfa kernels vanish on singletons at every power",
        witness=nonzero or None,
    )


@is_scenario_check("decomposition")
def check_decomposition(run: ScenarioRun) -> List[CheckResult]:
    """The kernel is the sum of its ca and pfa parts; combined kernels rebuild exactly."""
    kernel = run.operator.kernel
    ca, pfa = decompose_kernel(kernel)
    results = [
        CheckResult.expect("decomposition.sum", kernels_equal(add_kernels(ca, pfa), kernel))
    ]
    view = run.operator.combined_view
    if view is None:
        results.append(CheckResult.skip("decomposition.combined", "component masses vary with x"))
    else:
        rebuilt = make_combined(view.q1, *view.normalized())
        results.append(
            CheckResult.expect(
                "decomposition.combined",
                kernels_equal(rebuilt.kernel, kernel),
                f"q1 = {view.q1}, q2 = {view.q2}",
            )
        )
    mu_ca, mu_pfa = yosida_hewitt(run.scenario.initial)
    results.append(
        CheckResult.expect("decomposition.initial", mu_ca + mu_pfa == run.scenario.initial)
    )
    return results


def support_table(run: ScenarioRun) -> Dict[str, Any]:
    chosen = run.scenario.support or run.operator.kernel.atoms
    table = {}
    for x in chosen:
        support = row_atomic_support(run.operator.kernel, x)
        table[str(x)] = {
            "atoms": [[str(y), str(w)] for y, w in support.atoms.weights],
            "total": str(support.total),
            "purely_pfa": support.purely_pfa,
        }
    run.tables["support"] = table
    return table


@is_scenario_check("support")
def check_support(run: ScenarioRun) -> CheckResult:
    """The atoms D(x) of the rows and their weights."""
    table = support_table(run)
    ca, _ = decompose_kernel(run.operator.kernel)
    mismatched = [x for x, entry in table.items() if entry["total"] != str(ca.row(x).total)]
    return CheckResult.expect(
        "support",
        not mismatched,
        f"{len(table)} rows; atom weights sum to P_ca(x, X)",
        witness=mismatched or None,
    )


def _expected_trace_rows(run: ScenarioRun, want: Any) -> Any:
    wanted = {row["n"] for row in want}
    return [
        {"n": row["n"], "ca_norm": row["ca_norm"], "pfa_norm": row["pfa_norm"]}
        for row in codec.trace_rows(run.trace)
        if row["n"] in wanted
    ]


def _expected_norm_law(run: ScenarioRun, want: Any) -> Any:
    if run.operator.q1 is None:
        return "no constant q1"
    row = norm_law(run.trace, run.operator.q1, want)
    return want if row is None else f"violated at row {row.n}"


def _singleton_summary(run: ScenarioRun, want: Any) -> Any:
    values = singleton_table(run)
    return {"pairs": len(values), "values": sorted({row[2] for row in values})}


def _invariant_error(run: ScenarioRun) -> Optional[str]:
    report = _invariant_or_error(run)
    return type(report).__name__ if isinstance(report, Exception) else None


def _solutions(run: ScenarioRun) -> Tuple[Any, ...]:
    report = _invariant_or_error(run)
    return () if isinstance(report, Exception) else report.solutions


_EXPECTATIONS = {
    "apply_initial": lambda run, want: codec.measure_to_json(
        apply(run.operator, run.scenario.initial)
    ),
    "invariants": lambda run, want: [codec.measure_to_json(mu) for mu in _solutions(run)],
    "classifications": lambda run, want: [measure_type(mu).value for mu in _solutions(run)],
    "closure": lambda run, want: [g.label for g in run.invariant_report.closure.basis],
    "invariant_error": lambda run, want: _invariant_error(run),
    "h1": lambda run, want: run.h_verdicts[0].status.value,
    "h2": lambda run, want: run.h_verdicts[1].status.value,
    "h_summary": lambda run, want: h_summary(*run.h_verdicts),
    "trace_rows": _expected_trace_rows,
    "norm_law": _expected_norm_law,
    "singletons": lambda run, want: singleton_table(run),
    "singleton_summary": _singleton_summary,
    "support": lambda run, want: support_table(run),
}


@is_scenario_check("expected")
def check_expected(run: ScenarioRun) -> List[CheckResult]:
    """Compare the run with the exact values the scenario expects."""
    results = []
    for key, want in sorted(run.scenario.expected.items()):
        compute = _EXPECTATIONS.get(key)
        if compute is None:
            results.append(CheckResult.fail(f"expected.{key}", "unknown expectation"))
            continue
        got = compute(run, want)
        results.append(
            CheckResult.expect(f"expected.{key}", got == want, f"expected {want!r}, got {got!r}")
        )
    return results


@dataclass
class Report:
    """Results of a scenario run or a property suite."""

    name: str
    seed: int
    results: List[CheckResult] = field(default_factory=list)
    trace: Optional[NormTrace] = None
    h_verdicts: Tuple[HVerdict, ...] = ()
    invariant_report: Optional[InvariantReport] = None
    tables: Dict[str, Any] = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)

    @property
    def failures(self) -> List[CheckResult]:
        return [result for result in self.results if not result.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "name": self.name,
            "seed": self.seed,
            "passed": self.passed,
            "results": [result.as_dict() for result in self.results],
            "tables": self.tables,
        }
        if self.trace is not None:
            data["trace"] = codec.trace_to_json(self.trace, *self.h_verdicts)
        if self.invariant_report is not None:
            data["invariant"] = codec.invariant_report_to_json(self.invariant_report)
        if include_timing:
            data["timing"] = self.timing
        return data

    def to_json(self, include_timing: bool = True) -> str:
        return codec.dumps(self.as_dict(include_timing))


def run_scenario(source: Union[str, Path, Scenario], seed: Optional[int] = None) -> Report:
    """
    Run the checks of a scenario (and its expectations) and collect a Report.

    Failing results carry the scenario document as their witness. Given
    the same scenario and seed the report is identical apart from timing.

    """
    scenario = source if isinstance(source, Scenario) else load_scenario(source)
    seed = scenario.seed if seed is None else seed
    run = ScenarioRun(scenario, seed)
    report = Report(scenario.name, seed)
    labels = list(scenario.checks)
    if scenario.expected and "expected" not in labels:
        labels.append("expected")
    witness: Optional[Dict[str, Any]] = None
    for label in labels:
        logger.debug("Running check '%s' on scenario '%s'", label, scenario.name)
        started = time.perf_counter()
        for result in _checks.run(label, run):
            if not result.passed and result.witness is None:
                witness = witness or {"scenario": scenario_to_json(scenario), "seed": seed}
                result = dataclasses.replace(result, witness=witness)
            report.results.append(result)
        report.timing[label] = round(time.perf_counter() - started, 6)
    computed = vars(run)
    report.trace = computed.get("trace")
    report.h_verdicts = computed.get("h_verdicts", ())
    report.invariant_report = computed.get("invariant_report")
    report.tables = run.tables
    return report


def run_corpus(
    directory: Union[str, Path, None] = None, seed: Optional[int] = None, jobs: int = 1
) -> List[Report]:
    """Run every scenario of the corpus directory, in file name order."""
    directory = Path(directory or settings.CORPUS_DIR)
    paths = sorted(directory.glob("*.json"))
    logger.debug("Running %s corpus scenarios from %s", len(paths), directory)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda path: run_scenario(path, seed), paths))
    return [run_scenario(path, seed) for path in paths]
