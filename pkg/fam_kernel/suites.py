"""
Randomized property suites.

Each suite function checks one generated instance, given a `random.Random`
seeded from the suite name, the run seed and the instance index, so any
failure is reproducible from those three values alone. Failing results
carry a scenario document rebuilding the instance where one exists.

"""
from __future__ import annotations

import dataclasses
import logging
import random
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from . import codec, registry, settings
from .decorators import is_property_suite
from .generators import (
    Universe,
    random_atomic_chain,
    random_combined,
    random_kernel,
    random_measure,
    random_rational,
    random_universe,
    random_weights,
)
from .invariant import (
    classify_invariants,
    h_condition_corollaries,
    invariant_measure,
    uniform_decay,
)
from .kernels import (
    CombinedKernel,
    Kernel,
    combined_from_kernel,
    convolve,
    decompose_kernel,
    kernel_power,
    kernel_power_singletons,
    kernels_equal,
    make_combined,
)
from .measures import (
    Measure,
    MeasureType,
    evaluate,
    in_S,
    is_pfa,
    measure_type,
    norm,
    normalize,
    yosida_hewitt,
    zero_measure,
)
from .operators import (
    MarkovOperator,
    apply,
    check_H1,
    check_H2,
    iterate,
    norm_law,
    range_inclusions,
)
from .scenarios import DEFAULT_CHECKS, Report, Scenario, scenario_to_json
from .sets import points, sample_points
from .verdicts import CheckResult, CheckStatus

logger = logging.getLogger(__name__)

Matrix = Sequence[Sequence[Fraction]]

# instances per run when no count is given
REFERENCE_COUNTS: Dict[str, int] = {
    "pfa_criterion": 200,
    "pfa_kernel_range": 200,
    "pfa_kernel_powers": 50,
    "superpositions": 100,
    "decomposition": 500,
    "kernel_decomposition": 100,
    "matrix_oracle": 100,
    "invariant_classes": 50,
    "h1_norm_law": 50,
    "h2_norm_law": 50,
    "uniform_decay": 30,
    "linearity": 100,
}
DEFAULT_COUNT = 100


def scenario_witness(
    name: str,
    kernel: Union[Kernel, CombinedKernel],
    initial: Measure,
    universe: Optional[Universe] = None,
    checks: Iterable[str] = DEFAULT_CHECKS,
    n_max: int = 10,
) -> Dict[str, Any]:
    """A scenario document rebuilding a generated instance."""
    if not in_S(initial):
        initial = normalize(initial)
    scenario = Scenario(
        name=name,
        ground=kernel.ground,
        filters=universe.filters if universe else (),
        kernel=kernel,
        initial=initial,
        n_max=n_max,
        checks=tuple(checks),
    )
    return scenario_to_json(scenario)


def _sub_probability(rng: random.Random, universe: Universe, shape: str) -> Measure:
    total = random_rational(rng, 0, 1)
    return random_measure(rng, universe, shape, total or Fraction(1))


@is_property_suite("pfa_criterion")
def pfa_criterion(rng: random.Random) -> CheckResult:
    """A nonnegative measure is pfa iff it vanishes on every singleton."""
    universe = random_universe(rng)
    mu = random_measure(rng, universe)
    candidates = list(universe.atoms) + sample_points(universe.ground, rng, settings.SAMPLE_SIZE)
    vanishes = all(evaluate(mu, points(universe.ground, x)) == 0 for x in candidates)
    return CheckResult.expect(
        "pfa_criterion",
        is_pfa(mu) == vanishes == (measure_type(mu) is MeasureType.PFA),
        f"{measure_type(mu).value} measure, singletons vanish: {vanishes}",
        witness=codec.measure_to_json(mu),
    )


@is_property_suite("pfa_kernel_range")
def pfa_kernel_range(rng: random.Random) -> List[CheckResult]:
    """A kernel with purely pfa rows maps every measure of V_ba to a pfa measure."""
    universe = random_universe(rng)
    kernel = random_kernel(rng, universe, "pfa")
    operator = MarkovOperator(kernel, universe.filters)
    results = []
    for shape in ("atomic", "pfa", "mixed"):
        mu = _sub_probability(rng, universe, shape)
        image = apply(operator, mu)
        results.append(
            CheckResult.expect(
                f"pfa_kernel_range.{shape}",
                is_pfa(image),
                f"A mu has mass {image.total}",
                witness=None
                if is_pfa(image)
                else scenario_witness("pfa_kernel_range", kernel, mu, universe),
            )
        )
    return results


@is_property_suite("pfa_kernel_powers")
def pfa_kernel_powers(rng: random.Random) -> CheckResult:
    """Every power of a purely pfa kernel vanishes on singletons, on the diagonal too."""
    universe = random_universe(rng)
    kernel = random_kernel(rng, universe, "pfa")
    chosen = list(universe.atoms[:4]) + sample_points(universe.ground, rng, 2)[:2]
    n = rng.randint(1, 3)
    table = kernel_power_singletons(kernel, n, [(x, y) for x in chosen for y in chosen])
    nonzero = [(str(x), str(y), str(v)) for x, y, v in table if v != 0]
    return CheckResult.expect(
        "pfa_kernel_powers",
        not nonzero,
        f"P^{n}(x, {{y}}) on {len(table)} pairs",
        witness=None
        if not nonzero
        else scenario_witness(
            "pfa_kernel_powers", kernel, random_measure(rng, universe), universe, ("singletons",)
        ),
    )


@is_property_suite("superpositions")
def superpositions(rng: random.Random) -> CheckResult:
    """Range inclusions of A_ca A_ca, A_pfa A_pfa and A_pfa A_ca."""
    universe = random_universe(rng)
    kernel: Union[Kernel, CombinedKernel]
    if rng.random() < 0.5:
        kernel = random_combined(rng, universe)
    else:
        kernel = random_kernel(rng, universe)
    operator = MarkovOperator(kernel, universe.filters)
    suite = [_sub_probability(rng, universe, shape) for shape in ("atomic", "pfa", "mixed")]
    report = range_inclusions(operator, suite)
    return CheckResult.expect(
        "superpositions",
        report.passed and not report.skipped,
        f"{report.checked} measures, {len(report.violations)} violations",
        witness=None
        if report.passed
        else scenario_witness(
            "superpositions", kernel, report.violations[0][1], universe, ("range_inclusions",)
        ),
    )


@is_property_suite("decomposition")
def decomposition(rng: random.Random) -> CheckResult:
    """The two parts of a measure are ca and pfa, sum back to it and split its norm."""
    universe = random_universe(rng)
    mu = random_measure(rng, universe)
    ca, pfa = yosida_hewitt(mu)
    holds = (
        not ca.pfa
        and not pfa.atomic
        and ca + pfa == mu
        and norm(ca) + norm(pfa) == norm(mu)
        and yosida_hewitt(ca) == (ca, zero_measure(mu.ground))
    )
    return CheckResult.expect(
        "decomposition", holds, measure_type(mu).value, witness=codec.measure_to_json(mu)
    )


@is_property_suite("kernel_decomposition")
def kernel_decomposition(rng: random.Random) -> List[CheckResult]:
    """Splitting a combined kernel and recombining its parts is exact."""
    universe = random_universe(rng)
    combined = random_combined(rng, universe)
    kernel = combined.kernel
    ca, pfa = decompose_kernel(kernel)
    recognised = combined_from_kernel(kernel)
    rebuilt = make_combined(recognised.q1, *recognised.normalized())
    initial = random_measure(rng, universe)
    witness = scenario_witness(
        "kernel_decomposition", combined, initial, universe, ("decomposition",)
    )
    return [
        CheckResult.expect(
            "kernel_decomposition.parts",
            kernels_equal(ca, combined.ca_part) and kernels_equal(pfa, combined.pfa_part),
            witness=witness,
        ),
        CheckResult.expect(
            "kernel_decomposition.masses",
            (recognised.q1, recognised.q2) == (combined.q1, combined.q2),
            f"q1 = {combined.q1}",
            witness=witness,
        ),
        CheckResult.expect(
            "kernel_decomposition.rebuild", kernels_equal(rebuilt.kernel, kernel), witness=witness
        ),
    ]


def matrix_product(left: Matrix, right: Matrix) -> List[List[Fraction]]:
    columns = range(len(right[0]))
    return [
        [sum((a * b[j] for a, b in zip(row, right)), Fraction(0)) for j in columns]
        for row in left
    ]


def matrix_power(matrix: Matrix, n: int) -> List[List[Fraction]]:
    result = [list(row) for row in matrix]
    for _ in range(n - 1):
        result = matrix_product(result, matrix)
    return result


def stationary_oracle(matrix: Matrix) -> List[Fraction]:
    """
    Solve pi P = pi, sum(pi) = 1 by Gauss-Jordan elimination.

    The last balance equation is replaced by the normalisation, which is
    enough for an irreducible chain.

    """
    size = len(matrix)
    rows = [
        [Fraction(matrix[i][j]) - (i == j) for i in range(size)] + [Fraction(0)]
        for j in range(size)
    ]
    rows[-1] = [Fraction(1)] * size + [Fraction(1)]
    for col in range(size):
        pivot = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[pivot] = rows[pivot], rows[col]
        lead = rows[col][col]
        rows[col] = [value / lead for value in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return [row[size] for row in rows]


@is_property_suite("matrix_oracle")
def matrix_oracle(rng: random.Random) -> List[CheckResult]:
    """Finite atomic chains agree exactly with stochastic-matrix arithmetic."""
    chain = random_atomic_chain(rng)
    states = chain.ground.points
    initial = Measure.build(chain.ground, atoms=[(states[0], 1)])
    witness = scenario_witness("matrix_oracle", chain.kernel, initial, checks=("invariant",))
    operator = MarkovOperator(chain.kernel)
    results = []
    vector = random_weights(rng, len(states))
    image = apply(operator, Measure.build(chain.ground, atoms=list(zip(states, vector))))
    results.append(
        CheckResult.expect(
            "matrix_oracle.apply",
            [image.atomic[y] for y in states] == matrix_product([vector], chain.matrix)[0]
            and not image.pfa,
            witness=witness,
        )
    )
    for n in range(1, 6):
        power = kernel_power(chain.kernel, n)
        expected = matrix_power(chain.matrix, n)
        got = [[power.row(x).atomic[y] for y in states] for x in states]
        results.append(
            CheckResult.expect(f"matrix_oracle.power[{n}]", got == expected, witness=witness)
        )
    other = random_atomic_chain(rng, len(states))
    product = convolve(chain.kernel, other.kernel)
    results.append(
        CheckResult.expect(
            "matrix_oracle.convolve",
            [[product.row(x).atomic[y] for y in states] for x in states]
            == matrix_product(chain.matrix, other.matrix),
            witness=witness,
        )
    )
    report = invariant_measure(operator, [initial])
    stationary = stationary_oracle(chain.matrix)
    found = [[mu.atomic[x] for x in states] for mu in report.solutions]
    results.append(
        CheckResult.expect(
            "matrix_oracle.stationary",
            found == [stationary],
            f"{len(states)} states",
            witness=witness,
        )
    )
    return results


def _condition(rng: random.Random) -> Optional[str]:
    return rng.choice((None, "H1", "H2"))


@is_property_suite("invariant_classes")
def invariant_classes(rng: random.Random) -> List[CheckResult]:
    """
    Nondegenerate combined chains have no ca invariant, and the components
    of a mixed invariant are not invariant themselves.

    """
    universe = random_universe(rng)
    combined = random_combined(rng, universe, _condition(rng))
    operator = MarkovOperator(combined, universe.filters)
    initial = random_measure(rng, universe)
    report = invariant_measure(operator, [initial] + [random_measure(rng, universe, "atomic")])
    witness = scenario_witness("invariant_classes", combined, initial, universe)
    results = classify_invariants(report, operator)
    results.append(
        CheckResult.expect(
            "invariant_classes.pfa_part",
            bool(report.solutions) and all(mu.pfa for mu in report.solutions),
            f"{len(report.solutions)} solution(s)",
        )
    )
    return [
        result if result.passed else dataclasses.replace(result, witness=witness)
        for result in results
    ]


def _norm_law_suite(rng: random.Random, condition: str) -> CheckResult:
    universe = random_universe(rng)
    combined = random_combined(rng, universe, condition)
    operator = MarkovOperator(combined, universe.filters)
    verdict = (check_H1 if condition == "H1" else check_H2)(operator)
    initial = random_measure(rng, universe)
    n_max = rng.randint(6, 12)
    row = None
    if verdict.holds:
        row = norm_law(iterate(operator, initial, n_max), combined.q1, condition)
    return CheckResult.expect(
        f"norm_law.{condition}",
        verdict.holds and row is None,
        f"q1 = {combined.q1}, {verdict.status.value}"
        + ("" if row is None else f", violated at row {row.n}"),
        witness=None
        if verdict.holds and row is None
        else scenario_witness(
            f"norm_law_{condition}", combined, initial, universe, ("trace",), n_max
        ),
    )


@is_property_suite("h1_norm_law")
def h1_norm_law(rng: random.Random) -> CheckResult:
    """Under (H1) the ca norm of every iterate after the first is exactly q1."""
    return _norm_law_suite(rng, "H1")


@is_property_suite("h2_norm_law")
def h2_norm_law(rng: random.Random) -> CheckResult:
    """Under (H2) the ca norm at step n + 1 is exactly q1**n times the initial ca norm."""
    return _norm_law_suite(rng, "H2")


@is_property_suite("uniform_decay")
def uniform_decay_suite(rng: random.Random) -> List[CheckResult]:
    """Under (H2) one geometric bound holds for all initials and every invariant is pfa."""
    universe = random_universe(rng)
    combined = random_combined(rng, universe, "H2")
    operator = MarkovOperator(combined, universe.filters)
    initials = [random_measure(rng, universe) for _ in range(5)]
    report = invariant_measure(operator, initials)
    witness = scenario_witness("uniform_decay", combined, initials[0], universe, ("corollaries",))
    results = [uniform_decay(operator, initials, rng.randint(6, 12))]
    results.extend(h_condition_corollaries(operator, report))
    return [
        result if result.passed else dataclasses.replace(result, witness=witness)
        for result in results
    ]


@is_property_suite("linearity")
def linearity(rng: random.Random) -> CheckResult:
    """A(a mu + b nu) = a A mu + b A nu, exactly."""
    universe = random_universe(rng)
    kernel = random_kernel(rng, universe)
    operator = MarkovOperator(kernel, universe.filters)
    mu, nu = random_measure(rng, universe), random_measure(rng, universe)
    a, b = random_rational(rng, -2, 2), random_rational(rng, -2, 2)
    holds = apply(operator, a * mu + b * nu) == a * apply(operator, mu) + b * apply(operator, nu)
    return CheckResult.expect(
        "linearity",
        holds,
        f"a = {a}, b = {b}",
        witness=None if holds else scenario_witness("linearity", kernel, mu, universe),
    )


def _dump_failure(name: str, seed: int, index: int, witness: Dict[str, Any]) -> None:
    if not settings.FAILURE_DUMP_DIR:
        return
    directory = Path(settings.FAILURE_DUMP_DIR)
    directory.mkdir(parents=True, exist_ok=True)
    document = witness.get("scenario", witness)
    path = directory / f"{name}-{seed}-{index}.json"
    path.write_text(codec.dumps(document))
    logger.info("Dumped failing instance %s of suite '%s' to %s", index, name, path)


def run_property_suite(name: str, seed: int = 0, count: Optional[int] = None) -> Report:
    """
    Generate and check `count` instances of a registered suite.

    `count` defaults to the reference count of the suite.

    Only failures are kept as individual results; they are renamed with
    their instance index and carry the coordinates (suite, seed, index)
    plus the reproducing scenario when the suite built one.

    """
    registry.get_suites(name)
    if count is None:
        count = REFERENCE_COUNTS.get(name, DEFAULT_COUNT)
    report = Report(name, seed)
    failed = skipped = 0
    for index in range(count):
        rng = random.Random(f"{name}:{seed}:{index}")
        results = registry._suites.run(name, rng)
        failures = [result for result in results if not result.passed]
        skipped += all(result.status is CheckStatus.SKIPPED for result in results)
        if not failures:
            continue
        failed += 1
        for result in failures:
            witness: Dict[str, Any] = {"suite": name, "seed": seed, "index": index}
            if isinstance(result.witness, dict) and result.witness.get("schema"):
                witness["scenario"] = result.witness
            elif result.witness is not None:
                witness["detail"] = result.witness
            report.results.append(
                dataclasses.replace(result, name=f"{result.name}[{index}]", witness=witness)
            )
        _dump_failure(name, seed, index, report.results[-1].witness)
    logger.debug("Suite '%s' (seed %s): %s/%s instances failed", name, seed, failed, count)
    report.results.insert(
        0,
        CheckResult.expect(
            name, failed == 0, f"{count - failed}/{count} instances passed, {skipped} skipped"
        ),
    )
    report.tables = {"instances": count, "failed": failed, "skipped": skipped}
    return report
