"""
Invariant measures mu = A mu on the orbit closure.

The closure is the smallest set of generators (atoms and filter
functionals) containing the seeds and closed under A. On its span A is a
rational matrix, so the invariant measures in the span are the
probability vectors in the nullspace of M - I.

"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import sympy

from . import settings
from .measures import (
    Measure,
    MeasureType,
    is_pfa,
    measure_type,
    norm,
    yosida_hewitt,
    zero_measure,
)
from .operators import HVerdict, MarkovOperator, apply, check_H1, check_H2, iterate
from .sets import FilterFunctional, GroundSpace, Point
from .verdicts import CheckResult

logger = logging.getLogger(__name__)


class ClosureDiverged(Exception):
    def __init__(self, cap: int) -> None:
        self.cap = cap
        super().__init__(f"Orbit closure exceeded {cap} generators.")


class NoRepresentableSolution(Exception):
    """No invariant probability measure lies in the span of the closure."""


@dataclass(frozen=True)
class Generator:
    """A basis element of an orbit closure: an atom or a filter functional."""

    kind: str
    value: Any

    @classmethod
    def atom(cls, x: Point) -> Generator:
        return cls("atom", x)

    @classmethod
    def filter(cls, eta: FilterFunctional) -> Generator:  # noqa: A003
        return cls("filter", eta)

    def measure(self, ground: GroundSpace) -> Measure:
        if self.kind == "atom":
            return Measure.build(ground, atoms=[(self.value, 1)])
        return Measure.build(ground, pfa=[(self.value, 1)])

    def coefficient(self, mu: Measure) -> Fraction:
        if self.kind == "atom":
            return mu.atomic[self.value]
        return mu.pfa[self.value]

    @property
    def label(self) -> str:
        if self.kind == "atom":
            return f"atom:{self.value}"
        return f"filter:{self.value.id}"


def generators_of(mu: Measure) -> List[Generator]:
    return [Generator.atom(x) for x in mu.atomic.support] + [
        Generator.filter(eta) for eta in mu.pfa.filters
    ]


@dataclass(frozen=True)
class OrbitClosure:
    """Generators closed under A and the matrix of A on their span (column j = A g_j)."""

    ground: GroundSpace
    basis: Tuple[Generator, ...]
    matrix: Tuple[Tuple[Fraction, ...], ...]
    cap: int

    def column_sums(self) -> Tuple[Fraction, ...]:
        size = len(self.basis)
        return tuple(
            sum((self.matrix[i][j] for i in range(size)), Fraction(0)) for j in range(size)
        )

    def to_measure(self, vector: Sequence[Fraction]) -> Measure:
        result = zero_measure(self.ground)
        for generator, weight in zip(self.basis, vector):
            result = result + weight * generator.measure(self.ground)
        return result

    def coordinates(self, mu: Measure) -> Tuple[Fraction, ...]:
        return tuple(g.coefficient(mu) for g in self.basis)


def orbit_closure(
    operator: MarkovOperator,
    seeds: Iterable[Union[Generator, Measure]],
    cap: Optional[int] = None,
) -> OrbitClosure:
    """
    Close the seeds under A.

    Raises ClosureDiverged once more than `cap` generators are needed, and
    lets UndecidedLimit through when A cannot be evaluated on a filter.

    """
    cap = settings.CLOSURE_CAP if cap is None else cap
    if cap < 1:
        raise ValueError(f"The closure cap must be positive, not {cap}.")
    ground = operator.ground
    basis: List[Generator] = []
    index: Dict[Generator, int] = {}

    def add(generator: Generator) -> None:
        if generator in index:
            return
        index[generator] = len(basis)
        basis.append(generator)
        if len(basis) > cap:
            raise ClosureDiverged(cap)

    for seed in seeds:
        for generator in generators_of(seed) if isinstance(seed, Measure) else [seed]:
            add(generator)
    images: List[Measure] = []
    while len(images) < len(basis):
        image = apply(operator, basis[len(images)].measure(ground))
        images.append(image)
        for generator in generators_of(image):
            add(generator)
    logger.debug("Orbit closure has %s generators", len(basis))
    matrix = tuple(
        tuple(generator.coefficient(image) for image in images) for generator in basis
    )
    return OrbitClosure(ground, tuple(basis), matrix, cap)


def _nullspace(closure: OrbitClosure) -> List[List[Fraction]]:
    size = len(closure.basis)
    shifted = sympy.Matrix(
        [
            [
                sympy.Rational(entry.numerator, entry.denominator) - (1 if i == j else 0)
                for j, entry in enumerate(row)
            ]
            for i, row in enumerate(closure.matrix)
        ]
    )
    if size == 0:
        return []
    return [
        [Fraction(int(entry.p), int(entry.q)) for entry in vector]
        for vector in shifted.nullspace()
    ]


def _normalized(vector: List[Fraction]) -> Optional[List[Fraction]]:
    mass = sum(vector, Fraction(0))
    if mass == 0:
        return None
    scaled = [x / mass for x in vector]
    return scaled if all(x >= 0 for x in scaled) else None


def _segment_vertices(first: List[Fraction], second: List[Fraction]) -> List[List[Fraction]]:
    """Vertices of {a*first + b*second >= 0, total mass 1} for a two-dimensional nullspace."""
    mass_first, mass_second = sum(first, Fraction(0)), sum(second, Fraction(0))
    if mass_first == 0 and mass_second == 0:
        return []
    if mass_first == 0:
        first, second = second, first
        mass_first, mass_second = mass_second, mass_first
    base = [x / mass_first for x in first]
    direction = [y - mass_second * x for x, y in zip(base, second)]
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None
    for a, b in zip(base, direction):
        if b > 0:
            lower = -a / b if lower is None else max(lower, -a / b)
        elif b < 0:
            upper = -a / b if upper is None else min(upper, -a / b)
        elif a < 0:
            return []
    # direction has total mass 0 and is nonzero, so both bounds exist
    if lower is None or upper is None or lower > upper:
        return []
    ends = [lower] if lower == upper else [lower, upper]
    return [[a + t * b for a, b in zip(base, direction)] for t in ends]


@dataclass(frozen=True)
class InvariantReport:
    """Invariant probability measures found in the span of a closure."""

    closure: OrbitClosure
    solutions: Tuple[Measure, ...]
    dimension: int
    enumerated: bool

    @property
    def classifications(self) -> Tuple[MeasureType, ...]:
        return tuple(measure_type(mu) for mu in self.solutions)

    @property
    def delta_ba_nonempty(self) -> bool:
        return bool(self.solutions)

    @property
    def delta_ca_empty(self) -> bool:
        return MeasureType.CA not in self.classifications

    @property
    def delta_pfa_nonempty(self) -> bool:
        return MeasureType.PFA in self.classifications


def solve_invariant(closure: OrbitClosure) -> InvariantReport:
    """
    Solve mu = A mu exactly on the span of the closure.

    Nullspaces of dimension one or two are intersected with the simplex
    and their extreme points returned; larger nullspaces report the
    normalisable nonnegative basis vectors only (`enumerated` is False).

    """
    vectors = _nullspace(closure)
    dimension = len(vectors)
    if dimension == 1:
        normalized = _normalized(vectors[0])
        found = [normalized] if normalized is not None else []
    elif dimension == 2:
        found = _segment_vertices(*vectors)
    else:
        found = [v for v in (_normalized(vector) for vector in vectors) if v is not None]
    enumerated = dimension <= 2
    if enumerated and not found:
        raise NoRepresentableSolution(
            f"The nullspace of A - I (dimension {dimension}) misses the "
            "probability simplex of the closure."
        )
    found.sort(key=lambda vector: [-x for x in vector])
    solutions = tuple(closure.to_measure(vector) for vector in found)
    logger.debug("Found %s invariant measures (nullspace dimension %s)", len(solutions), dimension)
    return InvariantReport(closure, solutions, dimension, enumerated)


def default_seeds(operator: MarkovOperator, *measures: Measure) -> List[Union[Generator, Measure]]:
    """Seeds covering the given measures, the kernel's atoms and the filter basis."""
    seeds: List[Union[Generator, Measure]] = list(measures)
    seeds.extend(Generator.atom(x) for x in operator.kernel.atoms)
    seeds.extend(Generator.filter(eta) for eta in operator.basis)
    return seeds


def invariant_measure(
    operator: MarkovOperator,
    seeds: Optional[Iterable[Union[Generator, Measure]]] = None,
    cap: Optional[int] = None,
) -> InvariantReport:
    seeds = default_seeds(operator) if seeds is None else seeds
    return solve_invariant(orbit_closure(operator, seeds, cap))


def _first_difference(closure: OrbitClosure, left: Measure, right: Measure) -> Optional[str]:
    difference = left - right
    if difference.is_zero:
        return None
    for generator in closure.basis:
        delta = generator.coefficient(difference)
        if delta != 0:
            before, after = generator.coefficient(left), generator.coefficient(right)
            return f"{generator.label} ({before} vs {after})"
    return "outside the closure"


def _is_zero_kernel_part(kernel: Any) -> bool:
    return all(rule.value.mass == 0 for rule in kernel.rules)


def classify_invariants(report: InvariantReport, operator: MarkovOperator) -> List[CheckResult]:
    """
    Check the structure of the invariant measures.

    Every solution must be a fixed point. A kernel with purely finitely
    additive rows only has pfa invariants; a nondegenerate combined chain
    has no countably additive invariant, and neither component of a mixed
    invariant is itself invariant.

    """
    results = []
    types = report.classifications
    for i, mu in enumerate(report.solutions):
        results.append(
            CheckResult.expect(
                f"fixed_point[{i}]",
                apply(operator, mu) == mu,
                f"A mu* = mu* for solution {i} ({types[i].value})",
            )
        )
    ca_kernel, pfa_kernel = operator.split
    if _is_zero_kernel_part(ca_kernel):
        results.append(
            CheckResult.expect(
                "pfa_kernel_invariants",
                all(is_pfa(mu) for mu in report.solutions) and report.delta_ca_empty,
                "every invariant of a purely finitely additive kernel is pfa",
            )
        )
    else:
        results.append(CheckResult.skip("pfa_kernel_invariants", "kernel has a ca part"))
    if not operator.nondegenerate:
        results.append(CheckResult.skip("no_ca_invariant", "not a nondegenerate combined chain"))
        results.append(
            CheckResult.skip("components_not_invariant", "not a nondegenerate combined chain")
        )
        if _is_zero_kernel_part(pfa_kernel):
            for i, mu in enumerate(report.solutions):
                ca, pfa = yosida_hewitt(mu)
                results.append(
                    CheckResult.expect(
                        f"ca_components_invariant[{i}]",
                        apply(operator, ca) == ca and apply(operator, pfa) == pfa,
                        "components of an invariant of a ca kernel are invariant",
                    )
                )
        return results
    atomic = [i for i, kind in enumerate(types) if kind is MeasureType.CA]
    results.append(
        CheckResult.expect(
            "no_ca_invariant",
            not atomic,
            "no invariant measure of a nondegenerate combined chain is purely atomic",
            witness=[str(i) for i in atomic] or None,
        )
    )
    for i, mu in enumerate(report.solutions):
        if types[i] is not MeasureType.MIXED:
            continue
        for name, part in zip(("ca", "pfa"), yosida_hewitt(mu)):
            difference = _first_difference(report.closure, apply(operator, part), part)
            results.append(
                CheckResult.expect(
                    f"component_not_invariant[{i}].{name}",
                    difference is not None,
                    f"A mu*_{name} != mu*_{name}: {difference}",
                )
            )
    return results


def h_condition_corollaries(
    operator: MarkovOperator,
    report: InvariantReport,
    h1: Optional[HVerdict] = None,
    h2: Optional[HVerdict] = None,
) -> List[CheckResult]:
    """
    Norms of the components of invariant measures under (H1) / (H2).

    Under (H1) every invariant has ca norm q1 and pfa norm q2; under (H2)
    every invariant is purely finitely additive.

    """
    if not operator.nondegenerate:
        reason = "requires a nondegenerate combined chain"
        return [
            CheckResult.skip("h1_invariant_norms", reason),
            CheckResult.skip("h2_invariants_pfa", reason),
        ]
    h1 = h1 or check_H1(operator)
    h2 = h2 or check_H2(operator)
    q1, q2 = operator.q1, operator.q2
    results = []
    if h1.holds:
        results.append(
            CheckResult.expect(
                "h1_invariant_norms",
                bool(report.solutions)
                and all(
                    norm(ca) == q1 and norm(pfa) == q2
                    for ca, pfa in map(yosida_hewitt, report.solutions)
                ),
                f"every invariant has ||mu*_ca|| = {q1} and ||mu*_pfa|| = {q2}",
            )
        )
    else:
        results.append(CheckResult.skip("h1_invariant_norms", "(H1) does not hold"))
    if h2.holds:
        results.append(
            CheckResult.expect(
                "h2_invariants_pfa",
                report.delta_ba_nonempty
                and all(is_pfa(mu) for mu in report.solutions)
                and report.delta_ca_empty,
                "every invariant is purely finitely additive",
            )
        )
    else:
        results.append(CheckResult.skip("h2_invariants_pfa", "(H2) does not hold"))
    return results


def uniform_decay(
    operator: MarkovOperator, initials: Iterable[Measure], n_max: int
) -> CheckResult:
    """
    Under (H2), ca_norm(n + 1) = q1**n * ||mu1_ca|| <= q1**n for every initial.

    The bound has the same exponent for all initial measures, which is the
    uniform geometric convergence of the ca norm to zero.

    """
    if not operator.nondegenerate or not check_H2(operator).holds:
        return CheckResult.skip("uniform_decay", "(H2) does not hold on a nondegenerate chain")
    q1 = operator.q1
    count = 0
    for initial in initials:
        count += 1
        trace = iterate(operator, initial, n_max)
        initial_ca = trace.rows[0].ca_norm
        for row in trace.rows[1:]:
            bound = q1 ** (row.n - 1)  # type: ignore
            if row.ca_norm != bound * initial_ca or row.ca_norm > bound:
                return CheckResult.fail(
                    "uniform_decay",
                    f"row {row.n}: ca_norm {row.ca_norm}, bound {bound}, "
                    f"initial ca norm {initial_ca}",
                )
    return CheckResult.ok(
        "uniform_decay", f"ca_norm(n+1) = {q1}^n * ||mu1_ca|| for {count} initials, n <= {n_max}"
    )
