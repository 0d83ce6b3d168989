"""
Finitely additive measures on a discrete ground.

A `Measure` is a finite atomic part plus a rational combination of filter
functionals. On a discrete space every countably additive measure is
atomic, so the split into the two parts *is* the Yosida-Hewitt
decomposition. All arithmetic is exact.

"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Tuple, Union

from .sets import (
    FilterFunctional,
    GroundMismatch,
    GroundSpace,
    Point,
    SetExpr,
    Verdict,
    filter_eval,
    points,
    sample_points,
)

logger = logging.getLogger(__name__)

Value = Union[Fraction, Verdict]


class SignedMeasureError(ValueError):
    def __init__(self, operation: str) -> None:
        super().__init__(f"`{operation}` is only defined for nonnegative measures.")


class MeasureType(str, enum.Enum):
    CA = "ca"
    PFA = "pfa"
    MIXED = "mixed"
    # the zero measure is both countably and purely finitely additive
    BOTH = "both-types"


class MeasureClass(str, enum.Enum):
    BA = "ba"
    CA = "ca"
    PFA = "pfa"


def rational(value: Any) -> Fraction:
    """Coerce to an exact rational; floats are rejected."""
    if isinstance(value, (bool, float)):
        raise TypeError(f"Exact rationals only, got {value!r}.")
    return Fraction(value)


def _items(values: Union[Mapping, Iterable[Tuple[Any, Any]]]) -> Iterable[Tuple[Any, Any]]:
    return values.items() if isinstance(values, Mapping) else values


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported point masses; zero weights are pruned."""

    ground: GroundSpace
    weights: Tuple[Tuple[Point, Fraction], ...] = ()

    @classmethod
    def build(
        cls, ground: GroundSpace, weights: Union[Mapping, Iterable[Tuple[Any, Any]]] = ()
    ) -> AtomicMeasure:
        merged: Dict[Point, Fraction] = {}
        for x, weight in _items(weights):
            point = ground.point(x)
            merged[point] = merged.get(point, Fraction(0)) + rational(weight)
        ordered = sorted(
            ((x, w) for x, w in merged.items() if w != 0),
            key=lambda item: ground.key(item[0]),
        )
        return cls(ground, tuple(ordered))

    def __bool__(self) -> bool:
        return bool(self.weights)

    def __getitem__(self, x: Point) -> Fraction:
        return self.as_dict().get(x, Fraction(0))

    def as_dict(self) -> Dict[Point, Fraction]:
        return dict(self.weights)

    @property
    def support(self) -> Tuple[Point, ...]:
        return tuple(x for x, _ in self.weights)

    @property
    def total(self) -> Fraction:
        return sum((w for _, w in self.weights), Fraction(0))

    @property
    def is_nonnegative(self) -> bool:
        return all(w > 0 for _, w in self.weights)


@dataclass(frozen=True)
class PfaCombination:
    """Rational combination of filter functionals, sorted by filter id."""

    ground: GroundSpace
    terms: Tuple[Tuple[FilterFunctional, Fraction], ...] = ()

    @classmethod
    def build(
        cls,
        ground: GroundSpace,
        terms: Union[Mapping, Iterable[Tuple[FilterFunctional, Any]]] = (),
    ) -> PfaCombination:
        merged: Dict[FilterFunctional, Fraction] = {}
        for eta, coefficient in _items(terms):
            if eta.ground != ground:
                raise GroundMismatch(
                    f"Filter `{eta.id}` does not live on `{ground.label}`."
                )
            merged[eta] = merged.get(eta, Fraction(0)) + rational(coefficient)
        ids = [eta.id for eta in merged]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Distinct filters share an id: {sorted(ids)}.")
        ordered = sorted(
            ((eta, c) for eta, c in merged.items() if c != 0), key=lambda t: t[0].id
        )
        return cls(ground, tuple(ordered))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __getitem__(self, eta: FilterFunctional) -> Fraction:
        return dict(self.terms).get(eta, Fraction(0))

    @property
    def filters(self) -> Tuple[FilterFunctional, ...]:
        return tuple(eta for eta, _ in self.terms)

    @property
    def total(self) -> Fraction:
        return sum((c for _, c in self.terms), Fraction(0))

    @property
    def is_nonnegative(self) -> bool:
        return all(c > 0 for _, c in self.terms)


@dataclass(frozen=True)
class Measure:
    """A finitely additive measure: atomic part + pfa part."""

    atomic: AtomicMeasure
    pfa: PfaCombination

    def __post_init__(self) -> None:
        if self.atomic.ground != self.pfa.ground:
            raise GroundMismatch("Atomic and pfa parts live on different grounds.")

    @classmethod
    def build(
        cls,
        ground: GroundSpace,
        atoms: Union[Mapping, Iterable[Tuple[Any, Any]]] = (),
        pfa: Union[Mapping, Iterable[Tuple[FilterFunctional, Any]]] = (),
    ) -> Measure:
        return cls(AtomicMeasure.build(ground, atoms), PfaCombination.build(ground, pfa))

    @property
    def ground(self) -> GroundSpace:
        return self.atomic.ground

    @property
    def is_zero(self) -> bool:
        return not self.atomic and not self.pfa

    @property
    def is_nonnegative(self) -> bool:
        return self.atomic.is_nonnegative and self.pfa.is_nonnegative

    @property
    def total(self) -> Fraction:
        """Signed total mass mu(X)."""
        return self.atomic.total + self.pfa.total

    def __add__(self, other: Measure) -> Measure:
        return combine(1, self, 1, other)

    def __sub__(self, other: Measure) -> Measure:
        return combine(1, self, -1, other)

    def __rmul__(self, factor: Any) -> Measure:
        return scale(factor, self)

    def __neg__(self) -> Measure:
        return scale(-1, self)


def zero_measure(ground: GroundSpace) -> Measure:
    return Measure.build(ground)


def dirac(ground: GroundSpace, x: Any, weight: Any = 1) -> Measure:
    return Measure.build(ground, atoms=[(x, weight)])


def filter_measure(eta: FilterFunctional, weight: Any = 1) -> Measure:
    return Measure.build(eta.ground, pfa=[(eta, weight)])


def combine(a: Any, mu: Measure, b: Any, nu: Measure) -> Measure:
    """Return a*mu + b*nu."""
    if mu.ground != nu.ground:
        raise GroundMismatch(
            f"Cannot combine measures on `{mu.ground.label}` and `{nu.ground.label}`."
        )
    a, b = rational(a), rational(b)
    atoms = [(x, a * w) for x, w in mu.atomic.weights]
    atoms += [(x, b * w) for x, w in nu.atomic.weights]
    terms = [(eta, a * c) for eta, c in mu.pfa.terms]
    terms += [(eta, b * c) for eta, c in nu.pfa.terms]
    return Measure.build(mu.ground, atoms, terms)


def scale(factor: Any, mu: Measure) -> Measure:
    return combine(factor, mu, 0, mu)


def evaluate(mu: Measure, expr: SetExpr) -> Value:
    """
    Return mu(E), or Verdict.UNDECIDED.

    The atomic part contributes the weights of its points in E, every
    filter functional its coefficient when it is one on E. An undecided
    filter makes the whole value undecided.

    """
    if mu.ground != expr.ground:
        raise GroundMismatch(
            f"Measure on `{mu.ground.label}` evaluated on `{expr.ground.label}`."
        )
    value = sum((w for x, w in mu.atomic.weights if expr.contains(x)), Fraction(0))
    for eta, coefficient in mu.pfa.terms:
        verdict = filter_eval(eta, expr)
        if verdict is Verdict.UNDECIDED:
            return Verdict.UNDECIDED
        value += coefficient * verdict.as_fraction()
    return value


def yosida_hewitt(mu: Measure) -> Tuple[Measure, Measure]:
    """Split mu into its countably additive and purely finitely additive parts."""
    ground = mu.ground
    return (
        Measure(mu.atomic, PfaCombination(ground)),
        Measure(AtomicMeasure(ground), mu.pfa),
    )


def measure_type(mu: Measure) -> MeasureType:
    if mu.is_zero:
        return MeasureType.BOTH
    if not mu.pfa:
        return MeasureType.CA
    if not mu.atomic:
        return MeasureType.PFA
    return MeasureType.MIXED


def norm(mu: Measure) -> Fraction:
    """Total mass of a nonnegative measure."""
    if not mu.is_nonnegative:
        raise SignedMeasureError("norm")
    return mu.total


def is_pfa(mu: Measure) -> bool:
    """
    A nonnegative measure is purely finitely additive iff it vanishes on points.

    The representation answers directly (no atoms); sampled singletons,
    including the anchors of the filters, are checked as well.

    """
    if not mu.is_nonnegative:
        raise SignedMeasureError("is_pfa")
    if mu.atomic:
        return False
    anchors = [eta.point for eta in mu.pfa.filters if eta.point is not None]
    candidates = sample_points(mu.ground, count=8) + anchors
    return all(evaluate(mu, points(mu.ground, x)) == 0 for x in candidates)


def filters_of(mu: Measure) -> Tuple[FilterFunctional, ...]:
    return mu.pfa.filters


def _in_class(mu: Measure, kind: MeasureClass) -> bool:
    kind = MeasureClass(kind)
    if not mu.is_nonnegative:
        return False
    if kind is MeasureClass.CA:
        return not mu.pfa
    if kind is MeasureClass.PFA:
        return not mu.atomic
    return True


def in_V(mu: Measure, kind: Union[MeasureClass, str] = MeasureClass.BA) -> bool:
    """Nonnegative measures of the given class with mu(X) <= 1."""
    return _in_class(mu, MeasureClass(kind)) and mu.total <= 1


def in_S(mu: Measure, kind: Union[MeasureClass, str] = MeasureClass.BA) -> bool:
    """Probability measures of the given class."""
    return _in_class(mu, MeasureClass(kind)) and mu.total == 1


def normalize(mu: Measure) -> Measure:
    """Scale a nonzero nonnegative measure to total mass one."""
    mass = norm(mu)
    if mass == 0:
        raise ValueError("The zero measure cannot be normalized.")
    return scale(1 / mass, mu)


def atoms_and_filters(measures: Iterable[Measure]) -> Tuple[List[Point], List[FilterFunctional]]:
    """Collect the support points and filters of several measures, in order of appearance."""
    atoms: List[Point] = []
    filters: List[FilterFunctional] = []
    for mu in measures:
        atoms.extend(x for x in mu.atomic.support if x not in atoms)
        filters.extend(eta for eta in mu.pfa.filters if eta not in filters)
    return atoms, filters
