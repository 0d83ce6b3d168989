"""
Finitely additive Markov kernels on discrete grounds.

A kernel is a list of rules. Each rule applies on a piece of the ground
and gives the row P(x, .) there as a `RowTemplate`: a constant measure
plus translation terms c * delta_{x+s} (the diagonal is the translation
by 0). Rows of this form integrate exactly against atoms and filter
functionals, and the class is closed under convolution.

"""
from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .measures import (
    AtomicMeasure,
    Measure,
    evaluate,
    filter_measure,
    rational,
    yosida_hewitt,
    zero_measure,
)
from .sets import (
    FilterFunctional,
    GroundKind,
    GroundMismatch,
    GroundSpace,
    Point,
    SetExpr,
    SetOp,
    Verdict,
    filter_eval,
    full,
    is_empty,
    points,
    set_ops,
    translate,
    union_all,
)

logger = logging.getLogger(__name__)


class KernelKind(str, enum.Enum):
    MARKOV = "markov"
    SUB_MARKOV = "sub-markov"


class KernelError(ValueError):
    """Raised when a kernel violates the transition-function axioms."""


class UndecidedLimit(Exception):
    """Raised when a limit along a filter cannot be decided on a kernel piece."""

    def __init__(self, filter_id: str, piece: SetExpr) -> None:
        self.filter_id = filter_id
        self.piece = piece
        super().__init__(
            f"Limit along filter `{filter_id}` is undecided on piece {piece}."
        )


@dataclass(frozen=True)
class RowTemplate:
    """The row x -> constant + sum(c * delta_{x+s}) of a kernel rule."""

    constant: Measure
    shifts: Tuple[Tuple[int, Fraction], ...] = ()

    @classmethod
    def build(
        cls, constant: Measure, shifts: Mapping[int, Any] | Iterable[Tuple[int, Any]] = ()
    ) -> RowTemplate:
        merged: Dict[int, Fraction] = {}
        items = shifts.items() if isinstance(shifts, Mapping) else shifts
        for offset, coefficient in items:
            merged[int(offset)] = merged.get(int(offset), Fraction(0)) + rational(coefficient)
        pruned = tuple(sorted((s, c) for s, c in merged.items() if c != 0))
        if constant.ground.kind is not GroundKind.INTEGERS and any(s for s, _ in pruned):
            raise KernelError(
                f"Translation terms need an integer ground, not `{constant.ground.label}`."
            )
        return cls(constant, pruned)

    @classmethod
    def diagonal(cls, ground: GroundSpace, coefficient: Any) -> RowTemplate:
        return cls.build(zero_measure(ground), {0: coefficient})

    @property
    def ground(self) -> GroundSpace:
        return self.constant.ground

    @property
    def shift_mass(self) -> Fraction:
        return sum((c for _, c in self.shifts), Fraction(0))

    @property
    def mass(self) -> Fraction:
        return self.constant.total + self.shift_mass

    @property
    def is_nonnegative(self) -> bool:
        return self.constant.is_nonnegative and all(c > 0 for _, c in self.shifts)

    @property
    def is_purely_atomic(self) -> bool:
        return not self.constant.pfa

    @property
    def is_purely_pfa(self) -> bool:
        return not self.constant.atomic and not self.shifts

    def at(self, x: Point) -> Measure:
        ground = self.ground
        moving = AtomicMeasure.build(ground, [(ground.shift(x, s), c) for s, c in self.shifts])
        return self.constant + Measure(moving, zero_measure(ground).pfa)

    def ca_part(self) -> RowTemplate:
        return RowTemplate(yosida_hewitt(self.constant)[0], self.shifts)

    def pfa_part(self) -> RowTemplate:
        return RowTemplate(yosida_hewitt(self.constant)[1])

    def scaled(self, factor: Any) -> RowTemplate:
        factor = rational(factor)
        return RowTemplate.build(
            factor * self.constant, [(s, factor * c) for s, c in self.shifts]
        )

    def shifted(self, offset: int) -> RowTemplate:
        return RowTemplate.build(self.constant, [(s + offset, c) for s, c in self.shifts])

    def __add__(self, other: RowTemplate) -> RowTemplate:
        return RowTemplate.build(self.constant + other.constant, self.shifts + other.shifts)


@dataclass(frozen=True)
class KernelRule:
    piece: SetExpr
    value: RowTemplate

    def __post_init__(self) -> None:
        if self.piece.ground != self.value.ground:
            raise GroundMismatch("Rule piece and value live on different grounds.")


@dataclass(frozen=True)
class Kernel:
    """A rule-based transition function; `kind` is the declared kind, if any."""

    ground: GroundSpace
    rules: Tuple[KernelRule, ...]
    kind: Optional[KernelKind] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.kind is not None:
            object.__setattr__(self, "kind", KernelKind(self.kind))
        for rule in self.rules:
            if rule.piece.ground != self.ground:
                raise GroundMismatch(f"Rule piece {rule.piece} is not on `{self.ground.label}`.")

    def rule_for(self, x: Any) -> KernelRule:
        point = self.ground.point(x)
        for rule in self.rules:
            if rule.piece.contains(point):
                return rule
        raise KernelError(f"No rule of the kernel applies at {point}.")

    def row(self, x: Any) -> Measure:
        """The measure P(x, .)."""
        point = self.ground.point(x)
        return self.rule_for(point).value.at(point)

    @property
    def filters(self) -> Tuple[FilterFunctional, ...]:
        found: Dict[str, FilterFunctional] = {}
        for rule in self.rules:
            for eta in rule.value.constant.pfa.filters:
                found.setdefault(eta.id, eta)
        return tuple(found[key] for key in sorted(found))

    @property
    def atoms(self) -> Tuple[Point, ...]:
        found: List[Point] = []
        for rule in self.rules:
            found.extend(x for x in rule.value.constant.atomic.support if x not in found)
        return tuple(sorted(found, key=self.ground.key))


def zero_kernel(ground: GroundSpace) -> Kernel:
    return Kernel(ground, (KernelRule(full(ground), RowTemplate(zero_measure(ground))),))


def _coalesce(ground: GroundSpace, rules: Iterable[KernelRule]) -> Tuple[KernelRule, ...]:
    """Merge rules with equal values by joining their pieces."""
    grouped: Dict[RowTemplate, List[SetExpr]] = {}
    for rule in rules:
        grouped.setdefault(rule.value, []).append(rule.piece)
    return tuple(
        KernelRule(union_all(ground, pieces), value) for value, pieces in grouped.items()
    )


def validate(kernel: Kernel) -> KernelKind:
    """
    Check the kernel axioms and classify the kernel.

    Coefficients must be nonnegative, every row mass at most one, and the
    pieces must partition the ground (checked on the normal form of the
    pieces). A kernel declared markov must have row mass one everywhere.

    """
    masses = []
    for rule in kernel.rules:
        if not rule.value.is_nonnegative:
            raise KernelError(f"Negative coefficient on piece {rule.piece}.")
        if rule.value.mass > 1:
            raise KernelError(f"Row mass {rule.value.mass} > 1 on piece {rule.piece}.")
        masses.append(rule.value.mass)
    for first, second in itertools.combinations(kernel.rules, 2):
        if not is_empty(set_ops(first.piece, second.piece, SetOp.INTERSECTION)):
            raise KernelError(f"Pieces {first.piece} and {second.piece} overlap.")
    pieces = union_all(kernel.ground, (rule.piece for rule in kernel.rules))
    if not is_empty(set_ops(pieces, None, SetOp.COMPLEMENT)):
        raise KernelError(f"Pieces do not cover the ground `{kernel.ground.label}`.")
    kind = KernelKind.MARKOV if all(m == 1 for m in masses) else KernelKind.SUB_MARKOV
    if kernel.kind is KernelKind.MARKOV and kind is not KernelKind.MARKOV:
        raise KernelError("Kernel declared markov has a row with mass below one.")
    return kind


def decompose_kernel(kernel: Kernel) -> Tuple[Kernel, Kernel]:
    """Split a kernel into its countably additive and purely finitely additive parts."""
    ground = kernel.ground
    ca_rules = _coalesce(
        ground, (KernelRule(r.piece, r.value.ca_part()) for r in kernel.rules)
    )
    pfa_rules = _coalesce(
        ground, (KernelRule(r.piece, r.value.pfa_part()) for r in kernel.rules)
    )
    return Kernel(ground, ca_rules), Kernel(ground, pfa_rules)


def scale_kernel(factor: Any, kernel: Kernel) -> Kernel:
    return Kernel(
        kernel.ground,
        _coalesce(
            kernel.ground,
            (KernelRule(r.piece, r.value.scaled(factor)) for r in kernel.rules),
        ),
    )


def add_kernels(first: Kernel, second: Kernel) -> Kernel:
    """Row-wise sum over the common refinement of the pieces."""
    if first.ground != second.ground:
        raise GroundMismatch("Cannot add kernels on different grounds.")
    ground = first.ground
    rules = []
    for left, right in itertools.product(first.rules, second.rules):
        piece = set_ops(left.piece, right.piece, SetOp.INTERSECTION)
        if not is_empty(piece):
            rules.append(KernelRule(piece, left.value + right.value))
    return Kernel(ground, _coalesce(ground, rules))


def kernels_equal(first: Kernel, second: Kernel) -> bool:
    """Row-wise equality of two kernels, decided on the common refinement."""
    if first.ground != second.ground:
        return False
    for left, right in itertools.product(first.rules, second.rules):
        if left.value == right.value:
            continue
        if not is_empty(set_ops(left.piece, right.piece, SetOp.INTERSECTION)):
            return False
    return True


@dataclass(frozen=True)
class CombinedKernel:
    """
    A kernel whose ca and pfa parts have constant masses q1 and q2.

    `ca_part` and `pfa_part` are the sub-Markov components (row masses q1
    and q2), `kernel` is their sum.

    """

    q1: Fraction
    q2: Fraction
    ca_part: Kernel
    pfa_part: Kernel

    def __post_init__(self) -> None:
        object.__setattr__(self, "q1", rational(self.q1))
        object.__setattr__(self, "q2", rational(self.q2))
        if not (0 <= self.q1 <= 1 and 0 <= self.q2 <= 1) or self.q1 + self.q2 != 1:
            raise KernelError(f"Invalid masses q1={self.q1}, q2={self.q2}.")

    @property
    def ground(self) -> GroundSpace:
        return self.ca_part.ground

    @property
    def nondegenerate(self) -> bool:
        return 0 < self.q1 < 1

    @cached_property
    def kernel(self) -> Kernel:
        return add_kernels(self.ca_part, self.pfa_part)

    def normalized(self) -> Tuple[Optional[Kernel], Optional[Kernel]]:
        """The probability kernels P_ca / q1 and P_pfa / q2 (None for a zero part)."""
        return (
            scale_kernel(1 / self.q1, self.ca_part) if self.q1 else None,
            scale_kernel(1 / self.q2, self.pfa_part) if self.q2 else None,
        )


def make_combined(q1: Any, kca: Optional[Kernel], kpfa: Optional[Kernel]) -> CombinedKernel:
    """
    Build q1 * kca + (1 - q1) * kpfa from a purely atomic and a purely pfa Markov kernel.

    A part may be None when its weight is zero (a degenerate chain).

    """
    q1 = rational(q1)
    if not 0 <= q1 <= 1:
        raise KernelError(f"q1 must lie in [0, 1], not {q1}.")
    present = [part for part in (kca, kpfa) if part is not None]
    if not present:
        raise KernelError("A combined kernel needs at least one part.")
    ground = present[0].ground
    if any(part.ground != ground for part in present):
        raise GroundMismatch("Combined kernel parts live on different grounds.")
    for part, weight, name, check in (
        (kca, q1, "ca", lambda v: v.is_purely_atomic),
        (kpfa, 1 - q1, "pfa", lambda v: v.is_purely_pfa),
    ):
        if part is None:
            if weight:
                raise KernelError(f"The {name} part is missing but has weight {weight}.")
            continue
        if validate(part) is not KernelKind.MARKOV:
            raise KernelError(f"The {name} part must have rows of mass one.")
        for rule in part.rules:
            if not check(rule.value):
                raise KernelError(f"The {name} part has a row of the wrong type on {rule.piece}.")
    return CombinedKernel(
        q1,
        1 - q1,
        scale_kernel(q1, kca) if kca is not None else zero_kernel(ground),
        scale_kernel(1 - q1, kpfa) if kpfa is not None else zero_kernel(ground),
    )


def _constant_mass(kernel: Kernel, name: str) -> Fraction:
    masses = {r.value.mass for r in kernel.rules if not is_empty(r.piece)}
    if len(masses) != 1:
        raise KernelError(f"The {name} row mass is not constant in x: {sorted(masses)}.")
    return masses.pop()


def combined_from_kernel(kernel: Kernel) -> CombinedKernel:
    """Recognise a Markov kernel with constant ca/pfa row masses as a combined kernel."""
    ca_part, pfa_part = decompose_kernel(kernel)
    q1 = _constant_mass(ca_part, "ca")
    q2 = _constant_mass(pfa_part, "pfa")
    return CombinedKernel(q1, q2, ca_part, pfa_part)


@lru_cache(maxsize=4096)
def limit_rule(kernel: Kernel, eta: FilterFunctional) -> KernelRule:
    """The rule whose piece carries the tails of eta."""
    for rule in kernel.rules:
        verdict = filter_eval(eta, rule.piece)
        if verdict is Verdict.UNDECIDED:
            raise UndecidedLimit(eta.id, rule.piece)
        if verdict is Verdict.ONE:
            return rule
    raise KernelError(f"No piece of the kernel carries the tails of `{eta.id}`.")


def limit_row(kernel: Kernel, eta: FilterFunctional) -> Measure:
    """
    Integrate the kernel against eta: the limit of P(x, .) along eta's tails.

    The constant part of the carrying rule passes through; translation
    terms integrate to eta itself, since tails are stable under the
    translations the grounds admit.

    """
    value = limit_rule(kernel, eta).value
    return value.constant + filter_measure(eta, value.shift_mass)


def integrate(kernel: Kernel, mu: Measure) -> Measure:
    """Return the measure E -> integral of P(x, E) mu(dx)."""
    if kernel.ground != mu.ground:
        raise GroundMismatch("Kernel and measure live on different grounds.")
    result = zero_measure(kernel.ground)
    for x, weight in mu.atomic.weights:
        result = result + weight * kernel.row(x)
    for eta, coefficient in mu.pfa.terms:
        result = result + coefficient * limit_row(kernel, eta)
    return result


def convolve(first: Kernel, second: Kernel) -> Kernel:
    """
    Return the kernel (x, E) -> integral of second(y, E) first(x, dy).

    The constant part of each rule of `first` integrates to a constant.
    A translation term c * delta_{x+s} picks the row of `second` at x + s,
    so the rule's piece is refined by the translated pieces of `second`.

    """
    if first.ground != second.ground:
        raise GroundMismatch("Cannot convolve kernels on different grounds.")
    ground = first.ground
    rules: List[KernelRule] = []
    for rule in first.rules:
        base = RowTemplate(integrate(second, rule.value.constant))
        if not rule.value.shifts:
            rules.append(KernelRule(rule.piece, base))
            continue
        for choice in itertools.product(second.rules, repeat=len(rule.value.shifts)):
            piece = rule.piece
            value = base
            for (offset, coefficient), target in zip(rule.value.shifts, choice):
                piece = set_ops(piece, translate(target.piece, offset), SetOp.INTERSECTION)
                value = value + target.value.shifted(offset).scaled(coefficient)
            if not is_empty(piece):
                rules.append(KernelRule(piece, value))
    return Kernel(ground, _coalesce(ground, rules))


def kernel_power(kernel: Kernel, n: int) -> Kernel:
    """The n-fold convolution P^n (n >= 1)."""
    if n < 1:
        raise ValueError(f"Kernel powers start at 1, not {n}.")
    return reduce(lambda acc, _: convolve(acc, kernel), range(n - 1), kernel)


def kernel_power_singletons(
    kernel: Kernel, n: int, pairs: Sequence[Tuple[Any, Any]]
) -> List[Tuple[Point, Point, Fraction]]:
    """Exact values P^n(x, {y}) for the requested pairs."""
    power = kernel_power(kernel, n)
    table = []
    for x, y in pairs:
        value = evaluate(power.row(x), points(kernel.ground, y))
        if isinstance(value, Verdict):
            # singletons are always decided; kept for type narrowing
            raise KernelError(f"P^{n}({x}, {{{y}}}) is undecided.")
        table.append((kernel.ground.point(x), kernel.ground.point(y), value))
    return table


@dataclass(frozen=True)
class AtomicSupport:
    """The atoms D(x) of a row with weights alpha_n(x)."""

    x: Point
    atoms: AtomicMeasure

    @property
    def total(self) -> Fraction:
        return self.atoms.total

    @property
    def purely_pfa(self) -> bool:
        return not self.atoms


def row_atomic_support(kernel: Kernel, x: Any) -> AtomicSupport:
    point = kernel.ground.point(x)
    return AtomicSupport(point, kernel.row(point).atomic)
