"""
Decidable set algebra over discrete ground spaces.

Sets are expression trees over intervals, finite point sets and (on the
integers) residue classes. Every expression has a normal form, the
`Profile`, from which emptiness, finiteness and inclusion are decided
exactly. Filter functionals are evaluated on the same normal form: the
germ of a set along a tail family is a periodic membership pattern, and
the functional is decided exactly when that pattern is constant.

"""
from __future__ import annotations

import enum
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Any, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

logger = logging.getLogger(__name__)

Point = Union[Fraction, int, str]


class GroundMismatch(ValueError):
    """Raised when a point or an operand does not belong to the expected ground."""


class InvalidSetExpr(ValueError):
    """Raised for expressions that are not defined on their ground."""


class InvalidFilter(ValueError):
    """Raised for tail families that do not define a filter functional."""


class GroundKind(str, enum.Enum):
    UNIT_INTERVAL = "unit-interval-rationals"
    INTEGERS = "integers"
    FINITE = "finite-labeled-set"


class Verdict(str, enum.Enum):
    """Value of a filter functional on a set."""

    ZERO = "zero"
    ONE = "one"
    UNDECIDED = "undecided"

    def as_fraction(self) -> Fraction:
        if self is Verdict.UNDECIDED:
            raise ValueError("An undecided verdict has no numeric value.")
        return Fraction(1) if self is Verdict.ONE else Fraction(0)


class SetOp(str, enum.Enum):
    UNION = "union"
    INTERSECTION = "intersection"
    COMPLEMENT = "complement"
    DIFFERENCE = "difference"


@dataclass(frozen=True)
class GroundSpace:
    """
    A totally ordered discrete ground space.

    Points of the unit interval are exact rationals in [0, 1], points of
    the integers are ints, and a finite labeled set enumerates its points
    (their order is the enumeration order).

    """

    kind: GroundKind
    label: str
    points: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GroundKind(self.kind))
        object.__setattr__(self, "points", tuple(self.points))
        if self.kind is GroundKind.FINITE:
            if not self.points:
                raise InvalidSetExpr(f"Finite ground `{self.label}` has no points.")
            if len(set(self.points)) != len(self.points):
                raise InvalidSetExpr(f"Finite ground `{self.label}` repeats a point.")
        elif self.points:
            raise InvalidSetExpr(
                f"Only finite grounds enumerate their points (`{self.label}`)."
            )

    @property
    def is_finite(self) -> bool:
        return self.kind is GroundKind.FINITE

    def point(self, value: Any) -> Point:
        """Coerce a value to a point of this ground, or raise GroundMismatch."""
        if self.kind is GroundKind.FINITE:
            if isinstance(value, str) and value in self.points:
                return value
        elif not isinstance(value, (bool, float)):
            try:
                number: Optional[Fraction] = Fraction(value)
            except (TypeError, ValueError):
                number = None
            if number is not None:
                if self.kind is GroundKind.INTEGERS and number.denominator == 1:
                    return int(number)
                if self.kind is GroundKind.UNIT_INTERVAL and 0 <= number <= 1:
                    return number
        raise GroundMismatch(f"{value!r} is not a point of ground `{self.label}`.")

    def key(self, x: Point) -> Any:
        """Sort key of a point (its position for finite grounds)."""
        if self.kind is GroundKind.FINITE:
            return self.points.index(x)  # type: ignore
        return x

    def shift(self, x: Point, offset: int) -> Point:
        """Return x + offset; only the integers are closed under translation."""
        if offset == 0:
            return x
        if self.kind is not GroundKind.INTEGERS:
            raise InvalidSetExpr(f"Ground `{self.label}` has no translations.")
        return int(x) + offset  # type: ignore


def _same_ground(*exprs: SetExpr) -> GroundSpace:
    ground = exprs[0].ground
    for expr in exprs[1:]:
        if expr.ground != ground:
            raise GroundMismatch(
                f"Ground space mismatch: `{ground.label}` vs `{expr.ground.label}`."
            )
    return ground


@dataclass(frozen=True)
class SetExpr:
    """Base class of all set expressions over a ground."""

    ground: GroundSpace

    def contains(self, x: Point) -> bool:
        raise NotImplementedError

    def breakpoints(self) -> Iterator[Point]:
        return iter(())

    def moduli(self) -> Iterator[int]:
        return iter(())

    def __or__(self, other: SetExpr) -> SetExpr:
        return set_ops(self, other, SetOp.UNION)

    def __and__(self, other: SetExpr) -> SetExpr:
        return set_ops(self, other, SetOp.INTERSECTION)

    def __sub__(self, other: SetExpr) -> SetExpr:
        return set_ops(self, other, SetOp.DIFFERENCE)

    def __invert__(self) -> SetExpr:
        return set_ops(self, None, SetOp.COMPLEMENT)


@dataclass(frozen=True)
class Empty(SetExpr):
    def contains(self, x: Point) -> bool:
        return False

    def __str__(self) -> str:
        return "{}"


@dataclass(frozen=True)
class Full(SetExpr):
    def contains(self, x: Point) -> bool:
        return True

    def __str__(self) -> str:
        return self.ground.label


@dataclass(frozen=True)
class Interval(SetExpr):
    """Interval between two points; `None` bounds are only valid on the integers."""

    lo: Optional[Point]
    hi: Optional[Point]
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self) -> None:
        unbounded = self.lo is None or self.hi is None
        if unbounded and self.ground.kind is not GroundKind.INTEGERS:
            raise InvalidSetExpr("Unbounded intervals are only defined on the integers.")
        for name in ("lo", "hi"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, self.ground.point(value))

    def contains(self, x: Point) -> bool:
        key = self.ground.key(x)
        if self.lo is not None:
            lo = self.ground.key(self.lo)
            if key < lo or (key == lo and not self.lo_closed):
                return False
        if self.hi is not None:
            hi = self.ground.key(self.hi)
            if key > hi or (key == hi and not self.hi_closed):
                return False
        return True

    def breakpoints(self) -> Iterator[Point]:
        for bound in (self.lo, self.hi):
            if bound is not None:
                yield bound

    def __str__(self) -> str:
        left = "[" if self.lo_closed and self.lo is not None else "("
        right = "]" if self.hi_closed and self.hi is not None else ")"
        lo = "-inf" if self.lo is None else str(self.lo)
        hi = "inf" if self.hi is None else str(self.hi)
        return f"{left}{lo}, {hi}{right}"


@dataclass(frozen=True)
class Points(SetExpr):
    points: FrozenSet[Point] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "points", frozenset(self.ground.point(p) for p in self.points)
        )

    def contains(self, x: Point) -> bool:
        return x in self.points

    def breakpoints(self) -> Iterator[Point]:
        return iter(self.points)

    def __str__(self) -> str:
        ordered = sorted(self.points, key=self.ground.key)
        return "{" + ", ".join(str(p) for p in ordered) + "}"


@dataclass(frozen=True)
class Residue(SetExpr):
    modulus: int
    residue: int

    def __post_init__(self) -> None:
        if self.ground.kind is not GroundKind.INTEGERS:
            raise InvalidSetExpr("Residue classes are only defined on the integers.")
        if self.modulus < 1:
            raise InvalidSetExpr(f"Residue modulus must be positive, not {self.modulus}.")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    def contains(self, x: Point) -> bool:
        return int(x) % self.modulus == self.residue  # type: ignore

    def moduli(self) -> Iterator[int]:
        yield self.modulus

    def __str__(self) -> str:
        return f"{self.modulus}Z+{self.residue}"


@dataclass(frozen=True)
class SetUnion(SetExpr):
    args: Tuple[SetExpr, ...] = ()

    def __post_init__(self) -> None:
        _same_ground(self, *self.args)

    def contains(self, x: Point) -> bool:
        return any(arg.contains(x) for arg in self.args)

    def breakpoints(self) -> Iterator[Point]:
        for arg in self.args:
            yield from arg.breakpoints()

    def moduli(self) -> Iterator[int]:
        for arg in self.args:
            yield from arg.moduli()

    def __str__(self) -> str:
        return "(" + " | ".join(str(arg) for arg in self.args) + ")"


@dataclass(frozen=True)
class SetIntersection(SetExpr):
    args: Tuple[SetExpr, ...] = ()

    def __post_init__(self) -> None:
        _same_ground(self, *self.args)

    def contains(self, x: Point) -> bool:
        return all(arg.contains(x) for arg in self.args)

    def breakpoints(self) -> Iterator[Point]:
        for arg in self.args:
            yield from arg.breakpoints()

    def moduli(self) -> Iterator[int]:
        for arg in self.args:
            yield from arg.moduli()

    def __str__(self) -> str:
        return "(" + " & ".join(str(arg) for arg in self.args) + ")"


@dataclass(frozen=True)
class SetComplement(SetExpr):
    arg: Optional[SetExpr] = None

    def __post_init__(self) -> None:
        if self.arg is None:
            raise InvalidSetExpr("Complement needs an argument.")
        _same_ground(self, self.arg)

    def contains(self, x: Point) -> bool:
        return not self.arg.contains(x)  # type: ignore

    def breakpoints(self) -> Iterator[Point]:
        return self.arg.breakpoints()  # type: ignore

    def moduli(self) -> Iterator[int]:
        return self.arg.moduli()  # type: ignore

    def __str__(self) -> str:
        return f"~{self.arg}"


def empty(ground: GroundSpace) -> SetExpr:
    return Empty(ground)


def full(ground: GroundSpace) -> SetExpr:
    return Full(ground)


def interval(
    ground: GroundSpace,
    lo: Any,
    hi: Any,
    *,
    lo_closed: bool = True,
    hi_closed: bool = True,
) -> SetExpr:
    return Interval(ground, lo, hi, lo_closed, hi_closed)


def points(ground: GroundSpace, *values: Any) -> SetExpr:
    return Points(ground, frozenset(values))


def residue_class(ground: GroundSpace, modulus: int, residue: int) -> SetExpr:
    return Residue(ground, modulus, residue)


def member(x: Any, expr: SetExpr) -> bool:
    """Return True iff x belongs to expr; x must be a point of expr's ground."""
    return expr.contains(expr.ground.point(x))


def set_ops(left: SetExpr, right: Optional[SetExpr], op: SetOp) -> SetExpr:
    """Combine expressions; trivial cases are folded, nested nodes flattened."""
    op = SetOp(op)
    ground = left.ground
    if op is SetOp.COMPLEMENT:
        if isinstance(left, Full):
            return Empty(ground)
        if isinstance(left, Empty):
            return Full(ground)
        if isinstance(left, SetComplement):
            return left.arg  # type: ignore
        return SetComplement(ground, left)
    if right is None:
        raise InvalidSetExpr(f"`{op.value}` needs two operands.")
    _same_ground(left, right)
    if op is SetOp.DIFFERENCE:
        return set_ops(left, set_ops(right, None, SetOp.COMPLEMENT), SetOp.INTERSECTION)
    if op is SetOp.UNION:
        absorbing, neutral, node = Full, Empty, SetUnion
    else:
        absorbing, neutral, node = Empty, Full, SetIntersection  # type: ignore
    if isinstance(left, absorbing) or isinstance(right, absorbing):
        return absorbing(ground)
    args: List[SetExpr] = []
    for operand in (left, right):
        if isinstance(operand, neutral):
            continue
        nested = operand.args if isinstance(operand, node) else (operand,)  # type: ignore
        args.extend(arg for arg in nested if arg not in args)
    if not args:
        return neutral(ground)
    if len(args) == 1:
        return args[0]
    return node(ground, tuple(args))


def union_all(ground: GroundSpace, exprs: Iterable[SetExpr]) -> SetExpr:
    return reduce(lambda a, b: set_ops(a, b, SetOp.UNION), exprs, empty(ground))


def translate(expr: SetExpr, offset: int) -> SetExpr:
    """Return {x : x + offset in expr} (integer grounds only for nonzero offsets)."""
    if offset == 0:
        return expr
    ground = expr.ground
    if ground.kind is not GroundKind.INTEGERS:
        raise InvalidSetExpr(f"Ground `{ground.label}` has no translations.")
    if isinstance(expr, (Empty, Full)):
        return expr
    if isinstance(expr, Interval):
        lo = None if expr.lo is None else int(expr.lo) - offset  # type: ignore
        hi = None if expr.hi is None else int(expr.hi) - offset  # type: ignore
        return Interval(ground, lo, hi, expr.lo_closed, expr.hi_closed)
    if isinstance(expr, Points):
        return Points(ground, frozenset(int(p) - offset for p in expr.points))  # type: ignore
    if isinstance(expr, Residue):
        return Residue(ground, expr.modulus, expr.residue - offset)
    if isinstance(expr, SetComplement):
        return SetComplement(ground, translate(expr.arg, offset))  # type: ignore
    if isinstance(expr, (SetUnion, SetIntersection)):
        return type(expr)(ground, tuple(translate(arg, offset) for arg in expr.args))
    raise InvalidSetExpr(f"Cannot translate {expr!r}.")


@dataclass(frozen=True)
class Profile:
    """
    Normal form of a set expression.

    `breakpoints` are sorted, `at_points[i]` is the membership of
    `breakpoints[i]`, and `gaps[i]` lists the residues (mod `modulus`) of
    the member points strictly between `breakpoints[i - 1]` and
    `breakpoints[i]`; the first and last gaps are unbounded. Inside a gap,
    membership only depends on the residue of the point.

    """

    ground: GroundSpace
    breakpoints: Tuple[Point, ...]
    at_points: Tuple[bool, ...]
    gaps: Tuple[FrozenSet[int], ...]
    modulus: int


def _gap_pattern(
    expr: SetExpr, lower: Optional[Point], upper: Optional[Point], modulus: int
) -> FrozenSet[int]:
    if expr.ground.kind is GroundKind.UNIT_INTERVAL:
        if lower is None or upper is None:
            return frozenset()
        midpoint = (lower + upper) / 2  # type: ignore
        return frozenset({0}) if expr.contains(midpoint) else frozenset()
    if lower is None and upper is None:
        start, count = 0, modulus
    elif lower is None:
        start, count = int(upper) - modulus, modulus  # type: ignore
    elif upper is None:
        start, count = int(lower) + 1, modulus  # type: ignore
    else:
        start = int(lower) + 1  # type: ignore
        count = min(modulus, int(upper) - start)  # type: ignore
    return frozenset(
        x % modulus for x in range(start, start + max(count, 0)) if expr.contains(x)
    )


def profile(expr: SetExpr, extra: Iterable[Any] = ()) -> Profile:
    """Compute the normal form of expr, splitting additionally at `extra` points."""
    ground = expr.ground
    if ground.is_finite:
        ordered: List[Point] = list(ground.points)
        return Profile(
            ground,
            tuple(ordered),
            tuple(expr.contains(x) for x in ordered),
            tuple(frozenset() for _ in range(len(ordered) + 1)),
            1,
        )
    cuts = set(expr.breakpoints()) | {ground.point(x) for x in extra}
    if ground.kind is GroundKind.UNIT_INTERVAL:
        cuts |= {Fraction(0), Fraction(1)}
    ordered = sorted(cuts, key=ground.key)
    modulus = reduce(lambda a, b: a * b // math.gcd(a, b), expr.moduli(), 1)
    bounds: List[Optional[Point]] = [None, *ordered, None]
    gaps = tuple(
        _gap_pattern(expr, lower, upper, modulus)
        for lower, upper in zip(bounds[:-1], bounds[1:])
    )
    return Profile(
        ground, tuple(ordered), tuple(expr.contains(x) for x in ordered), gaps, modulus
    )


def is_empty(expr: SetExpr) -> bool:
    shape = profile(expr)
    return not any(shape.at_points) and not any(shape.gaps)


def is_finite(expr: SetExpr) -> bool:
    if expr.ground.is_finite:
        return True
    shape = profile(expr)
    if expr.ground.kind is GroundKind.UNIT_INTERVAL:
        return not any(shape.gaps)
    return not shape.gaps[0] and not shape.gaps[-1]


def is_subset(left: SetExpr, right: SetExpr) -> bool:
    return is_empty(set_ops(left, right, SetOp.DIFFERENCE))


def equivalent(left: SetExpr, right: SetExpr) -> bool:
    return is_subset(left, right) and is_subset(right, left)


class TailFamily(str, enum.Enum):
    LEFT_OF_POINT = "left-of-point"
    RIGHT_OF_POINT = "right-of-point"
    GEQ_THRESHOLD = "geq-threshold"
    LEQ_THRESHOLD = "leq-threshold"


_POINT_FAMILIES = (TailFamily.LEFT_OF_POINT, TailFamily.RIGHT_OF_POINT)
_SAMPLED_TAILS = (1, 2, 3, 5, 8)


@dataclass(frozen=True)
class FilterFunctional:
    """
    A {0,1}-valued purely finitely additive functional given by its tails.

    `left-of-point p` has tails (p, p + 1/k), `right-of-point p` has tails
    (p - 1/k, p), `geq-threshold` has tails {n >= k} and `leq-threshold`
    has tails {n <= -k}. The functional is one on sets containing a tail up
    to finitely many points, zero on sets meeting a tail in finitely many
    points, and undecided elsewhere.

    """

    id: str  # noqa: A003
    ground: GroundSpace
    family: TailFamily
    point: Optional[Fraction] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", TailFamily(self.family))
        kind = self.ground.kind
        if kind is GroundKind.FINITE:
            raise InvalidFilter(f"Filter `{self.id}`: tails on a finite ground are finite.")
        if self.family in _POINT_FAMILIES:
            if kind is not GroundKind.UNIT_INTERVAL or self.point is None:
                raise InvalidFilter(
                    f"Filter `{self.id}`: `{self.family.value}` needs a point "
                    "of the unit interval."
                )
            point = self.ground.point(self.point)
            object.__setattr__(self, "point", point)
            if (self.family is TailFamily.LEFT_OF_POINT and point == 1) or (
                self.family is TailFamily.RIGHT_OF_POINT and point == 0
            ):
                raise InvalidFilter(f"Filter `{self.id}`: tails at {point} are empty.")
        elif kind is not GroundKind.INTEGERS or self.point is not None:
            raise InvalidFilter(
                f"Filter `{self.id}`: `{self.family.value}` is an integer threshold family."
            )
        for k in _SAMPLED_TAILS:
            current, following = self.tail(k), self.tail(k + 1)
            if is_finite(current):
                raise InvalidFilter(f"Filter `{self.id}`: tail {k} is finite.")
            if not is_subset(following, current):
                raise InvalidFilter(f"Filter `{self.id}`: tails are not decreasing at {k}.")

    def tail(self, k: int) -> SetExpr:
        """Return the tail T_k (k >= 1)."""
        if k < 1:
            raise ValueError("Tails are indexed from 1.")
        step = Fraction(1, k)
        if self.family is TailFamily.LEFT_OF_POINT:
            end = self.point + step  # type: ignore
            return interval(
                self.ground, self.point, min(end, 1), lo_closed=False, hi_closed=end > 1
            )
        if self.family is TailFamily.RIGHT_OF_POINT:
            start = self.point - step  # type: ignore
            return interval(
                self.ground, max(start, 0), self.point, lo_closed=start < 0, hi_closed=False
            )
        if self.family is TailFamily.GEQ_THRESHOLD:
            return interval(self.ground, k, None)
        return interval(self.ground, None, -k)

    def __str__(self) -> str:
        return self.id


def germ(eta: FilterFunctional, expr: SetExpr) -> Tuple[int, FrozenSet[int]]:
    """Return the eventual membership pattern of expr along eta's tails."""
    if eta.family in _POINT_FAMILIES:
        shape = profile(expr, extra=(eta.point,))
        index = shape.breakpoints.index(eta.point)  # type: ignore
        if eta.family is TailFamily.LEFT_OF_POINT:
            return shape.modulus, shape.gaps[index + 1]
        return shape.modulus, shape.gaps[index]
    shape = profile(expr)
    if eta.family is TailFamily.GEQ_THRESHOLD:
        return shape.modulus, shape.gaps[-1]
    return shape.modulus, shape.gaps[0]


def filter_eval(eta: FilterFunctional, expr: SetExpr) -> Verdict:
    """Evaluate a filter functional on a set: ONE, ZERO or UNDECIDED."""
    if eta.ground != expr.ground:
        raise GroundMismatch(
            f"Filter `{eta.id}` lives on `{eta.ground.label}`, "
            f"not `{expr.ground.label}`."
        )
    modulus, pattern = germ(eta, expr)
    if not pattern:
        return Verdict.ZERO
    if len(pattern) == modulus:
        return Verdict.ONE
    return Verdict.UNDECIDED


def sample_points(
    ground: GroundSpace,
    rng: Optional[random.Random] = None,
    count: int = 16,
    exprs: Iterable[SetExpr] = (),
) -> List[Point]:
    """
    Representative points for extensional cross-checks.

    Breakpoints of the given expressions and the midpoints of the gaps
    between them are always included, topped up with `count` random points.

    """
    if ground.is_finite:
        return list(ground.points)
    rng = rng or random.Random(0)
    cuts = set()
    for expr in exprs:
        cuts |= set(expr.breakpoints())
    chosen = set(cuts)
    if ground.kind is GroundKind.UNIT_INTERVAL:
        ordered = sorted(cuts | {Fraction(0), Fraction(1)})
        chosen |= {Fraction(0), Fraction(1)}
        chosen |= {(a + b) / 2 for a, b in zip(ordered, ordered[1:])}
        for _ in range(count):
            denominator = rng.randint(1, 24)
            chosen.add(Fraction(rng.randint(0, denominator), denominator))
    else:
        chosen |= {int(x) + d for x in cuts for d in (-1, 1)}  # type: ignore
        chosen |= {-1000, 1000}
        for _ in range(count):
            chosen.add(rng.randint(-60, 60))
    return sorted(chosen, key=ground.key)
