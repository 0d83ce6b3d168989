"""
Random instances for the property suites.

Everything lives on the rationals of the unit interval: a universe of
3 to 8 atoms and 1 or 2 filter functionals. Kernel pieces are the atom
singletons and two intervals split at a random cut, so every filter of
the pool is decided on every piece and the orbit closures stay inside
the universe.

"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .kernels import CombinedKernel, Kernel, KernelKind, KernelRule, RowTemplate, make_combined
from .measures import Measure
from .sets import (
    FilterFunctional,
    GroundKind,
    GroundSpace,
    Point,
    SetExpr,
    TailFamily,
    Verdict,
    filter_eval,
    interval,
    points,
)

SEGMENT = GroundSpace(GroundKind.UNIT_INTERVAL, "[0,1]")

Q1_CHOICES = (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4))

FILTER_POOL = (
    FilterFunctional("eta0plus", SEGMENT, TailFamily.LEFT_OF_POINT, Fraction(0)),
    FilterFunctional("eta1minus", SEGMENT, TailFamily.RIGHT_OF_POINT, Fraction(1)),
    FilterFunctional("etahalfplus", SEGMENT, TailFamily.LEFT_OF_POINT, Fraction(1, 2)),
)

MEASURE_SHAPES = ("atomic", "pfa", "mixed")


@dataclass(frozen=True)
class Universe:
    ground: GroundSpace
    atoms: Tuple[Point, ...]
    filters: Tuple[FilterFunctional, ...]


def random_rational(
    rng: random.Random, low: int = 0, high: int = 1, max_denominator: int = 12
) -> Fraction:
    denominator = rng.randint(1, max_denominator)
    return Fraction(rng.randint(low * denominator, high * denominator), denominator)


def random_universe(rng: random.Random) -> Universe:
    atoms: set = set()
    size = rng.randint(3, 8)
    while len(atoms) < size:
        atoms.add(random_rational(rng))
    filters = rng.sample(FILTER_POOL, rng.randint(1, 2))
    return Universe(SEGMENT, tuple(sorted(atoms)), tuple(sorted(filters, key=lambda eta: eta.id)))


def random_weights(
    rng: random.Random, count: int, total: Fraction = Fraction(1)
) -> List[Fraction]:
    """`count` positive rationals summing to `total`."""
    raw = [rng.randint(1, 6) for _ in range(count)]
    mass = sum(raw)
    return [total * Fraction(r, mass) for r in raw]


def random_measure(
    rng: random.Random,
    universe: Universe,
    shape: Optional[str] = None,
    total: Fraction = Fraction(1),
) -> Measure:
    """A nonnegative measure of the given shape (atomic, pfa or mixed) with mass `total`."""
    shape = shape or rng.choice(MEASURE_SHAPES)
    atoms: Sequence[Point] = ()
    filters: Sequence[FilterFunctional] = ()
    if shape in ("atomic", "mixed"):
        atoms = rng.sample(universe.atoms, rng.randint(1, len(universe.atoms)))
    if shape in ("pfa", "mixed"):
        filters = rng.sample(universe.filters, rng.randint(1, len(universe.filters)))
    weights = random_weights(rng, len(atoms) + len(filters), total)
    return Measure.build(
        universe.ground,
        atoms=list(zip(atoms, weights)),
        pfa=list(zip(filters, weights[len(atoms):])),
    )


def random_pieces(rng: random.Random, universe: Universe) -> List[SetExpr]:
    """The atom singletons and [0, c), [c, 1] with the atoms removed."""
    ground = universe.ground
    cut = Fraction(rng.randint(1, 11), 12)
    singles = points(ground, *universe.atoms)
    pieces: List[SetExpr] = [points(ground, x) for x in universe.atoms]
    pieces.append(interval(ground, 0, cut, hi_closed=False) - singles)
    pieces.append(interval(ground, cut, 1) - singles)
    return pieces


def carries_filter(piece: SetExpr, universe: Universe) -> bool:
    return any(filter_eval(eta, piece) is Verdict.ONE for eta in universe.filters)


def _row(
    rng: random.Random, universe: Universe, shape: str, diagonal: Optional[bool] = None
) -> RowTemplate:
    """A row of mass one; atomic rows may put part of their mass on the diagonal."""
    if shape != "atomic":
        return RowTemplate(random_measure(rng, universe, shape))
    if diagonal is None:
        diagonal = rng.random() < 0.3
    if not diagonal:
        return RowTemplate(random_measure(rng, universe, "atomic"))
    share = Fraction(rng.randint(1, 4), 4)
    constant = random_measure(rng, universe, "atomic", 1 - share) if share < 1 else None
    template = RowTemplate.diagonal(universe.ground, share)
    return template if constant is None else template + RowTemplate(constant)


def random_kernel(rng: random.Random, universe: Universe, shape: Optional[str] = None) -> Kernel:
    """A Markov kernel whose rows are all of one shape (or of random shapes)."""
    rules = []
    for piece in random_pieces(rng, universe):
        row_shape = shape or rng.choice(MEASURE_SHAPES)
        rules.append(KernelRule(piece, _row(rng, universe, row_shape)))
    return Kernel(universe.ground, tuple(rules), KernelKind.MARKOV)


def random_combined(
    rng: random.Random, universe: Universe, condition: Optional[str] = None
) -> CombinedKernel:
    """
    A nondegenerate combined kernel, optionally built to satisfy (H1) or (H2).

    A_ca applied to a filter integrates the ca rows along its tails, which
    lie in the interval pieces. Rows there without a diagonal give (H1);
    pure diagonal rows give (H2).

    """
    pieces = random_pieces(rng, universe)
    ca_rules = []
    for piece in pieces:
        if condition is None or not carries_filter(piece, universe):
            value = _row(rng, universe, "atomic")
        elif condition == "H1":
            value = _row(rng, universe, "atomic", diagonal=False)
        elif condition == "H2":
            value = RowTemplate.diagonal(universe.ground, 1)
        else:
            raise ValueError(f"Unknown condition {condition!r}.")
        ca_rules.append(KernelRule(piece, value))
    pfa_rules = [KernelRule(piece, _row(rng, universe, "pfa")) for piece in pieces]
    return make_combined(
        rng.choice(Q1_CHOICES),
        Kernel(universe.ground, tuple(ca_rules), KernelKind.MARKOV),
        Kernel(universe.ground, tuple(pfa_rules), KernelKind.MARKOV),
    )


@dataclass(frozen=True)
class AtomicChain:
    """A finite Markov chain as a kernel together with its transition matrix."""

    kernel: Kernel
    matrix: Tuple[Tuple[Fraction, ...], ...]

    @property
    def ground(self) -> GroundSpace:
        return self.kernel.ground


def random_atomic_chain(rng: random.Random, size: Optional[int] = None) -> AtomicChain:
    """A chain on 2 to 6 labeled states with positive transition probabilities."""
    size = size or rng.randint(2, 6)
    ground = GroundSpace(GroundKind.FINITE, f"S{size}", tuple(f"s{i}" for i in range(size)))
    matrix = tuple(tuple(random_weights(rng, size)) for _ in range(size))
    rules = tuple(
        KernelRule(
            points(ground, state),
            RowTemplate(Measure.build(ground, atoms=list(zip(ground.points, row)))),
        )
        for state, row in zip(ground.points, matrix)
    )
    return AtomicChain(Kernel(ground, rules, KernelKind.MARKOV), matrix)
