"""
Markov operators on finitely additive measures.

`MarkovOperator` wraps a kernel (or a combined kernel) and exposes the
operator A together with its components A_ca and A_pfa, generated by the
two parts of the kernel decomposition.

"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, List, Optional, Tuple, Union

from . import settings
from .kernels import (
    CombinedKernel,
    Kernel,
    KernelError,
    KernelKind,
    UndecidedLimit,
    combined_from_kernel,
    decompose_kernel,
    integrate,
    validate,
)
from .measures import Measure, filter_measure, in_S, norm, yosida_hewitt
from .sets import FilterFunctional, GroundSpace

logger = logging.getLogger(__name__)


class Part(str, enum.Enum):
    CA = "ca"
    PFA = "pfa"


class HStatus(str, enum.Enum):
    HOLDS = "holds-on-basis"
    FAILS = "fails"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class HVerdict:
    """Verdict of (H1) or (H2) on the registered filter basis."""

    condition: str
    status: HStatus
    witness: Optional[FilterFunctional] = None
    image: Optional[Measure] = None
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.status is HStatus.HOLDS


class MarkovOperator:
    """
    The operator mu -> integral of P(x, .) mu(dx).

    The kernel is validated on construction. The filter basis used by the
    (H1)/(H2) checks is the union of the filters passed in and those the
    kernel mentions.

    """

    def __init__(
        self,
        kernel: Union[Kernel, CombinedKernel],
        basis: Iterable[FilterFunctional] = (),
    ) -> None:
        if isinstance(kernel, CombinedKernel):
            self.combined: Optional[CombinedKernel] = kernel
            self.kernel = kernel.kernel
        else:
            self.combined = None
            self.kernel = kernel
        self.kind: KernelKind = validate(self.kernel)
        found = {eta.id: eta for eta in basis}
        for eta in self.kernel.filters:
            found.setdefault(eta.id, eta)
        self.basis: Tuple[FilterFunctional, ...] = tuple(found[key] for key in sorted(found))

    @property
    def ground(self) -> GroundSpace:
        return self.kernel.ground

    @cached_property
    def split(self) -> Tuple[Kernel, Kernel]:
        """The kernels generating A_ca and A_pfa."""
        if self.combined is not None:
            return self.combined.ca_part, self.combined.pfa_part
        return decompose_kernel(self.kernel)

    @cached_property
    def combined_view(self) -> Optional[CombinedKernel]:
        """The kernel as a combined kernel, when its component masses are constant."""
        if self.combined is not None:
            return self.combined
        try:
            return combined_from_kernel(self.kernel)
        except KernelError:
            return None

    @property
    def q1(self) -> Optional[Fraction]:
        view = self.combined_view
        return None if view is None else view.q1

    @property
    def q2(self) -> Optional[Fraction]:
        view = self.combined_view
        return None if view is None else view.q2

    @property
    def nondegenerate(self) -> bool:
        view = self.combined_view
        return view is not None and view.nondegenerate


def apply(operator: MarkovOperator, mu: Measure) -> Measure:
    """Return A mu."""
    return integrate(operator.kernel, mu)


def apply_component(operator: MarkovOperator, part: Union[Part, str], mu: Measure) -> Measure:
    """Return A_ca mu or A_pfa mu."""
    ca_kernel, pfa_kernel = operator.split
    return integrate(ca_kernel if Part(part) is Part.CA else pfa_kernel, mu)


@dataclass(frozen=True)
class TraceRow:
    n: int
    ca_norm: Fraction
    pfa_norm: Fraction

    @property
    def total(self) -> Fraction:
        return self.ca_norm + self.pfa_norm


@dataclass(frozen=True)
class NormTrace:
    """
    Component norms along the Markov sequence mu^{n+1} = A mu^n.

    Row n holds the norms of the two parts of the decomposition of the
    iterate mu^n. Only the first few iterates are kept as measures.

    """

    initial: Measure
    rows: Tuple[TraceRow, ...]
    measures: Tuple[Measure, ...] = ()

    def row(self, n: int) -> TraceRow:
        return self.rows[n - 1]


def iterate(
    operator: MarkovOperator,
    initial: Measure,
    n_max: int,
    retention: Optional[int] = None,
) -> NormTrace:
    """Iterate A from a probability measure; rows 1 .. n_max + 1."""
    if not in_S(initial):
        raise ValueError("The initial measure must be a probability measure.")
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, not {n_max}.")
    retention = settings.TRACE_RETENTION if retention is None else retention
    rows: List[TraceRow] = []
    kept: List[Measure] = []
    current = initial
    for n in range(1, n_max + 2):
        ca, pfa = yosida_hewitt(current)
        rows.append(TraceRow(n, norm(ca), norm(pfa)))
        if n <= retention:
            kept.append(current)
        if n <= n_max:
            current = apply(operator, current)
    logger.debug("Iterated %s steps, final norms %s", n_max, rows[-1])
    return NormTrace(initial, tuple(rows), tuple(kept))


def component_iterates(
    operator: MarkovOperator, initial: Measure, n_max: int
) -> Tuple[TraceRow, ...]:
    """
    Norms of the separately iterated components A^{n-1} mu_ca and A^{n-1} mu_pfa.

    This is the reading of mu^n_ca that `iterate` does not use; the two
    generally differ.

    """
    ca, pfa = yosida_hewitt(initial)
    rows = []
    for n in range(1, n_max + 2):
        rows.append(TraceRow(n, norm(ca), norm(pfa)))
        ca, pfa = apply(operator, ca), apply(operator, pfa)
    return tuple(rows)


def _check_condition(
    operator: MarkovOperator, name: str, keeps: Callable[[Measure], bool]
) -> HVerdict:
    for eta in operator.basis:
        try:
            image = apply_component(operator, Part.CA, filter_measure(eta))
        except UndecidedLimit as exc:
            return HVerdict(name, HStatus.UNDECIDED, eta, None, str(exc))
        if not keeps(image):
            return HVerdict(name, HStatus.FAILS, eta, image)
    return HVerdict(name, HStatus.HOLDS)


def check_H1(operator: MarkovOperator) -> HVerdict:
    """(H1): A_ca maps every basis filter to a countably additive measure."""
    return _check_condition(operator, "H1", lambda image: not image.pfa)


def check_H2(operator: MarkovOperator) -> HVerdict:
    """(H2): A_ca maps every basis filter to a purely finitely additive measure."""
    return _check_condition(operator, "H2", lambda image: not image.atomic)


def h_summary(h1: HVerdict, h2: HVerdict) -> str:
    if HStatus.UNDECIDED in (h1.status, h2.status):
        return "undecided"
    if h1.holds and h2.holds:
        return "both"
    if h1.holds:
        return "H1"
    if h2.holds:
        return "H2"
    return "neither"


def norm_law(trace: NormTrace, q1: Fraction, condition: str) -> Optional[TraceRow]:
    """
    Return the first trace row breaking the exact norm law, or None.

    Under (H1) the ca norm is q1 from the second row on; under (H2) it is
    q1**n times the initial ca norm at row n + 1.

    """
    initial_ca = trace.rows[0].ca_norm
    for row in trace.rows[1:]:
        if condition == "H1":
            expected = q1
        elif condition == "H2":
            expected = q1 ** (row.n - 1) * initial_ca
        else:
            raise ValueError(f"No norm law for condition {condition!r}.")
        if row.ca_norm != expected or row.pfa_norm != 1 - expected:
            return row
    return None


@dataclass(frozen=True)
class InclusionReport:
    checked: int
    violations: Tuple[Tuple[str, Measure, Measure], ...] = ()
    skipped: Tuple[Tuple[Measure, str], ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


def range_inclusions(operator: MarkovOperator, suite: Iterable[Measure]) -> InclusionReport:
    """
    Check the range inclusions of the superpositions of A_ca and A_pfa.

    A_ca A_ca maps ca into ca; A_pfa A_pfa and A_pfa A_ca map everything
    into pfa. Instances with an undecided limit are skipped with a note.

    """
    checked = 0
    violations = []
    skipped = []
    for mu in suite:
        ca, _ = yosida_hewitt(mu)

        def twice(outer: Part, inner: Part, nu: Measure) -> Measure:
            return apply_component(operator, outer, apply_component(operator, inner, nu))

        try:
            images = (
                ("ca.ca->ca", twice(Part.CA, Part.CA, ca), False),
                ("pfa.pfa->pfa", twice(Part.PFA, Part.PFA, mu), True),
                ("pfa.ca->pfa", twice(Part.PFA, Part.CA, mu), True),
            )
        except UndecidedLimit as exc:
            skipped.append((mu, str(exc)))
            continue
        checked += 1
        for name, image, must_be_pfa in images:
            if (image.atomic if must_be_pfa else image.pfa):
                violations.append((name, mu, image))
    return InclusionReport(checked, tuple(violations), tuple(skipped))
