"""
JSON (and CSV) encoding of grounds, sets, filters, measures and kernels.

Rationals are written as exact "p/q" strings. Decoders take the path of
the value inside the document so that errors point at the offending
field.

"""
from __future__ import annotations

import csv
import decimal
import io
import json
import logging
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from . import settings
from .invariant import InvariantReport
from .kernels import (
    CombinedKernel,
    Kernel,
    KernelError,
    KernelRule,
    RowTemplate,
    make_combined,
)
from .measures import Measure, zero_measure
from .operators import HVerdict, NormTrace
from .sets import (
    Empty,
    FilterFunctional,
    Full,
    GroundMismatch,
    GroundSpace,
    Interval,
    InvalidFilter,
    InvalidSetExpr,
    Point,
    Points,
    Residue,
    SetComplement,
    SetExpr,
    SetIntersection,
    SetOp,
    SetUnion,
    empty,
    full,
    set_ops,
)

logger = logging.getLogger(__name__)

Json = Dict[str, Any]


class CodecError(ValueError):
    """Raised for malformed documents; `path` locates the offending field."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def rational_str(value: Fraction) -> str:
    return str(value)


def decimal_str(value: Fraction, places: Optional[int] = None) -> str:
    """Render a rational as a fixed-point decimal (DECIMAL_PLACES by default)."""
    places = settings.DECIMAL_PLACES if places is None else places
    with decimal.localcontext() as context:
        context.prec = places + 30
        quotient = decimal.Decimal(value.numerator) / decimal.Decimal(value.denominator)
        return str(quotient.quantize(decimal.Decimal(1).scaleb(-places)))


def parse_rational(value: Any, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise CodecError(path, f"expected an integer or a 'p/q' string, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise CodecError(path, f"{value!r} is not an exact rational")


def _field(data: Any, name: str, path: str) -> Any:
    if not isinstance(data, Mapping):
        raise CodecError(path, f"expected an object, got {type(data).__name__}")
    if name not in data:
        raise CodecError(f"{path}.{name}", "missing field")
    return data[name]


def _integer(data: Any, name: str, path: str) -> int:
    value = _field(data, name, path)
    if isinstance(value, bool) or not isinstance(value, int):
        raise CodecError(f"{path}.{name}", f"expected an integer, got {value!r}")
    return value


def _list(data: Any, path: str) -> List[Any]:
    if not isinstance(data, list):
        raise CodecError(path, f"expected a list, got {type(data).__name__}")
    return data


# grounds and points


def ground_to_json(ground: GroundSpace) -> Json:
    data: Json = {"kind": ground.kind.value, "label": ground.label}
    if ground.is_finite:
        data["points"] = list(ground.points)
    return data


def ground_from_json(data: Any, path: str = "ground") -> GroundSpace:
    try:
        return GroundSpace(
            _field(data, "kind", path),
            _field(data, "label", path),
            tuple(data.get("points", ())),
        )
    except (ValueError, InvalidSetExpr) as ex:
        raise CodecError(path, str(ex))


def point_to_json(x: Point) -> str:
    return str(x)


def point_from_json(ground: GroundSpace, value: Any, path: str) -> Point:
    try:
        return ground.point(value)
    except GroundMismatch as ex:
        raise CodecError(path, str(ex))


# sets


def set_to_json(expr: SetExpr) -> Json:
    if isinstance(expr, Empty):
        return {"op": "empty"}
    if isinstance(expr, Full):
        return {"op": "full"}
    if isinstance(expr, Interval):
        return {
            "op": "interval",
            "lo": None if expr.lo is None else point_to_json(expr.lo),
            "hi": None if expr.hi is None else point_to_json(expr.hi),
            "lo_closed": expr.lo_closed,
            "hi_closed": expr.hi_closed,
        }
    if isinstance(expr, Points):
        ordered = sorted(expr.points, key=expr.ground.key)
        return {"op": "points", "points": [point_to_json(x) for x in ordered]}
    if isinstance(expr, Residue):
        return {"op": "residue", "modulus": expr.modulus, "residue": expr.residue}
    if isinstance(expr, SetComplement):
        return {"op": "complement", "args": [set_to_json(expr.arg)]}  # type: ignore
    if isinstance(expr, (SetUnion, SetIntersection)):
        op = "union" if isinstance(expr, SetUnion) else "intersection"
        return {"op": op, "args": [set_to_json(arg) for arg in expr.args]}
    raise TypeError(f"Cannot encode {expr!r}.")


def set_from_json(ground: GroundSpace, data: Any, path: str = "set") -> SetExpr:
    op = _field(data, "op", path)
    try:
        if op == "empty":
            return empty(ground)
        if op == "full":
            return full(ground)
        if op == "interval":
            lo, hi = data.get("lo"), data.get("hi")
            return Interval(
                ground,
                None if lo is None else point_from_json(ground, lo, f"{path}.lo"),
                None if hi is None else point_from_json(ground, hi, f"{path}.hi"),
                bool(data.get("lo_closed", True)),
                bool(data.get("hi_closed", True)),
            )
        if op == "points":
            values = _list(_field(data, "points", path), f"{path}.points")
            return Points(
                ground,
                frozenset(
                    point_from_json(ground, v, f"{path}.points[{i}]") for i, v in enumerate(values)
                ),
            )
        if op == "residue":
            return Residue(
                ground, _integer(data, "modulus", path), _integer(data, "residue", path)
            )
        if op in ("union", "intersection", "complement", "difference"):
            raw = data.get("args", [data["arg"]] if "arg" in data else None)
            args = [
                set_from_json(ground, arg, f"{path}.args[{i}]")
                for i, arg in enumerate(_list(raw, f"{path}.args"))
            ]
            return _fold(ground, SetOp(op), args, path)
    except (InvalidSetExpr, GroundMismatch) as ex:
        raise CodecError(path, str(ex))
    raise CodecError(f"{path}.op", f"unknown set operation {op!r}")


def _fold(ground: GroundSpace, op: SetOp, args: List[SetExpr], path: str) -> SetExpr:
    if op is SetOp.COMPLEMENT:
        if len(args) != 1:
            raise CodecError(f"{path}.args", "complement takes exactly one argument")
        return set_ops(args[0], None, op)
    if op is SetOp.DIFFERENCE:
        if len(args) != 2:
            raise CodecError(f"{path}.args", "difference takes exactly two arguments")
        return set_ops(args[0], args[1], op)
    result = full(ground) if op is SetOp.INTERSECTION else empty(ground)
    for arg in args:
        result = set_ops(result, arg, op)
    return result


# filters


def filter_to_json(eta: FilterFunctional) -> Json:
    tails: Json = {"family": eta.family.value}
    if eta.point is not None:
        tails["point"] = point_to_json(eta.point)
    return {"id": eta.id, "tails": tails}


def filter_from_json(ground: GroundSpace, data: Any, path: str = "filter") -> FilterFunctional:
    filter_id = _field(data, "id", path)
    tails = _field(data, "tails", path)
    family = _field(tails, "family", f"{path}.tails")
    point = tails.get("point")
    anchor = None if point is None else parse_rational(point, f"{path}.tails.point")
    try:
        return FilterFunctional(str(filter_id), ground, family, anchor)
    except (InvalidFilter, GroundMismatch, ValueError) as ex:
        raise CodecError(path, str(ex))


def filters_by_id(
    ground: GroundSpace, data: Sequence[Any], path: str = "filters"
) -> Dict[str, FilterFunctional]:
    found: Dict[str, FilterFunctional] = {}
    for i, item in enumerate(_list(data, path)):
        eta = filter_from_json(ground, item, f"{path}[{i}]")
        if eta.id in found:
            raise CodecError(f"{path}[{i}].id", f"duplicate filter id {eta.id!r}")
        found[eta.id] = eta
    return found


# measures


def measure_to_json(mu: Measure) -> Json:
    return {
        "atoms": [[point_to_json(x), rational_str(w)] for x, w in mu.atomic.weights],
        "pfa": [[eta.id, rational_str(c)] for eta, c in mu.pfa.terms],
    }


def measure_from_json(
    ground: GroundSpace,
    filters: Mapping[str, FilterFunctional],
    data: Any,
    path: str = "measure",
) -> Measure:
    if not isinstance(data, Mapping):
        raise CodecError(path, f"expected an object, got {type(data).__name__}")
    atoms: List[Tuple[Point, Fraction]] = []
    terms: List[Tuple[FilterFunctional, Fraction]] = []
    for i, pair in enumerate(_list(data.get("atoms", []), f"{path}.atoms")):
        where = f"{path}.atoms[{i}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise CodecError(where, "expected a [point, weight] pair")
        atoms.append((point_from_json(ground, pair[0], where), parse_rational(pair[1], where)))
    for i, pair in enumerate(_list(data.get("pfa", []), f"{path}.pfa")):
        where = f"{path}.pfa[{i}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise CodecError(where, "expected a [filter id, coefficient] pair")
        if pair[0] not in filters:
            raise CodecError(where, f"undeclared filter id {pair[0]!r}")
        terms.append((filters[pair[0]], parse_rational(pair[1], where)))
    return Measure.build(ground, atoms, terms)


# kernels


def template_to_json(value: RowTemplate) -> Any:
    terms: List[Json] = []
    if not value.constant.is_zero or not value.shifts:
        terms.append({"kind": "constant", "measure": measure_to_json(value.constant)})
    for offset, coefficient in value.shifts:
        if offset == 0:
            terms.append({"kind": "diagonal", "coef": rational_str(coefficient)})
        else:
            terms.append({"kind": "shift", "offset": offset, "coef": rational_str(coefficient)})
    return terms[0] if len(terms) == 1 else terms


def template_from_json(
    ground: GroundSpace,
    filters: Mapping[str, FilterFunctional],
    data: Any,
    path: str = "value",
) -> RowTemplate:
    items = data if isinstance(data, list) else [data]
    constant = zero_measure(ground)
    shifts: List[Tuple[int, Fraction]] = []
    for i, term in enumerate(items):
        where = f"{path}[{i}]" if isinstance(data, list) else path
        kind = _field(term, "kind", where)
        if kind == "constant":
            constant = constant + measure_from_json(
                ground, filters, _field(term, "measure", where), f"{where}.measure"
            )
        elif kind == "point":
            target = point_from_json(ground, _field(term, "target", where), f"{where}.target")
            weight = parse_rational(_field(term, "coef", where), f"{where}.coef")
            constant = constant + Measure.build(ground, atoms=[(target, weight)])
        elif kind in ("diagonal", "shift"):
            offset = 0 if kind == "diagonal" else _integer(term, "offset", where)
            shifts.append((offset, parse_rational(_field(term, "coef", where), f"{where}.coef")))
        else:
            raise CodecError(f"{where}.kind", f"unknown term kind {kind!r}")
    try:
        return RowTemplate.build(constant, shifts)
    except KernelError as ex:
        raise CodecError(path, str(ex))


def kernel_to_json(kernel: Kernel) -> Json:
    data: Json = {
        "ground": ground_to_json(kernel.ground),
        "rules": [
            {"piece": set_to_json(rule.piece), "value": template_to_json(rule.value)}
            for rule in kernel.rules
        ],
    }
    if kernel.kind is not None:
        data["kind"] = kernel.kind.value
    return data


def kernel_from_json(
    data: Any,
    filters: Mapping[str, FilterFunctional],
    path: str = "kernel",
    ground: Optional[GroundSpace] = None,
) -> Kernel:
    if not isinstance(data, Mapping):
        raise CodecError(path, f"expected an object, got {type(data).__name__}")
    declared = ground_from_json(data["ground"], f"{path}.ground") if "ground" in data else ground
    if declared is None:
        raise CodecError(f"{path}.ground", "missing field")
    if ground is not None and declared != ground:
        raise CodecError(f"{path}.ground", "kernel ground differs from the scenario ground")
    rules = []
    for i, item in enumerate(_list(_field(data, "rules", path), f"{path}.rules")):
        where = f"{path}.rules[{i}]"
        piece = set_from_json(declared, _field(item, "piece", where), f"{where}.piece")
        raw = _field(item, "value", where)
        value = template_from_json(declared, filters, raw, f"{where}.value")
        rules.append(KernelRule(piece, value))
    try:
        return Kernel(declared, tuple(rules), data.get("kind"))
    except ValueError as ex:
        raise CodecError(path, str(ex))


def combined_to_json(combined: CombinedKernel) -> Json:
    ca, pfa = combined.normalized()
    return {
        "q1": rational_str(combined.q1),
        "ca": None if ca is None else kernel_to_json(ca),
        "pfa": None if pfa is None else kernel_to_json(pfa),
    }


def combined_from_json(
    data: Any,
    filters: Mapping[str, FilterFunctional],
    path: str = "combined",
    ground: Optional[GroundSpace] = None,
) -> CombinedKernel:
    q1 = parse_rational(_field(data, "q1", path), f"{path}.q1")
    parts = {
        name: None
        if data.get(name) is None
        else kernel_from_json(data[name], filters, f"{path}.{name}", ground)
        for name in ("ca", "pfa")
    }
    try:
        return make_combined(q1, parts["ca"], parts["pfa"])
    except (KernelError, GroundMismatch) as ex:
        raise CodecError(path, str(ex))


# results


def trace_rows(trace: NormTrace) -> List[Json]:
    return [
        {
            "n": row.n,
            "ca_norm": rational_str(row.ca_norm),
            "pfa_norm": rational_str(row.pfa_norm),
            "ca_norm_decimal": decimal_str(row.ca_norm),
            "pfa_norm_decimal": decimal_str(row.pfa_norm),
        }
        for row in trace.rows
    ]


TRACE_COLUMNS = ("n", "ca_norm", "pfa_norm", "ca_norm_decimal", "pfa_norm_decimal")


def trace_to_csv(trace: NormTrace) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=TRACE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(trace_rows(trace))
    return buffer.getvalue()


def hverdict_to_json(verdict: HVerdict) -> Json:
    data: Json = {"condition": verdict.condition, "status": verdict.status.value}
    if verdict.witness is not None:
        data["witness"] = verdict.witness.id
    if verdict.image is not None:
        data["image"] = measure_to_json(verdict.image)
    if verdict.detail:
        data["detail"] = verdict.detail
    return data


def trace_to_json(
    trace: NormTrace, h1: Optional[HVerdict] = None, h2: Optional[HVerdict] = None
) -> Json:
    data: Json = {"rows": trace_rows(trace)}
    for key, verdict in (("h1", h1), ("h2", h2)):
        if verdict is not None:
            data[key] = hverdict_to_json(verdict)
    return data


def invariant_report_to_json(report: InvariantReport) -> Json:
    return {
        "closure": [generator.label for generator in report.closure.basis],
        "dimension": report.dimension,
        "enumerated": report.enumerated,
        "solutions": [
            {"measure": measure_to_json(mu), "classification": kind.value}
            for mu, kind in zip(report.solutions, report.classifications)
        ],
        "delta": {
            "ba_nonempty": report.delta_ba_nonempty,
            "ca_empty": report.delta_ca_empty,
            "pfa_nonempty": report.delta_pfa_nonempty,
        },
    }
