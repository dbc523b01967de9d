"""SMT-LIB v2 (QF_LIA) emission and model parsing.

Variable names are fixed: ``c_i_j`` (declared only where d_ij > 0),
``bout_i_j`` and ``buf_i_j``, with 1-based industry ``i`` and period ``j``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..model import Instance, Solution, build_grid, check_instance


class ModelParseError(ValueError):
    pass


@dataclass(frozen=True)
class SmtOptions:
    include_redundant: bool = True
    logic_name: str = "QF_LIA"


def c_name(i: int, j: int) -> str:
    return f"c_{i}_{j}"


def bout_name(i: int, j: int) -> str:
    return f"bout_{i}_{j}"


def buf_name(i: int, j: int) -> str:
    return f"buf_{i}_{j}"


def _sum(terms: list[str]) -> str:
    if not terms:
        return "0"
    if len(terms) == 1:
        return terms[0]
    return f"(+ {' '.join(terms)})"


def _and(terms: list[str]) -> str:
    return terms[0] if len(terms) == 1 else f"(and {' '.join(terms)})"


def encode_smtlib(instance: Instance, options: SmtOptions = SmtOptions()) -> str:
    check_instance(instance)
    k, m = instance.k, instance.periods
    d = build_grid(instance)
    out = [
        f"; wwtpp: {k} industries, {m} periods, plant capacity {instance.plant_capacity}",
        "(set-option :produce-models true)",
        f"(set-logic {options.logic_name})",
    ]

    for i in range(1, k + 1):
        for j in range(1, m + 1):
            if d[i - 1][j - 1] > 0:
                out.append(f"(declare-fun {c_name(i, j)} () Int)")
            out.append(f"(declare-fun {bout_name(i, j)} () Int)")
            out.append(f"(declare-fun {buf_name(i, j)} () Int)")

    def term_c(i: int, j: int) -> list[str]:
        return [c_name(i, j)] if d[i - 1][j - 1] > 0 else []

    def inflow(i: int, j: int) -> str | None:
        dij = d[i - 1][j - 1]
        return f"(- {dij} {c_name(i, j)})" if dij > 0 else None

    out.append("; plant capacity")
    for j in range(1, m + 1):
        terms = []
        for i in range(1, k + 1):
            terms += term_c(i, j) + [bout_name(i, j)]
        out.append(f"(assert (<= {_sum(terms)} {instance.plant_capacity}))")

    out.append("; buffer balance")
    for i in range(1, k + 1):
        first = inflow(i, 1) or "0"
        out.append(f"(assert (= {buf_name(i, 1)} {first}))")
        for j in range(2, m + 1):
            rhs = f"(- {buf_name(i, j - 1)} {bout_name(i, j)})"
            add = inflow(i, j)
            if add is not None:
                rhs = f"(+ {rhs} {add})"
            out.append(f"(assert (= {buf_name(i, j)} {rhs}))")

    out.append("; tank capacity")
    for i, ind in enumerate(instance.industries, start=1):
        for j in range(2, m):
            out.append(f"(assert (<= {buf_name(i, j)} {ind.tank_capacity}))")

    out.append("; empty at the deadline")
    for i in range(1, k + 1):
        out.append(f"(assert (= {buf_name(i, m)} 0))")

    out.append("; buffer output")
    for i, ind in enumerate(instance.industries, start=1):
        tf = ind.tank_flow
        out.append(f"(assert (= {bout_name(i, 1)} 0))")
        for j in range(2, m + 1):
            b, prev = bout_name(i, j), buf_name(i, j - 1)
            out.append(
                f"(assert (or (= {b} 0) "
                f"(and (= {b} {tf}) (>= {prev} {tf})) "
                f"(and (= {b} {prev}) (<= {prev} {tf}))))"
            )

    out.append("; each discharge goes entirely to the river or to the buffer")
    for i, ind in enumerate(instance.industries, start=1):
        for dis in ind.discharges:
            span = range(dis.start, dis.end + 1)
            zero = _and([f"(= {c_name(i, j)} 0)" for j in span])
            full = _and([f"(= {c_name(i, j)} {dis.flow})" for j in span])
            out.append(f"(assert (or {zero} {full}))")

    if options.include_redundant:
        out.append("; redundant output bounds")
        for i, ind in enumerate(instance.industries, start=1):
            for j in range(2, m + 1):
                out.append(f"(assert (<= 0 {bout_name(i, j)} {ind.tank_flow}))")
                out.append(f"(assert (<= {bout_name(i, j)} {buf_name(i, j - 1)}))")

    out.append("(check-sat)")
    out.append("(get-model)")
    return "\n".join(out) + "\n"


# --- model parsing ------------------------------------------------------------------

_INT = r"(\(\s*-\s*\d+\s*\)|-?\d+)"
_DEFINE = re.compile(r"\(define-fun\s+([A-Za-z_][\w.]*)\s+\(\)\s+Int\s+" + _INT + r"\s*\)")
_EQ = re.compile(r"\(=\s+([A-Za-z_][\w.]*)\s+" + _INT + r"\s*\)")


def _int_value(text: str) -> int:
    text = text.strip()
    if text.startswith("("):
        return -int(text.strip("() ").lstrip("-").strip())
    return int(text)


def parse_model_values(text: str) -> dict[str, int]:
    """Extract integer assignments from a get-model response.

    Both ``(define-fun x () Int v)`` and ``(= x v)`` styles are accepted.
    """
    values: dict[str, int] = {}
    for pattern in (_DEFINE, _EQ):
        for name, raw in pattern.findall(text):
            values.setdefault(name, _int_value(raw))
    return values


def parse_smt_model(text: str, instance: Instance) -> Solution:
    """Rebuild a :class:`Solution` from a model over the encoder's names.

    A discharge is rerouted when ``c`` is 0 over its span.  Every declared
    variable must be present; ``c`` values that are neither 0 nor the
    scheduled flow, or that differ across a span, raise
    :class:`ModelParseError`.
    """
    values = parse_model_values(text)
    if not values and instance.k > 0:
        raise ModelParseError("no integer assignments found in solver output")

    def get(name: str) -> int:
        try:
            return values[name]
        except KeyError:
            raise ModelParseError(f"model does not assign {name}") from None

    reroute = []
    for i, ind in enumerate(instance.industries, start=1):
        for dis in ind.discharges:
            seen = {get(c_name(i, j)) for j in range(dis.start, dis.end + 1)}
            if seen == {0}:
                reroute.append(True)
            elif seen == {dis.flow}:
                reroute.append(False)
            else:
                raise ModelParseError(
                    f"industry {i}, discharge {dis.start}..{dis.end}: c values "
                    f"{sorted(seen)} are not all 0 or all {dis.flow}"
                )
    m = instance.periods
    bout = tuple(
        tuple(get(bout_name(i, j)) for j in range(1, m + 1))
        for i in range(1, instance.k + 1)
    )
    buf = tuple(
        tuple(get(buf_name(i, j)) for j in range(1, m + 1))
        for i in range(1, instance.k + 1)
    )
    return Solution(tuple(reroute), bout, buf)


def parse_check_sat(text: str) -> str | None:
    """First ``sat`` / ``unsat`` / ``unknown`` line of solver output."""
    for line in text.splitlines():
        word = line.strip()
        if word in ("sat", "unsat", "unknown"):
            return word
    return None
