"""Instances, solutions and verdicts for the wastewater treatment plant problem.

Time is discretized into unit periods numbered ``1..periods``; period
``periods`` is the overall deadline.  All quantities are integers.

Instances and solutions are stored as JSON documents with a fixed set of
field names; parsing is strict and rejects unknown fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterator, Union


class InstanceError(ValueError):
    """Raised when an instance (or its serialized form) is invalid."""

    def __init__(self, message: str, violations: list[Violation] | None = None):
        super().__init__(message)
        self.violations = violations or []


class SolutionFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Discharge:
    start: int
    end: int
    flow: int

    @property
    def duration(self) -> int:
        return self.end - self.start + 1

    @property
    def volume(self) -> int:
        return self.duration * self.flow

    def covers(self, period: int) -> bool:
        return self.start <= period <= self.end


@dataclass(frozen=True)
class Industry:
    id: str
    tank_capacity: int
    tank_flow: int
    discharges: tuple[Discharge, ...] = ()

    @property
    def volume(self) -> int:
        return sum(d.volume for d in self.discharges)


@dataclass(frozen=True)
class Instance:
    plant_capacity: int
    periods: int
    industries: tuple[Industry, ...] = ()

    @property
    def k(self) -> int:
        return len(self.industries)

    @property
    def m(self) -> int:
        return self.periods

    def discharges(self) -> Iterator[tuple[int, Discharge]]:
        """Yield ``(industry_index, discharge)`` in industry-major order."""
        for i, ind in enumerate(self.industries):
            for d in ind.discharges:
                yield i, d

    @property
    def n_discharges(self) -> int:
        return sum(len(ind.discharges) for ind in self.industries)

    def with_capacity(self, plant_capacity: int) -> Instance:
        return Instance(plant_capacity, self.periods, self.industries)

    def with_periods(self, periods: int) -> Instance:
        return Instance(self.plant_capacity, periods, self.industries)


@dataclass(frozen=True)
class Violation:
    industry: int | None
    discharge: int | None
    reason: str

    def __str__(self) -> str:
        where = []
        if self.industry is not None:
            where.append(f"industry {self.industry}")
        if self.discharge is not None:
            where.append(f"discharge {self.discharge}")
        prefix = ", ".join(where)
        return f"{prefix}: {self.reason}" if prefix else self.reason


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_instance(instance: Instance) -> ValidationResult:
    """Check every range, sign and disjointness invariant of ``instance``.

    Industry and discharge positions in the returned violations are 1-based.
    """
    out: list[Violation] = []
    m = instance.periods
    if not _is_int(m) or m < 1:
        out.append(Violation(None, None, f"periods must be >= 1, got {m!r}"))
        m = None
    if not _is_int(instance.plant_capacity) or instance.plant_capacity < 0:
        out.append(Violation(None, None, "plant_capacity: non-negative required"))
    seen: set[str] = set()
    for i, ind in enumerate(instance.industries, start=1):
        if ind.id in seen:
            out.append(Violation(i, None, f"duplicate industry id {ind.id!r}"))
        seen.add(ind.id)
        for name in ("tank_capacity", "tank_flow"):
            v = getattr(ind, name)
            if not _is_int(v) or v < 0:
                out.append(Violation(i, None, f"{name}: non-negative required"))
        prev: Discharge | None = None
        for n, d in enumerate(ind.discharges, start=1):
            if not all(_is_int(x) for x in (d.start, d.end, d.flow)):
                out.append(Violation(i, n, "start, end and flow must be integers"))
                continue
            if d.flow <= 0:
                out.append(Violation(i, n, "zero flow: flow must be positive"))
            if d.start > d.end:
                out.append(Violation(i, n, f"start {d.start} after end {d.end}"))
            if d.start < 1:
                out.append(Violation(i, n, f"start {d.start} before period 1"))
            if m is not None and d.end > m:
                out.append(Violation(i, n, f"end exceeds horizon ({d.end} > {m})"))
            if prev is not None:
                if d.start < prev.start:
                    out.append(Violation(i, n, "discharges not sorted by start"))
                elif d.start <= prev.end:
                    out.append(Violation(i, n, f"overlap at period {d.start}"))
            prev = d
    return ValidationResult(tuple(out))


def check_instance(instance: Instance) -> Instance:
    result = validate_instance(instance)
    if not result.ok:
        msg = "; ".join(str(v) for v in result.violations)
        raise InstanceError(f"invalid instance: {msg}", list(result.violations))
    return instance


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


Grid = tuple[tuple[int, ...], ...]


def build_grid(instance: Instance) -> Grid:
    """Expand discharges into the k x m matrix of scheduled flows.

    ``grid[i][j - 1]`` is the flow of industry ``i`` (0-based) during period
    ``j``, zero where no discharge is scheduled.
    """
    m = instance.periods
    rows = []
    for ind in instance.industries:
        row = [0] * m
        for d in ind.discharges:
            for j in range(d.start, d.end + 1):
                row[j - 1] = d.flow
        rows.append(tuple(row))
    return tuple(rows)


@dataclass(frozen=True)
class Solution:
    """Per-discharge reroute flags plus buffer trajectories.

    ``reroute`` follows :meth:`Instance.discharges` order.  ``bout[i][j-1]``
    and ``buf[i][j-1]`` hold Bout_ij and Buf_ij.
    """

    reroute: tuple[bool, ...]
    bout: Grid
    buf: Grid

    @classmethod
    def empty(cls, instance: Instance) -> Solution:
        zeros = tuple((0,) * instance.periods for _ in instance.industries)
        return cls((False,) * instance.n_discharges, zeros, zeros)


def river_flows(instance: Instance, reroute: tuple[bool, ...] | list[bool]) -> Grid:
    """The c_ij matrix implied by per-discharge reroute flags."""
    m = instance.periods
    rows = [[0] * m for _ in instance.industries]
    for (i, d), rerouted in zip(instance.discharges(), reroute):
        if not rerouted:
            for j in range(d.start, d.end + 1):
                rows[i][j - 1] = d.flow
    return tuple(tuple(r) for r in rows)


# --- verdicts ---------------------------------------------------------------


@dataclass(frozen=True)
class Sat:
    solution: Solution
    name = "sat"


@dataclass(frozen=True)
class Unsat:
    name = "unsat"


@dataclass(frozen=True)
class Unknown:
    reason: str = ""
    name = "unknown"


@dataclass(frozen=True)
class Timeout:
    name = "timeout"


Verdict = Union[Sat, Unsat, Unknown, Timeout]


def is_decided(verdict: Verdict) -> bool:
    return isinstance(verdict, (Sat, Unsat))


# --- serialization ------------------------------------------------------------

_TOP_FIELDS = ("plant_capacity", "periods", "industries")
_INDUSTRY_FIELDS = ("id", "tank_capacity", "tank_flow", "discharges")
_DISCHARGE_FIELDS = ("start", "end", "flow")


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    return {
        "plant_capacity": instance.plant_capacity,
        "periods": instance.periods,
        "industries": [
            {
                "id": ind.id,
                "tank_capacity": ind.tank_capacity,
                "tank_flow": ind.tank_flow,
                "discharges": [
                    {"start": d.start, "end": d.end, "flow": d.flow}
                    for d in ind.discharges
                ],
            }
            for ind in instance.industries
        ],
    }


def write_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def _fields(obj: Any, allowed: tuple[str, ...], where: str) -> dict[str, Any]:
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object")
    unknown = [key for key in obj if key not in allowed]
    if unknown:
        raise InstanceError(f"{where}: unknown field {unknown[0]!r}")
    missing = [key for key in allowed if key not in obj]
    if missing:
        raise InstanceError(f"{where}: missing field {missing[0]!r}")
    return obj


def _int(value: Any, where: str, minimum: int = 0) -> int:
    if not _is_int(value):
        raise InstanceError(f"{where}: integer required, got {value!r}")
    if value < minimum:
        if minimum == 0:
            raise InstanceError(f"{where}: non-negative required, got {value}")
        raise InstanceError(f"{where}: must be >= {minimum}, got {value}")
    return value


def instance_from_dict(raw: Any) -> Instance:
    top = _fields(raw, _TOP_FIELDS, "instance")
    if not isinstance(top["industries"], list):
        raise InstanceError("industries: expected an array")
    industries = []
    for n, raw_ind in enumerate(top["industries"], start=1):
        where = f"industries[{n}]"
        ind = _fields(raw_ind, _INDUSTRY_FIELDS, where)
        if not isinstance(ind["id"], str):
            raise InstanceError(f"{where}.id: string required")
        if not isinstance(ind["discharges"], list):
            raise InstanceError(f"{where}.discharges: expected an array")
        discharges = []
        for q, raw_d in enumerate(ind["discharges"], start=1):
            dwhere = f"{where}.discharges[{q}]"
            d = _fields(raw_d, _DISCHARGE_FIELDS, dwhere)
            discharges.append(
                Discharge(
                    _int(d["start"], f"{dwhere}.start", 1),
                    _int(d["end"], f"{dwhere}.end", 1),
                    _int(d["flow"], f"{dwhere}.flow", 1),
                )
            )
        industries.append(
            Industry(
                ind["id"],
                _int(ind["tank_capacity"], f"{where}.tank_capacity"),
                _int(ind["tank_flow"], f"{where}.tank_flow"),
                tuple(discharges),
            )
        )
    instance = Instance(
        _int(top["plant_capacity"], "plant_capacity"),
        _int(top["periods"], "periods", 1),
        tuple(industries),
    )
    return check_instance(instance)


def read_instance(text: str) -> Instance:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed instance document: {exc}") from exc
    return instance_from_dict(raw)


def write_solution(solution: Solution) -> str:
    doc = {
        "reroute": list(solution.reroute),
        "bout": [list(r) for r in solution.bout],
        "buf": [list(r) for r in solution.buf],
    }
    return json.dumps(doc) + "\n"


def read_solution(text: str, instance: Instance | None = None) -> Solution:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SolutionFormatError(f"malformed solution document: {exc}") from exc
    if not isinstance(raw, dict):
        raise SolutionFormatError("solution: expected an object")
    unknown = [key for key in raw if key not in ("reroute", "bout", "buf")]
    if unknown:
        raise SolutionFormatError(f"solution: unknown field {unknown[0]!r}")
    try:
        reroute = raw["reroute"]
        bout, buf = raw["bout"], raw["buf"]
    except KeyError as exc:
        raise SolutionFormatError(f"solution: missing field {exc.args[0]!r}") from None
    if not isinstance(reroute, list) or not all(isinstance(x, bool) for x in reroute):
        raise SolutionFormatError("reroute: array of booleans required")
    grids = []
    for name, grid in (("bout", bout), ("buf", buf)):
        if not isinstance(grid, list) or not all(isinstance(r, list) for r in grid):
            raise SolutionFormatError(f"{name}: array of arrays required")
        for row in grid:
            for x in row:
                if not _is_int(x) or x < 0:
                    raise SolutionFormatError(f"{name}: non-negative integers required")
        grids.append(tuple(tuple(r) for r in grid))
    solution = Solution(tuple(reroute), grids[0], grids[1])
    if instance is not None:
        check_dimensions(instance, solution)
    return solution


def check_dimensions(instance: Instance, solution: Solution) -> None:
    if len(solution.reroute) != instance.n_discharges:
        raise SolutionFormatError(
            f"reroute has {len(solution.reroute)} entries, "
            f"instance has {instance.n_discharges} discharges"
        )
    for name in ("bout", "buf"):
        grid = getattr(solution, name)
        if len(grid) != instance.k or any(len(r) != instance.periods for r in grid):
            raise SolutionFormatError(
                f"{name} must be {instance.k} x {instance.periods}"
            )
