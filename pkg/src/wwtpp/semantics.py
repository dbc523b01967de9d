"""Feasibility semantics: the solution verifier and the buffer simulator.

The verifier checks the time-indexed constraint families literally and
reports every failure.  The simulator is the deterministic forward model
used to turn reroute/empty decisions into buffer trajectories; it relies
on the fact that the three-way disjunction on Bout_ij collapses to
``Bout_ij in {0, min(TankFlow_i, Buf_i,j-1)}``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Sequence, Union

from .model import (
    Grid,
    Instance,
    Solution,
    build_grid,
    check_dimensions,
    river_flows,
)

FAMILIES = ("C1", "C2", "C3", "C4", "C5", "C6", "C7-C9", "C10", "C11", "C12")


@dataclass(frozen=True)
class VerifyOptions:
    check_redundant: bool = False
    # Buf_i1 <= TankCapacity_i is not part of the original model; opt-in only.
    check_first_period_tank_capacity: bool = False


@dataclass(frozen=True)
class ConstraintViolation:
    constraint_family: str
    industry: int | None
    period: int | None
    detail: str

    def __str__(self) -> str:
        loc = []
        if self.industry is not None:
            loc.append(f"industry {self.industry}")
        if self.period is not None:
            loc.append(f"period {self.period}")
        where = f" ({', '.join(loc)})" if loc else ""
        return f"{self.constraint_family}{where}: {self.detail}"


@dataclass(frozen=True)
class VerificationReport:
    violations: tuple[ConstraintViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def families(self) -> set[str]:
        return {v.constraint_family for v in self.violations}

    def at(self, industry: int, period: int) -> list[ConstraintViolation]:
        return [
            v for v in self.violations if v.industry == industry and v.period == period
        ]

    def to_text(self) -> str:
        if self.ok:
            return "valid\n"
        lines = [f"invalid: {len(self.violations)} violation(s)"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [asdict(v) for v in self.violations]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def verify(
    instance: Instance, solution: Solution, options: VerifyOptions = VerifyOptions()
) -> VerificationReport:
    """Check ``solution`` against every constraint family of ``instance``.

    Raises :class:`~wwtpp.model.SolutionFormatError` when the solution's
    dimensions do not match the instance.  Industry and period indices in
    the report are 1-based.
    """
    check_dimensions(instance, solution)
    m = instance.periods
    d = build_grid(instance)
    c = river_flows(instance, solution.reroute)
    bout, buf = solution.bout, solution.buf
    out: list[ConstraintViolation] = []

    def bad(family: str, i: int | None, j: int | None, detail: str) -> None:
        out.append(ConstraintViolation(family, i, j, detail))

    for j in range(1, m + 1):
        load = sum(c[i][j - 1] + bout[i][j - 1] for i in range(instance.k))
        if load > instance.plant_capacity:
            bad("C1", None, j, f"plant load {load} > capacity {instance.plant_capacity}")

    for i, ind in enumerate(instance.industries):
        n = i + 1
        row_d, row_c, row_bout, row_buf = d[i], c[i], bout[i], buf[i]
        if row_buf[0] != row_d[0] - row_c[0]:
            bad("C2", n, 1, f"Buf = {row_buf[0]}, expected {row_d[0] - row_c[0]}")
        for j in range(2, m + 1):
            expect = row_buf[j - 2] - row_bout[j - 1] + row_d[j - 1] - row_c[j - 1]
            if row_buf[j - 1] != expect:
                bad("C3", n, j, f"Buf = {row_buf[j - 1]}, balance gives {expect}")
        first = 1 if options.check_first_period_tank_capacity else 2
        for j in range(first, m):
            if row_buf[j - 1] > ind.tank_capacity:
                bad(
                    "C4", n, j,
                    f"Buf = {row_buf[j - 1]} > tank capacity {ind.tank_capacity}",
                )
        if row_buf[m - 1] != 0:
            bad("C5", n, m, f"Buf = {row_buf[m - 1]} at deadline, expected 0")
        if row_bout[0] != 0:
            bad("C6", n, 1, f"Bout = {row_bout[0]} in first period")
        tf = ind.tank_flow
        for j in range(2, m + 1):
            b, prev = row_bout[j - 1], row_buf[j - 2]
            if not (
                b == 0
                or (b == tf and prev >= tf)
                or (b == prev and prev <= tf)
            ):
                bad(
                    "C7-C9", n, j,
                    f"Bout = {b} with previous Buf = {prev}, tank flow {tf}",
                )
            if options.check_redundant:
                if not 0 <= b <= tf:
                    bad("C11", n, j, f"Bout = {b} outside [0, {tf}]")
                if b > prev:
                    bad("C12", n, j, f"Bout = {b} > previous Buf = {prev}")
    return VerificationReport(tuple(out))


# --- simulation -----------------------------------------------------------------


@dataclass(frozen=True)
class InfeasibleAt:
    industry: int | None
    period: int
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Simulation:
    bout: Grid
    buf: Grid


def simulate_row(
    inflow: Sequence[int],
    tank_capacity: int,
    tank_flow: int,
    empty: Sequence[bool],
) -> tuple[tuple[int, ...], tuple[int, ...]] | InfeasibleAt:
    """Run one buffer forward; ``inflow[j-1]`` is d_ij - c_ij.

    ``empty[j-1]`` is ignored for j = 1.  Fails fast on a tank-capacity breach
    in periods 2..m-1 or on a non-empty buffer at the deadline.
    """
    m = len(inflow)
    bout = [0] * m
    buf = [0] * m
    level = inflow[0]
    buf[0] = level
    for j in range(2, m + 1):
        out = min(tank_flow, level) if empty[j - 1] else 0
        level = level - out + inflow[j - 1]
        bout[j - 1] = out
        buf[j - 1] = level
        if j < m and level > tank_capacity:
            return InfeasibleAt(None, j, "tank capacity")
    if level != 0:
        return InfeasibleAt(None, m, "buffer not empty at deadline")
    return tuple(bout), tuple(buf)


def simulate_buffers(
    instance: Instance,
    reroute: Sequence[bool],
    empty_decision: Sequence[Sequence[bool]],
) -> Union[Simulation, InfeasibleAt]:
    """Forward-simulate every buffer under the given decisions.

    Plant capacity is not checked here.  On failure the returned
    :class:`InfeasibleAt` carries the 1-based industry and period.
    """
    if len(reroute) != instance.n_discharges:
        raise ValueError("reroute length does not match the number of discharges")
    if len(empty_decision) != instance.k or any(
        len(r) != instance.periods for r in empty_decision
    ):
        raise ValueError(f"empty_decision must be {instance.k} x {instance.periods}")
    d = build_grid(instance)
    c = river_flows(instance, reroute)
    bouts, bufs = [], []
    for i, ind in enumerate(instance.industries):
        inflow = [dj - cj for dj, cj in zip(d[i], c[i])]
        result = simulate_row(inflow, ind.tank_capacity, ind.tank_flow, empty_decision[i])
        if isinstance(result, InfeasibleAt):
            return InfeasibleAt(i + 1, result.period, result.reason)
        bouts.append(result[0])
        bufs.append(result[1])
    return Simulation(tuple(bouts), tuple(bufs))


def plant_loads(instance: Instance, solution: Solution) -> list[int]:
    c = river_flows(instance, solution.reroute)
    return [
        sum(c[i][j] + solution.bout[i][j] for i in range(instance.k))
        for j in range(instance.periods)
    ]
