"""Big-M integer program in CPLEX LP file format.

Binaries: ``r_i_j`` (scheduled as planned) where d_ij > 0, ``delta_i_a_b``
per discharge, and ``dp1_i_j``/``dp2_i_j``/``dp3_i_j`` selecting the
output branch for j >= 2.  Integers: ``bout_i_j`` and ``buf_i_j``.
The Big-M constants are TankFlow_i and TankCapacity_i.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..model import Instance, build_grid, check_instance


class Objective(str, enum.Enum):
    NONE = "none"
    MIN_BUFFER_SUM = "min_buffer_sum"


@dataclass
class IpVariableMap:
    r: dict[tuple[int, int], str] = field(default_factory=dict)
    delta: dict[tuple[int, int, int], str] = field(default_factory=dict)
    dp1: dict[tuple[int, int], str] = field(default_factory=dict)
    dp2: dict[tuple[int, int], str] = field(default_factory=dict)
    dp3: dict[tuple[int, int], str] = field(default_factory=dict)
    bout: dict[tuple[int, int], str] = field(default_factory=dict)
    buf: dict[tuple[int, int], str] = field(default_factory=dict)

    def binaries(self) -> list[str]:
        names = list(self.r.values()) + list(self.delta.values())
        for key in self.dp1:
            names += [self.dp1[key], self.dp2[key], self.dp3[key]]
        return names

    def generals(self) -> list[str]:
        out = []
        for key in self.bout:
            out += [self.bout[key], self.buf[key]]
        return out


def variable_map(instance: Instance) -> IpVariableMap:
    d = build_grid(instance)
    vm = IpVariableMap()
    for i in range(1, instance.k + 1):
        for j in range(1, instance.periods + 1):
            if d[i - 1][j - 1] > 0:
                vm.r[i, j] = f"r_{i}_{j}"
    for i, ind in enumerate(instance.industries, start=1):
        for dis in ind.discharges:
            vm.delta[i, dis.start, dis.end] = f"delta_{i}_{dis.start}_{dis.end}"
    for i in range(1, instance.k + 1):
        for j in range(2, instance.periods + 1):
            vm.dp1[i, j] = f"dp1_{i}_{j}"
            vm.dp2[i, j] = f"dp2_{i}_{j}"
            vm.dp3[i, j] = f"dp3_{i}_{j}"
    for i in range(1, instance.k + 1):
        for j in range(1, instance.periods + 1):
            vm.bout[i, j] = f"bout_{i}_{j}"
            vm.buf[i, j] = f"buf_{i}_{j}"
    return vm


def _expr(terms: list[tuple[int, str]]) -> str:
    """Render ``[(coef, name), ...]`` as an LP linear expression."""
    parts = []
    for coef, name in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1 else f"{mag} {name}"
        if not parts:
            parts.append(body if sign == "+" else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts) if parts else "0"


def encode_lp(instance: Instance, objective: Objective | str = Objective.NONE) -> str:
    check_instance(instance)
    objective = Objective(objective)
    k, m = instance.k, instance.periods
    d = build_grid(instance)
    vm = variable_map(instance)
    rows: list[str] = []

    def row(name: str, terms: list[tuple[int, str]], sense: str, rhs: int) -> None:
        rows.append(f" {name}: {_expr(terms)} {sense} {rhs}")

    def sched(i: int, j: int) -> list[tuple[int, str]]:
        dij = d[i - 1][j - 1]
        return [(dij, vm.r[i, j])] if dij > 0 else []

    for j in range(1, m + 1):
        terms = []
        for i in range(1, k + 1):
            terms += sched(i, j) + [(1, vm.bout[i, j])]
        if terms:
            row(f"c1_{j}", terms, "<=", instance.plant_capacity)

    for i in range(1, k + 1):
        # Buf_i1 = d_i1 - d_i1 r_i1
        row(f"c2_{i}", [(1, vm.buf[i, 1])] + sched(i, 1), "=", d[i - 1][0])
        for j in range(2, m + 1):
            terms = [(1, vm.buf[i, j]), (-1, vm.buf[i, j - 1]), (1, vm.bout[i, j])]
            row(f"c3_{i}_{j}", terms + sched(i, j), "=", d[i - 1][j - 1])

    for i, ind in enumerate(instance.industries, start=1):
        for j in range(2, m):
            row(f"c4_{i}_{j}", [(1, vm.buf[i, j])], "<=", ind.tank_capacity)
    for i in range(1, k + 1):
        row(f"c5_{i}", [(1, vm.buf[i, m])], "=", 0)
    for i in range(1, k + 1):
        row(f"c6_{i}", [(1, vm.bout[i, 1])], "=", 0)

    for i, ind in enumerate(instance.industries, start=1):
        for dis in ind.discharges:
            a, b = dis.start, dis.end
            n = b - a + 1
            rs = [vm.r[i, j] for j in range(a, b + 1)]
            delta = vm.delta[i, a, b]
            row(f"c13_{i}_{a}_{b}", [(1, r) for r in rs] + [(n, delta)], "<=", n)
            row(f"c14_{i}_{a}_{b}", [(-1, r) for r in rs] + [(-n, delta)], "<=", -n)

    for i, ind in enumerate(instance.industries, start=1):
        tf, tc = ind.tank_flow, ind.tank_capacity
        for j in range(2, m + 1):
            bout, prev = vm.bout[i, j], vm.buf[i, j - 1]
            dp1, dp2, dp3 = vm.dp1[i, j], vm.dp2[i, j], vm.dp3[i, j]
            row(f"c18_{i}_{j}", [(1, dp1), (1, dp2), (1, dp3)], ">=", 1)
            row(f"c19_{i}_{j}", [(1, bout), (tf, dp1)], "<=", tf)
            row(f"c20_{i}_{j}", [(tf, dp2), (-1, bout)], "<=", 0)
            row(f"c21_{i}_{j}", [(-1, prev), (tf, dp2)], "<=", 0)
            row(f"c22_{i}_{j}", [(1, prev), (-1, bout), (tc, dp3)], "<=", tc)
            row(f"c23_{i}_{j}", [(1, prev), (tc, dp3)], "<=", tc + tf)
            # the Big-M rows above are only correct together with these bounds
            row(f"c11_{i}_{j}", [(1, bout)], "<=", tf)
            row(f"c12_{i}_{j}", [(1, bout), (-1, prev)], "<=", 0)

    out = [
        f"\\ wwtpp: {k} industries, {m} periods, plant capacity {instance.plant_capacity}",
    ]
    if objective is Objective.MIN_BUFFER_SUM:
        terms = [(1, vm.buf[i, j]) for i in range(1, k + 1) for j in range(1, m + 1)]
        out += ["Minimize", f" obj: {_expr(terms)}"]
    out.append("Subject To")
    out += rows
    generals = vm.generals()
    if generals:
        out.append("Bounds")
        out += [f" {name} >= 0" for name in generals]
    binaries = vm.binaries()
    if binaries:
        out.append("Binaries")
        out += [f" {name}" for name in binaries]
    if generals:
        out.append("Generals")
        out += [f" {name}" for name in generals]
    out.append("End")
    return "\n".join(out) + "\n"
