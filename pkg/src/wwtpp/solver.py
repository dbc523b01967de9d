"""Native feasibility search and an exhaustive ground-truth oracle.

The search walks periods chronologically.  In period ``j`` it first fixes
river/buffer for every discharge starting at ``j``, then empty/hold for
each tank holding water.  Emptying always drains ``min(TankFlow, Buf)``,
so both decisions are boolean.

Pruning rules, all exact:

* plant load of any period (including committed river flow of later
  periods) within capacity;
* tank capacity in periods ``2..m-1`` and empty tanks at the deadline;
* drain-time bounds: water stored plus water committed to a tank must be
  drainable at ``TankFlow`` per remaining period, for every suffix;
* all water arriving after ``j`` still has to pass through the plant in
  periods ``j+1..m``;
* maximal emptying: a lower buffer level is never worse than a higher one
  under the same decisions, so holding a tank while the plant still has
  room to empty it is dominated;
* failed end-of-period states are memoized.
"""

from __future__ import annotations

import enum
import itertools
import sys
import time
from dataclasses import dataclass
from typing import Optional

from .model import (
    Instance,
    Sat,
    Solution,
    Timeout,
    Unknown,
    Unsat,
    Verdict,
    build_grid,
    check_instance,
    river_flows,
)
from .semantics import InfeasibleAt, Simulation, simulate_buffers, simulate_row, verify


class BranchOrder(str, enum.Enum):
    RIVER_FIRST = "river_first"
    BUFFER_FIRST = "buffer_first"
    BIGGEST_DISCHARGE_FIRST = "biggest_discharge_first"


class EmptyOrder(str, enum.Enum):
    EMPTY_FIRST = "empty_first"
    HOLD_FIRST = "hold_first"


@dataclass(frozen=True)
class SolverConfig:
    time_limit: Optional[float] = None  # seconds
    node_limit: Optional[int] = None
    branch_order: BranchOrder = BranchOrder.BIGGEST_DISCHARGE_FIRST
    empty_order: EmptyOrder = EmptyOrder.EMPTY_FIRST
    dominance: bool = True
    memo: bool = True

    def __post_init__(self):
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        object.__setattr__(self, "branch_order", BranchOrder(self.branch_order))
        object.__setattr__(self, "empty_order", EmptyOrder(self.empty_order))


@dataclass(frozen=True)
class SolveStats:
    nodes_explored: int
    backtracks: int
    elapsed: float  # seconds
    verdict: Verdict


class _Stop(Exception):
    def __init__(self, verdict: Verdict):
        self.verdict = verdict


class _Search:
    def __init__(self, instance: Instance, config: SolverConfig):
        self.inst = instance
        self.cfg = config
        self.m = m = instance.periods
        self.k = k = instance.k
        self.cap = instance.plant_capacity
        self.tank_cap = [ind.tank_capacity for ind in instance.industries]
        self.tank_flow = [ind.tank_flow for ind in instance.industries]
        # (industry, start, end, flow) in industry-major order
        self.dis = [(i, d.start, d.end, d.flow) for i, d in instance.discharges()]
        starts: list[list[int]] = [[] for _ in range(m + 2)]
        for n, (_, a, _, _) in enumerate(self.dis):
            starts[a].append(n)
        if config.branch_order is BranchOrder.BIGGEST_DISCHARGE_FIRST:
            for lst in starts:
                lst.sort(key=lambda n: (-(self.dis[n][2] - self.dis[n][1] + 1) * self.dis[n][3], n))
        self.starts = starts
        self.buffer_first = config.branch_order is BranchOrder.BUFFER_FIRST
        self.empty_first = config.empty_order is EmptyOrder.EMPTY_FIRST
        grid = build_grid(instance)
        per_period = [sum(grid[i][j] for i in range(k)) for j in range(m)]
        # volume scheduled strictly after period j, indexed by j = 0..m
        self.vol_after = [sum(per_period[j:]) for j in range(m + 1)]
        self.vol_upto = [sum(per_period[:j]) for j in range(m + 1)]
        self.slack = self.cap * m - sum(per_period)
        # active[j]: discharges with start <= j < end, whose decisions carry over
        self.active = [
            [n for n, (_, a, b, _) in enumerate(self.dis) if a <= j < b]
            for j in range(m + 1)
        ]

        self.undecided_after = [
            [n for n, (_, a, _, _) in enumerate(self.dis) if a > j] for j in range(m + 1)
        ]

        self.load = [0] * (m + 2)
        self.inflow = [[0] * (m + 2) for _ in range(k)]
        self.level = [0] * k
        self.reroute = [False] * len(self.dis)
        self.empty = [[False] * m for _ in range(k)]
        # (period, carried decisions) -> buffer levels known to fail
        self.failed: dict = {}

        self.nodes = 0
        self.backtracks = 0
        self.t0 = time.perf_counter()
        self.deadline = None if config.time_limit is None else self.t0 + config.time_limit

    # -- bookkeeping -----------------------------------------------------------

    def _tick(self) -> None:
        self.nodes += 1
        if self.cfg.node_limit is not None and self.nodes > self.cfg.node_limit:
            raise _Stop(Unknown("node limit reached"))
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _Stop(Timeout())

    def run(self) -> bool:
        if self.k == 0:
            return True
        return self._period(1)

    # -- periods -----------------------------------------------------------------

    def _period(self, j: int) -> bool:
        return self._reroutes(j, 0)

    def _reroutes(self, j: int, pos: int) -> bool:
        todo = self.starts[j]
        if pos == len(todo):
            return self._empties(j, self._candidates(j), 0)
        n = todo[pos]
        for to_buffer in ((True, False) if self.buffer_first else (False, True)):
            if not self._place(n, to_buffer):
                continue
            self._tick()
            if self._reroutes(j, pos + 1):
                return True
            self.backtracks += 1
            self._unplace(n, to_buffer)
        return False

    def _place(self, n: int, to_buffer: bool) -> bool:
        i, a, b, f = self.dis[n]
        m = self.m
        if not to_buffer:
            load = self.load
            for t in range(a, b + 1):
                if load[t] + f > self.cap:
                    return False
            for t in range(a, b + 1):
                load[t] += f
            self.reroute[n] = False
            return True
        tf = self.tank_flow[i]
        inflow = self.inflow[i]
        # every suffix of committed inflow must be drainable before the deadline
        total = 0
        for s in range(m, a - 1, -1):
            total += inflow[s] + (f if s <= b else 0)
            if total > tf * (m - s):
                return False
        for t in range(a, b + 1):
            inflow[t] += f
        self.reroute[n] = True
        return True

    def _unplace(self, n: int, to_buffer: bool) -> None:
        i, a, b, f = self.dis[n]
        target = self.inflow[i] if to_buffer else self.load
        for t in range(a, b + 1):
            target[t] -= f
        self.reroute[n] = False

    def _candidates(self, j: int) -> list[int]:
        if j == 1:
            return []
        return [
            i for i in range(self.k) if self.level[i] > 0 and self.tank_flow[i] > 0
        ]

    def _empties(self, j: int, cands: list[int], pos: int) -> bool:
        if pos == len(cands):
            if self.cfg.dominance:
                room = self.cap - self.load[j]
                for i in cands:
                    if not self.empty[i][j - 1] and min(self.tank_flow[i], self.level[i]) <= room:
                        return False
            return self._close(j)
        i = cands[pos]
        out = min(self.tank_flow[i], self.level[i])
        for do_empty in ((True, False) if self.empty_first else (False, True)):
            if do_empty:
                if self.load[j] + out > self.cap:
                    continue
                self.load[j] += out
                self.empty[i][j - 1] = True
            self._tick()
            if self._empties(j, cands, pos + 1):
                return True
            self.backtracks += 1
            if do_empty:
                self.load[j] -= out
                self.empty[i][j - 1] = False
        return False

    def _close(self, j: int) -> bool:
        """Advance buffers through period ``j`` and recurse into ``j + 1``."""
        m = self.m
        old = self.level[:]
        new = []
        for i in range(self.k):
            lv = old[i]
            if self.empty[i][j - 1]:
                lv -= min(self.tank_flow[i], lv)
            lv += self.inflow[i][j]
            new.append(lv)
        if j == m:
            return not any(new)
        if j >= 2:
            for i in range(self.k):
                if new[i] > self.tank_cap[i]:
                    return False
        if sum(new) > self.cap * (m - j) - self.vol_after[j]:
            return False
        look = self._lookahead(j)
        if look is None:
            return False
        forced, river, maybe = look
        # plant capacity left unused so far, plus capacity that must stay
        # unused later, cannot exceed the total slack of the instance
        waste = self.cap * j - (self.vol_upto[j] - sum(new))
        avail = new[:]
        for t in range(j + 1, m + 1):
            serve = self.load[t] + river[t]
            for i in range(self.k):
                bound = min(self.tank_flow[i], avail[i])
                if t - 1 >= 2 and self.tank_cap[i] < bound:
                    bound = self.tank_cap[i]
                serve += bound
                avail[i] += self.inflow[i][t] + maybe[i][t]
            if serve < self.cap:
                waste += self.cap - serve
        if waste > self.slack:
            return False
        # suffix[i][s]: committed plus forced inflow of tank i from period s on
        suffix = []
        for i in range(self.k):
            inflow, extra, tf = self.inflow[i], forced[i], self.tank_flow[i]
            row = [0] * (m + 2)
            total = 0
            for s in range(m, j, -1):
                total += inflow[s] + extra[s]
                if total > tf * (m - s):
                    return False
                row[s] = total
            suffix.append(row)
        # backlog bound: what a tank still holds at the start of period s, even
        # when drained at full rate, must leave the tank by m, and together
        # with everything arriving from s on must fit the plant in s..m
        res = new[:]
        for s in range(j + 1, m + 1):
            if sum(res) > self.cap * (m - s + 1) - self.vol_after[s - 1]:
                return False
            for i in range(self.k):
                tf = self.tank_flow[i]
                if res[i] + suffix[i][s] > tf * (m - s + 1):
                    return False
                r = res[i] - tf
                res[i] = (r if r > 0 else 0) + self.inflow[i][s] + forced[i][s]
        bucket = None
        levels = tuple(new)
        if self.cfg.memo:
            key = (j, tuple(self.reroute[n] for n in self.active[j]))
            bucket = self.failed.setdefault(key, [])
            for seen in bucket:
                if all(x >= y for x, y in zip(levels, seen)):
                    return False
        self.level = new
        if self._period(j + 1):
            return True
        self.level = old
        if bucket is not None:
            bucket[:] = [b for b in bucket if not all(x >= y for x, y in zip(b, levels))]
            bucket.append(levels)
        return False

    def _lookahead(self, j: int):
        """Classify discharges starting after ``j``.

        Returns ``(forced, river, inflow)``: per tank, inflow of discharges that
        can no longer go to the river; per period, flow of those that still
        can; per tank, inflow of all undecided discharges.  Returns None when
        some discharge fits neither way.
        """
        m, load, cap = self.m, self.load, self.cap
        forced = [[0] * (m + 2) for _ in range(self.k)]
        maybe = [[0] * (m + 2) for _ in range(self.k)]
        river = [0] * (m + 2)
        for n in self.undecided_after[j]:
            i, a, b, f = self.dis[n]
            row = maybe[i]
            for t in range(a, b + 1):
                row[t] += f
            if all(load[t] + f <= cap for t in range(a, b + 1)):
                for t in range(a, b + 1):
                    river[t] += f
                continue
            tf = self.tank_flow[i]
            inflow = self.inflow[i]
            total = 0
            for s in range(m, a - 1, -1):
                total += inflow[s] + (f if s <= b else 0)
                if total > tf * (m - s):
                    return None
            row = forced[i]
            for t in range(a, b + 1):
                row[t] += f
        return forced, river, maybe

    def witness(self) -> Solution:
        sim = simulate_buffers(self.inst, self.reroute, self.empty)
        if not isinstance(sim, Simulation):
            raise RuntimeError(f"search accepted a schedule the simulator rejects: {sim}")
        return Solution(tuple(self.reroute), sim.bout, sim.buf)


def solve(instance: Instance, config: SolverConfig = SolverConfig()) -> tuple[Verdict, SolveStats]:
    """Decide feasibility of ``instance``.

    Returns ``Sat`` with a verified witness, ``Unsat``, or ``Timeout`` /
    ``Unknown`` when a limit is hit (never a partial witness).
    """
    check_instance(instance)
    search = _Search(instance, config)
    limit = sys.getrecursionlimit()
    need = 4 * (instance.n_discharges + instance.k * instance.periods + instance.periods) + 200
    sys.setrecursionlimit(max(limit, need))
    try:
        if search.run():
            verdict: Verdict = Sat(search.witness())
        else:
            verdict = Unsat()
    except _Stop as stop:
        verdict = stop.verdict
    finally:
        sys.setrecursionlimit(limit)
    stats = SolveStats(
        search.nodes, search.backtracks, time.perf_counter() - search.t0, verdict
    )
    return verdict, stats


# --- exhaustive oracle ---------------------------------------------------------------

DEFAULT_ORACLE_BUDGET = 26


class OracleBudgetExceeded(ValueError):
    pass


def oracle_decisions(instance: Instance) -> int:
    return instance.n_discharges + instance.k * max(instance.periods - 1, 0)


def oracle_solve(instance: Instance, budget: int = DEFAULT_ORACLE_BUDGET) -> Verdict:
    """Exhaustively enumerate reroute vectors and empty/hold matrices.

    For each reroute vector every tank's ``2**(m-1)`` empty/hold rows are
    simulated independently (tanks only interact through the plant), and
    the surviving rows are combined across tanks, rejecting a combination as
    soon as a period's plant load overflows.  The first completed assignment
    is confirmed with :func:`~wwtpp.semantics.verify`.
    """
    check_instance(instance)
    n = oracle_decisions(instance)
    if n > budget:
        raise OracleBudgetExceeded(f"{n} binary decisions exceed the oracle budget {budget}")
    m, k = instance.periods, instance.k
    if k == 0:
        return Sat(Solution.empty(instance))
    d = build_grid(instance)
    patterns = [(False,) + p for p in itertools.product((False, True), repeat=m - 1)]
    for reroute in itertools.product((False, True), repeat=instance.n_discharges):
        c = river_flows(instance, reroute)
        rows_per_tank = []
        for i, ind in enumerate(instance.industries):
            inflow = [d[i][j] - c[i][j] for j in range(m)]
            rows = {}
            for p in patterns:
                res = simulate_row(inflow, ind.tank_capacity, ind.tank_flow, p)
                if not isinstance(res, InfeasibleAt):
                    rows.setdefault(res, None)
            if not rows:
                break
            rows_per_tank.append(list(rows))
        else:
            base = [sum(c[i][j] for i in range(k)) for j in range(m)]
            picked = _combine(rows_per_tank, 0, base, instance.plant_capacity, [])
            if picked is not None:
                solution = Solution(
                    tuple(reroute),
                    tuple(r[0] for r in picked),
                    tuple(r[1] for r in picked),
                )
                report = verify(instance, solution)
                if not report.ok:
                    raise RuntimeError(f"oracle produced a rejected assignment: {report.to_text()}")
                return Sat(solution)
    return Unsat()


def _combine(rows_per_tank, i, load, cap, chosen):
    if i == len(rows_per_tank):
        return list(chosen)
    for row in rows_per_tank[i]:
        bout = row[0]
        new = [x + y for x, y in zip(load, bout)]
        if max(new) > cap:
            continue
        chosen.append(row)
        got = _combine(rows_per_tank, i + 1, new, cap, chosen)
        if got is not None:
            return got
        chosen.pop()
    return None
