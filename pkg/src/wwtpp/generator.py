"""Random instance families and plant-capacity sweeps.

Discharges are fixed first and the plant capacity is swept afterwards; the
capacity at which instances flip from unsatisfiable to satisfiable is where
the search is hardest.
"""

from __future__ import annotations

import csv
import io
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .model import (
    Discharge,
    Industry,
    Instance,
    Sat,
    Timeout,
    Unsat,
    Verdict,
    build_grid,
    check_instance,
)
from .solver import SolverConfig, solve

IntRange = tuple[int, int]


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenParams:
    """Parameters of a random family.

    The defaults give the shape of the larger random benchmark set: 10
    industries, 114 discharges inside a 24-period window, deadline 26.
    Magnitudes are chosen so the summed peak demand is a few times the
    capacity where the unsat/sat switch happens.
    """

    industries: int = 10
    discharges_total: int = 114
    horizon: int = 26
    planning_window: int = 24
    flow_range: IntRange = (200, 2000)
    duration_range: IntRange = (1, 2)
    tank_capacity_range: IntRange = (2000, 6000)
    tank_flow_range: IntRange = (300, 1500)
    seed: int = 0

    def __post_init__(self):
        for name in ("flow_range", "duration_range", "tank_capacity_range", "tank_flow_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo} > {hi}")
        if self.flow_range[0] < 1 or self.duration_range[0] < 1:
            raise ValueError("flows and durations must be positive")
        if self.tank_capacity_range[0] < 0 or self.tank_flow_range[0] < 0:
            raise ValueError("tank sizes must be non-negative")
        if self.industries < 0 or self.discharges_total < 0:
            raise ValueError("counts must be non-negative")
        if self.industries == 0 and self.discharges_total > 0:
            raise ValueError("discharges need at least one industry")
        if not 1 <= self.planning_window <= self.horizon:
            raise ValueError("planning_window must lie in 1..horizon")

    def replace(self, **changes) -> GenParams:
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return GenParams(**values)


def scaled_family_params(seed: int = 0) -> GenParams:
    """Half-scale family: 5 industries, 40 discharges, deadline 13."""
    return GenParams(
        industries=5,
        discharges_total=40,
        horizon=13,
        planning_window=12,
        flow_range=(1, 10),
        duration_range=(1, 2),
        tank_capacity_range=(8, 20),
        tank_flow_range=(2, 6),
        seed=seed,
    )


def desk_family_params(seed: int = 0) -> GenParams:
    """Small family for quick sweeps: 4 industries, 16 discharges, deadline 12."""
    return GenParams(
        industries=4,
        discharges_total=16,
        horizon=12,
        planning_window=11,
        flow_range=(1, 8),
        duration_range=(1, 3),
        tank_capacity_range=(4, 16),
        tank_flow_range=(1, 4),
        seed=seed,
    )


def generate_random(params: GenParams, *, max_rounds: int = 2000) -> Instance:
    """Draw an instance from ``params``; deterministic in ``params.seed``.

    Discharges are split as evenly as possible across industries.  Within an
    industry, durations are drawn by rejection until they fit the planning
    window (after ``max_rounds`` failures each draw is capped so the rest
    still fit), then the idle periods are spread uniformly over the gaps.
    ``plant_capacity`` is left at 0 for the caller (usually a capacity scan)
    to set.
    """
    rng = random.Random(params.seed)
    k, total = params.industries, params.discharges_total
    counts = [total // k] * k if k else []
    for i in sorted(rng.sample(range(k), total % k)) if k else []:
        counts[i] += 1
    window = params.planning_window
    industries = []
    for i, count in enumerate(counts):
        if count * params.duration_range[0] > window:
            raise GenerationError(
                f"industry {i + 1}: {count} discharges of duration >= "
                f"{params.duration_range[0]} cannot fit in {window} periods"
            )
        spans = _place(rng, count, params.duration_range, window, max_rounds)
        if spans is None:
            raise GenerationError(
                f"industry {i + 1}: could not place {count} disjoint discharges "
                f"in {window} periods after {max_rounds} rounds"
            )
        discharges = tuple(
            Discharge(a, b, rng.randint(*params.flow_range)) for a, b in spans
        )
        industries.append(
            Industry(
                str(i + 1),
                rng.randint(*params.tank_capacity_range),
                rng.randint(*params.tank_flow_range),
                discharges,
            )
        )
    return check_instance(Instance(0, params.horizon, tuple(industries)))


def _place(rng, count, duration_range, window, max_rounds):
    # durations are redrawn until they fit; the free periods are then spread
    # over the count + 1 gaps uniformly (stars and bars)
    for _ in range(max_rounds):
        durations = [rng.randint(*duration_range) for _ in range(count)]
        if sum(durations) <= window:
            return _spread(rng, durations, window)
    # nearly full windows: cap each draw so the rest still fits at minimum length
    lo, hi = duration_range
    durations = []
    budget = window - lo * count
    if budget < 0:
        return None
    for _ in range(count):
        dur = rng.randint(lo, min(hi, lo + budget))
        budget -= dur - lo
        durations.append(dur)
    rng.shuffle(durations)
    return _spread(rng, durations, window)


def _spread(rng, durations, window):
    count = len(durations)
    free = window - sum(durations)
    bars = sorted(rng.sample(range(free + count), count))
    spans = []
    t = 1
    for q, (dur, bar) in enumerate(zip(durations, bars)):
        gap = bar - (bars[q - 1] + 1 if q else 0)
        t += gap
        spans.append((t, t + dur - 1))
        t += dur
    return spans


# --- capacity sweeps --------------------------------------------------------------


@dataclass(frozen=True)
class ScanPoint:
    capacity: int
    verdict: str
    elapsed: float
    nodes: int


@dataclass(frozen=True)
class ScanReport:
    points: tuple[ScanPoint, ...]
    threshold: Optional[int] = None
    monotone: bool = True
    switches: int = field(default=0)

    @classmethod
    def from_points(cls, points) -> ScanReport:
        pts = tuple(sorted(points, key=lambda p: p.capacity))
        decided = [p for p in pts if p.verdict in ("sat", "unsat")]
        threshold = next((p.capacity for p in decided if p.verdict == "sat"), None)
        monotone = True
        switches = 0
        seen_sat = False
        for prev, cur in zip(decided, decided[1:]):
            if prev.verdict != cur.verdict:
                switches += 1
        for p in decided:
            if p.verdict == "sat":
                seen_sat = True
            elif seen_sat:
                monotone = False
        return cls(pts, threshold, monotone, switches)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["capacity", "verdict", "ms", "nodes"])
        for p in self.points:
            writer.writerow([p.capacity, p.verdict, f"{p.elapsed * 1000:.3f}", p.nodes])
        return buf.getvalue()

    def hardest(self) -> ScanPoint:
        return max(self.points, key=lambda p: p.elapsed)


SolveFn = Callable[[Instance, Optional[float]], "tuple[Verdict, int]"]


def native_solve(instance: Instance, time_limit: Optional[float] = None) -> tuple[Verdict, int]:
    verdict, stats = solve(instance, SolverConfig(time_limit=time_limit))
    return verdict, stats.nodes_explored


def _run_point(args) -> ScanPoint:
    instance, capacity, solve_fn, limit = args
    inst = instance.with_capacity(capacity)
    t0 = time.perf_counter()
    verdict, nodes = solve_fn(inst, limit)
    elapsed = time.perf_counter() - t0
    if isinstance(verdict, Sat):
        name = "sat"
    elif isinstance(verdict, Unsat):
        name = "unsat"
    elif isinstance(verdict, Timeout):
        name = "timeout"
    else:
        name = "unknown"
    return ScanPoint(capacity, name, elapsed, nodes)


def scan_capacity(
    instance: Instance,
    lo: int,
    hi: int,
    step: int,
    solve_fn: SolveFn = native_solve,
    per_point_limit: Optional[float] = None,
    jobs: int = 1,
) -> ScanReport:
    """Solve ``instance`` at every capacity ``lo, lo+step, ... <= hi``.

    ``solve_fn(instance, time_limit)`` returns ``(verdict, nodes)``.  Points
    that time out stay in the report but are ignored for the threshold and
    the monotonicity flag.  With ``jobs > 1`` points run in worker processes,
    so ``solve_fn`` must be picklable.
    """
    if lo > hi:
        raise ValueError(f"empty sweep: lo {lo} > hi {hi}")
    if step <= 0:
        raise ValueError("step must be positive")
    tasks = [(instance, c, solve_fn, per_point_limit) for c in range(lo, hi + 1, step)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_run_point, tasks))
    else:
        points = [_run_point(t) for t in tasks]
    return ScanReport.from_points(points)


def bracket(instance: Instance) -> tuple[int, int]:
    """A capacity range containing the unsat/sat switch.

    At capacity 0 nothing with a discharge is feasible; at the peak
    per-period demand the all-river schedule fits.
    """
    grid = build_grid(instance)
    peak = max((sum(col) for col in zip(*grid)), default=0)
    return 0, peak
