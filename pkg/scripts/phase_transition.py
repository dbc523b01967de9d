"""Capacity sweeps over a generated family; one CSV per instance plus a summary.

    python3 scripts/phase_transition.py --family scaled --seeds 20 --out results/scaled
"""

import argparse
import csv
import os
import time

from wwtpp.generator import (
    GenParams,
    bracket,
    desk_family_params,
    generate_random,
    scaled_family_params,
    scan_capacity,
)
from wwtpp.model import write_instance

FAMILIES = {
    "desk": desk_family_params,
    "scaled": scaled_family_params,
    "random": lambda seed: GenParams(seed=seed),
}


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--family", choices=sorted(FAMILIES), default="scaled")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--first-seed", type=int, default=0)
    p.add_argument("--step", type=int, default=0, help="capacity step (default: range / 60, at least 1)")
    p.add_argument("--time-limit", type=float, default=60.0, help="seconds per point")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="results")
    args = p.parse_args()

    os.makedirs(args.out, exist_ok=True)
    summary_path = os.path.join(args.out, "summary.csv")
    with open(summary_path, "w", newline="") as fh:
        summary = csv.writer(fh)
        summary.writerow(["seed", "lo", "hi", "threshold", "switches", "monotone",
                          "timeouts", "hardest_capacity", "hardest_ms", "interior"])
        for seed in range(args.first_seed, args.first_seed + args.seeds):
            inst = generate_random(FAMILIES[args.family](seed))
            lo, hi = bracket(inst)
            step = args.step or max(1, (hi - lo) // 60)
            t0 = time.perf_counter()
            report = scan_capacity(inst, lo, hi, step, per_point_limit=args.time_limit, jobs=args.jobs)
            with open(os.path.join(args.out, f"seed{seed}.wwtpp"), "w") as inst_fh:
                inst_fh.write(write_instance(inst))
            with open(os.path.join(args.out, f"seed{seed}.csv"), "w") as scan_fh:
                scan_fh.write(report.to_csv())
            hard = report.hardest()
            interior = hard.capacity not in (report.points[0].capacity, report.points[-1].capacity)
            timeouts = sum(pt.verdict == "timeout" for pt in report.points)
            summary.writerow([seed, lo, hi, report.threshold, report.switches, report.monotone,
                              timeouts, hard.capacity, f"{hard.elapsed * 1000:.3f}", interior])
            fh.flush()
            print(f"seed {seed}: threshold {report.threshold} in [{lo}, {hi}] step {step}, "
                  f"hardest {hard.capacity} ({hard.elapsed * 1000:.1f} ms), "
                  f"{timeouts} timeouts, {time.perf_counter() - t0:.1f} s", flush=True)
    print(f"summary written to {summary_path}")


if __name__ == "__main__":
    main()
