"""Native solver against external solvers near each instance's threshold.

Solver commands come from WWTPP_SMT_SOLVER / WWTPP_MILP_SOLVER /
WWTPP_FZN_SOLVER; unset ones are left out.

    WWTPP_SMT_SOLVER="z3 -smt2 {}" \\
    WWTPP_MILP_SOLVER="python3 scripts/highs_lp.py {}" \\
        python3 scripts/solver_comparison.py --seeds 5 --out comparison.csv
"""

import argparse
import csv
import sys

from wwtpp.generator import bracket, desk_family_params, generate_random, scaled_family_params, scan_capacity
from wwtpp.runner import command_from_env, run_external
from wwtpp.solver import SolverConfig, solve

ENCODINGS = {"smt": "smt2", "milp": "lp", "flatzinc": "mzn-cumulative"}


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--family", choices=("desk", "scaled"), default="scaled")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--window", type=int, default=3, help="capacities threshold-W .. threshold+W")
    p.add_argument("--timeout", type=float, default=60.0, help="seconds per run")
    p.add_argument("--out", default="-")
    args = p.parse_args()

    family = desk_family_params if args.family == "desk" else scaled_family_params
    solvers = {kind: command_from_env(kind, args.timeout) for kind in ENCODINGS}
    solvers = {k: v for k, v in solvers.items() if v is not None}
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["seed", "capacity", "solver", "verdict", "ms"])
    for seed in range(args.seeds):
        inst = generate_random(family(seed))
        lo, hi = bracket(inst)
        threshold = scan_capacity(inst, lo, hi, 1, per_point_limit=args.timeout).threshold
        if threshold is None:
            continue
        for cap in range(max(lo, threshold - args.window), min(hi, threshold + args.window) + 1):
            at = inst.with_capacity(cap)
            verdict, stats = solve(at, SolverConfig(time_limit=args.timeout))
            writer.writerow([seed, cap, "native", verdict.name, f"{stats.elapsed * 1000:.3f}"])
            for kind, cmd in solvers.items():
                res = run_external(at, ENCODINGS[kind], cmd)
                writer.writerow([seed, cap, kind, res.verdict.name, f"{res.elapsed * 1000:.3f}"])
            out.flush()


if __name__ == "__main__":
    main()
