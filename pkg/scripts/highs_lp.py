"""Solve an LP-format file with HiGHS and print a one-word status.

Usable as a MILP command template for the runner, e.g.
WWTPP_MILP_SOLVER="python3 scripts/highs_lp.py {}".
"""

import sys

import highspy


def main(path: str) -> int:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(path)
    h.run()
    status = h.getModelStatus()
    text = h.modelStatusToString(status).lower()
    if status == highspy.HighsModelStatus.kInfeasible:
        print("infeasible")
    elif status in (highspy.HighsModelStatus.kOptimal, highspy.HighsModelStatus.kModelEmpty):
        print("optimal")
    else:
        print(f"unknown: {text}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
