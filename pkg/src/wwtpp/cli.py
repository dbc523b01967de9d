"""Command-line interface: ``wwtpp <command> ...``.

Exit status: 10 sat/valid/agree, 20 unsat/invalid/disagree, 30 unknown or
timeout, 1 usage or I/O error, 0 for commands that carry no verdict.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from typing import Optional, Sequence

from .encoders import (
    EncodingError,
    Objective,
    SmtOptions,
    encode_lp,
    encode_minizinc_cumulative,
    encode_minizinc_naive,
    encode_smtlib,
)
from .generator import (
    GenParams,
    bracket,
    desk_family_params,
    generate_random,
    scaled_family_params,
    scan_capacity,
)
from .model import (
    InstanceError,
    Sat,
    SolutionFormatError,
    Unsat,
    read_instance,
    read_solution,
    write_instance,
    write_solution,
)
from .runner import Agreement, SolverCommand, SolverSpawnError, compare
from .semantics import VerifyOptions, verify
from .solver import BranchOrder, EmptyOrder, SolverConfig, solve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_UNDECIDED = 30


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wwtpp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_instance(path: str):
    return read_instance(_read(path))


def _verdict_exit(verdict) -> int:
    if isinstance(verdict, Sat):
        return EXIT_SAT
    if isinstance(verdict, Unsat):
        return EXIT_UNSAT
    return EXIT_UNDECIDED


def _ms(value: Optional[float]) -> Optional[float]:
    return None if value is None else value / 1000.0


# --- commands ---------------------------------------------------------------------

_PARAM_FLAGS = {
    "industries": "industries",
    "discharges": "discharges_total",
    "horizon": "horizon",
    "window": "planning_window",
}
_RANGE_FLAGS = {
    "flow": "flow_range",
    "duration": "duration_range",
    "tank_capacity": "tank_capacity_range",
    "tank_flow": "tank_flow_range",
}


def _gen_params(args) -> GenParams:
    if args.family == "scaled":
        params = scaled_family_params()
    elif args.family == "desk":
        params = desk_family_params()
    else:
        params = GenParams()
    if args.params:
        raw = json.loads(_read(args.params))
        if not isinstance(raw, dict):
            raise UsageError("--params file must hold a JSON object")
        unknown = set(raw) - set(GenParams.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown generator parameter(s): {', '.join(sorted(unknown))}")
        raw = {k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()}
        params = params.replace(**raw)
    changes = {}
    for flag, name in _PARAM_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            changes[name] = value
    for flag, name in _RANGE_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            changes[name] = tuple(value)
    changes["seed"] = args.seed
    return params.replace(**changes)


def cmd_generate(args) -> int:
    inst = generate_random(_gen_params(args))
    if args.capacity is not None:
        inst = inst.with_capacity(args.capacity)
    _emit(args.out, write_instance(inst))
    return EXIT_OK


def cmd_encode(args) -> int:
    inst = _load_instance(args.input)
    fmt = args.format
    if fmt == "smt2":
        _emit(args.out, encode_smtlib(inst, SmtOptions(include_redundant=not args.no_redundant)))
    elif fmt == "lp":
        objective = Objective.MIN_BUFFER_SUM if args.objective == "min-buffer-sum" else Objective.NONE
        _emit(args.out, encode_lp(inst, objective))
    else:
        encode = encode_minizinc_naive if fmt == "mzn-naive" else encode_minizinc_cumulative
        model = encode(inst)
        if args.out is None or args.out == "-":
            sys.stdout.write(model.combined())
        else:
            # the data goes next to the model: foo.mzn -> foo.dzn
            base = args.out[:-4] if args.out.endswith(".mzn") else args.out
            write_atomic(base + ".dzn", model.data)
            write_atomic(base + ".mzn" if not args.out.endswith(".mzn") else args.out, model.model)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.input)
    config = SolverConfig(
        time_limit=_ms(args.time_limit),
        node_limit=args.node_limit,
        branch_order=BranchOrder(args.branch),
        empty_order=EmptyOrder(args.empty_order),
    )
    verdict, stats = solve(inst, config)
    print(verdict.name)
    print(
        f"nodes {stats.nodes_explored}, backtracks {stats.backtracks}, "
        f"{stats.elapsed * 1000:.1f} ms",
        file=sys.stderr,
    )
    if isinstance(verdict, Sat) and args.solution:
        write_atomic(args.solution, write_solution(verdict.solution))
    return _verdict_exit(verdict)


def cmd_verify(args) -> int:
    inst = _load_instance(args.input)
    sol = read_solution(_read(args.solution), inst)
    options = VerifyOptions(
        check_redundant=args.check_redundant,
        check_first_period_tank_capacity=args.strict_tank_j1,
    )
    report = verify(inst, sol, options)
    sys.stdout.write(report.to_json() if args.json else report.to_text())
    return EXIT_SAT if report.ok else EXIT_UNSAT


def cmd_scan(args) -> int:
    inst = _load_instance(args.input)
    lo, hi = bracket(inst)
    lo = lo if args.lo is None else args.lo
    hi = hi if args.hi is None else args.hi
    report = scan_capacity(
        inst, lo, hi, args.step, per_point_limit=_ms(args.time_limit), jobs=args.jobs
    )
    _emit(args.out, report.to_csv())
    summary = f"threshold {report.threshold}, switches {report.switches}, monotone {report.monotone}"
    print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    inst = _load_instance(args.input)
    cmd = SolverCommand(args.external, args.kind, _ms(args.timeout))
    report = compare(inst, cmd, SolverConfig(time_limit=_ms(args.time_limit)), args.encoding)
    sys.stdout.write(report.to_text())
    if report.defect:
        return EXIT_UNSAT
    return EXIT_SAT if report.agree is Agreement.AGREE else EXIT_UNDECIDED


# --- parser -----------------------------------------------------------------------


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wwtpp", description="Wastewater treatment plant scheduling toolkit.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", required=True)

    g = sub.add_parser("generate", help="draw a random instance")
    g.add_argument("--params", help="JSON file of generator parameters")
    g.add_argument("--family", choices=("random", "scaled", "desk"), default="random",
                   help="base parameter set (default: random)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--industries", type=int)
    g.add_argument("--discharges", type=int, help="total number of discharges")
    g.add_argument("--horizon", type=int, help="deadline m")
    g.add_argument("--window", type=int, help="periods in which discharges may occur")
    for flag in _RANGE_FLAGS:
        g.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=int, nargs=2,
                       metavar=("LO", "HI"))
    g.add_argument("--capacity", type=int, help="plant capacity (default 0)")
    g.add_argument("--out", help="output file (default stdout)")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("encode", help="write a solver encoding")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--format", required=True, choices=("smt2", "lp", "mzn-naive", "mzn-cumulative"))
    e.add_argument("--no-redundant", action="store_true", help="smt2: omit the redundant bounds")
    e.add_argument("--objective", choices=("none", "min-buffer-sum"), default="none", help="lp only")
    e.add_argument("--out", help="output file; mzn formats also write a sibling .dzn")
    e.set_defaults(func=cmd_encode)

    s = sub.add_parser("solve", help="decide an instance with the native solver")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--time-limit", type=_positive_float, metavar="MS")
    s.add_argument("--node-limit", type=_positive)
    s.add_argument("--branch", choices=[b.value for b in BranchOrder],
                   default=BranchOrder.BIGGEST_DISCHARGE_FIRST.value)
    s.add_argument("--empty-order", choices=[x.value for x in EmptyOrder],
                   default=EmptyOrder.EMPTY_FIRST.value)
    s.add_argument("--solution", help="write the witness here when sat")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution against an instance")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--solution", required=True)
    v.add_argument("--strict-tank-j1", action="store_true",
                   help="also bound the first-period buffer by the tank capacity")
    v.add_argument("--check-redundant", action="store_true")
    v.add_argument("--json", action="store_true", help="machine-readable report")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("scan", help="sweep the plant capacity")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--lo", type=int, help="default 0")
    c.add_argument("--hi", type=int, help="default: peak per-period demand")
    c.add_argument("--step", type=_positive, default=1)
    c.add_argument("--jobs", type=_positive, default=1)
    c.add_argument("--time-limit", type=_positive_float, metavar="MS", help="per point")
    c.add_argument("--out", help="CSV file (default stdout)")
    c.set_defaults(func=cmd_scan)

    x = sub.add_parser("compare", help="run an external solver and the native one")
    x.add_argument("--in", dest="input", required=True)
    x.add_argument("--external", required=True, help='command template, e.g. "z3 -smt2 {}"')
    x.add_argument("--kind", choices=("smt", "milp", "flatzinc"), default="smt")
    x.add_argument("--encoding", choices=("smt2", "lp", "mzn-naive", "mzn-cumulative"))
    x.add_argument("--timeout", type=_positive_float, default=60000.0, metavar="MS",
                   help="external solver timeout")
    x.add_argument("--time-limit", type=_positive_float, metavar="MS", help="native solver limit")
    x.set_defaults(func=cmd_compare)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"wwtpp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, InstanceError, SolutionFormatError, EncodingError, SolverSpawnError,
            ValueError) as exc:
        print(f"wwtpp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
