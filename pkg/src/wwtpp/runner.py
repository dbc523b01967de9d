"""Run external solvers on encoded instances and reconcile with the native solver.

Solver commands are templates with a single ``{}`` standing for the path of
the encoded input file, e.g. ``z3 -smt2 {}``.  They come from the caller or
from the environment (``WWTPP_SMT_SOLVER``, ``WWTPP_MILP_SOLVER``,
``WWTPP_FZN_SOLVER``); nothing is hard-coded.
"""

from __future__ import annotations

import enum
import logging
import os
import shlex
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass
from typing import Optional

from .encoders import (
    ModelParseError,
    encode_lp,
    encode_minizinc_cumulative,
    encode_minizinc_naive,
    encode_smtlib,
    parse_check_sat,
    parse_smt_model,
)
from .model import Instance, Sat, Timeout, Unknown, Unsat, Verdict, is_decided
from .semantics import verify
from .solver import SolverConfig, solve

log = logging.getLogger(__name__)

PLACEHOLDER = "{}"
ENV_VARS = {
    "smt": "WWTPP_SMT_SOLVER",
    "milp": "WWTPP_MILP_SOLVER",
    "flatzinc": "WWTPP_FZN_SOLVER",
}
ENV_TIMEOUT = "WWTPP_SOLVER_TIMEOUT"
ENV_TMPDIR = "WWTPP_TMPDIR"


class SolverKind(str, enum.Enum):
    SMT = "smt"
    MILP = "milp"
    FLATZINC = "flatzinc"


class SolverSpawnError(RuntimeError):
    """The solver process could not be started."""


# encoding name -> (file suffix, solver kind that can read it)
ENCODINGS = {
    "smt2": (".smt2", SolverKind.SMT),
    "lp": (".lp", SolverKind.MILP),
    "mzn-naive": (".mzn", SolverKind.FLATZINC),
    "mzn-cumulative": (".mzn", SolverKind.FLATZINC),
}
DEFAULT_ENCODING = {
    SolverKind.SMT: "smt2",
    SolverKind.MILP: "lp",
    SolverKind.FLATZINC: "mzn-cumulative",
}


@dataclass(frozen=True)
class SolverCommand:
    command_template: str
    kind: SolverKind = SolverKind.SMT
    timeout: float = 60.0  # seconds

    def __post_init__(self):
        object.__setattr__(self, "kind", SolverKind(self.kind))
        count = self.command_template.count(PLACEHOLDER)
        if count != 1:
            raise ValueError(
                f"command template must contain exactly one {PLACEHOLDER!r}, found {count}"
            )
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    def argv(self, path: str) -> list[str]:
        return shlex.split(self.command_template.replace(PLACEHOLDER, shlex.quote(path)))


def command_from_env(kind: SolverKind | str, timeout: Optional[float] = None) -> Optional[SolverCommand]:
    """The configured command for ``kind``, or None when the variable is unset."""
    kind = SolverKind(kind)
    template = os.environ.get(ENV_VARS[kind.value], "").strip()
    if not template:
        return None
    if timeout is None:
        timeout = float(os.environ.get(ENV_TIMEOUT, "60"))
    return SolverCommand(template, kind, timeout)


@dataclass(frozen=True)
class ExternalResult:
    """Outcome of one external run.

    Only the SMT path decodes a witness; ``Sat`` from the other kinds has
    ``solution`` set to None.
    """

    verdict: Verdict
    raw_output: str
    elapsed: float  # seconds
    exit_status: Optional[int]


def encode_for(instance: Instance, encoding: str) -> str:
    if encoding == "smt2":
        return encode_smtlib(instance)
    if encoding == "lp":
        return encode_lp(instance)
    if encoding == "mzn-naive":
        return encode_minizinc_naive(instance).combined()
    if encoding == "mzn-cumulative":
        return encode_minizinc_cumulative(instance).combined()
    raise ValueError(f"unknown encoding {encoding!r}")


def parse_output(instance: Instance, kind: SolverKind, text: str) -> Verdict:
    """Map solver output to a verdict; unrecognized output is Unknown."""
    if kind is SolverKind.SMT:
        word = parse_check_sat(text)
        if word == "unsat":
            return Unsat()
        if word == "sat":
            try:
                return Sat(parse_smt_model(text, instance))
            except ModelParseError as exc:
                return Unknown(f"sat without a usable model: {exc}")
        if word == "unknown":
            return Unknown("solver answered unknown")
        return Unknown("unrecognized solver output")
    if kind is SolverKind.FLATZINC:
        if "=====UNSATISFIABLE=====" in text:
            return Unsat()
        if "=====UNKNOWN=====" in text:
            return Unknown("solver answered unknown")
        if "----------" in text or "SATISFIABLE" in text:
            return Sat(None)
        return Unknown("unrecognized solver output")
    lowered = text.lower()
    # "infeasible" contains "feasible", so it is checked first
    if "infeasible" in lowered:
        return Unsat()
    if "optimal" in lowered or "feasible" in lowered:
        return Sat(None)
    return Unknown("unrecognized solver output")


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except ProcessLookupError:
        pass


def run_external(
    instance: Instance,
    encoding_kind: Optional[str],
    cmd: SolverCommand,
    tmp_dir: Optional[str] = None,
) -> ExternalResult:
    """Encode ``instance``, run ``cmd`` on the file and map its output.

    ``encoding_kind`` is one of ``smt2``, ``lp``, ``mzn-naive``,
    ``mzn-cumulative`` (None picks the default for ``cmd.kind``).  The
    solver runs in its own process group, which is killed on timeout.
    The temporary directory is removed unless the run failed to decide.
    """
    encoding = encoding_kind or DEFAULT_ENCODING[cmd.kind]
    if encoding not in ENCODINGS:
        raise ValueError(f"unknown encoding {encoding!r}")
    suffix, reader = ENCODINGS[encoding]
    if reader is not cmd.kind:
        raise ValueError(f"encoding {encoding!r} cannot be read by a {cmd.kind.value} solver")
    text = encode_for(instance, encoding)

    work = tempfile.mkdtemp(prefix="wwtpp-", dir=tmp_dir or os.environ.get(ENV_TMPDIR) or None)
    path = os.path.join(work, "instance" + suffix)
    with open(path, "w") as fh:
        fh.write(text)

    argv = cmd.argv(path)
    t0 = time.perf_counter()
    try:
        proc = subprocess.Popen(
            argv,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            stdin=subprocess.DEVNULL,
            text=True,
            start_new_session=True,
        )
    except OSError as exc:
        log.warning("solver failed to start; input kept at %s", path)
        raise SolverSpawnError(f"cannot run {argv[0]!r}: {exc}") from exc

    try:
        out, _ = proc.communicate(timeout=cmd.timeout)
        verdict = parse_output(instance, cmd.kind, out)
    except subprocess.TimeoutExpired:
        _kill_group(proc)
        out, _ = proc.communicate()
        verdict = Timeout()
    finally:
        # the solver may have left children behind in its group
        _kill_group(proc)
    elapsed = time.perf_counter() - t0

    if is_decided(verdict):
        _remove(work)
    else:
        log.warning("solver gave no verdict (%s); input kept at %s", verdict.name, path)
    return ExternalResult(verdict, out or "", elapsed, proc.returncode)


def _remove(directory: str) -> None:
    for name in os.listdir(directory):
        os.unlink(os.path.join(directory, name))
    os.rmdir(directory)


# --- agreement --------------------------------------------------------------------


class Agreement(str, enum.Enum):
    AGREE = "agree"
    DISAGREE = "disagree"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class AgreementReport:
    native: Verdict
    external: Verdict
    agree: Agreement
    native_elapsed: float
    external_elapsed: float
    native_witness_ok: Optional[bool]  # None when there is no witness
    external_witness_ok: Optional[bool]

    @property
    def defect(self) -> bool:
        """A decided disagreement or a witness that fails verification."""
        return (
            self.agree is Agreement.DISAGREE
            or self.native_witness_ok is False
            or self.external_witness_ok is False
        )

    def to_text(self) -> str:
        def fmt(ok):
            return "n/a" if ok is None else ("valid" if ok else "INVALID")

        lines = [
            f"native:   {self.native.name} ({self.native_elapsed * 1000:.1f} ms, witness {fmt(self.native_witness_ok)})",
            f"external: {self.external.name} ({self.external_elapsed * 1000:.1f} ms, witness {fmt(self.external_witness_ok)})",
            f"agreement: {self.agree.value}",
        ]
        if self.defect:
            lines.append("DEFECT: native and external results are inconsistent")
        return "\n".join(lines) + "\n"


def _witness_ok(instance: Instance, verdict: Verdict) -> Optional[bool]:
    if isinstance(verdict, Sat) and verdict.solution is not None:
        return verify(instance, verdict.solution).ok
    return None


def agreement(native: Verdict, external: Verdict) -> Agreement:
    if not (is_decided(native) and is_decided(external)):
        return Agreement.INDETERMINATE
    return Agreement.AGREE if native.name == external.name else Agreement.DISAGREE


def compare(
    instance: Instance,
    cmd: SolverCommand,
    config: SolverConfig = SolverConfig(),
    encoding_kind: Optional[str] = None,
    tmp_dir: Optional[str] = None,
) -> AgreementReport:
    native, stats = solve(instance, config)
    ext = run_external(instance, encoding_kind, cmd, tmp_dir)
    report = AgreementReport(
        native,
        ext.verdict,
        agreement(native, ext.verdict),
        stats.elapsed,
        ext.elapsed,
        _witness_ok(instance, native),
        _witness_ok(instance, ext.verdict),
    )
    if report.defect:
        log.error("native/external defect on instance: %s", report.to_text().strip())
    return report
