"""Text encodings of an instance for external solvers."""

from .lp import IpVariableMap, Objective, encode_lp, variable_map
from .minizinc import (
    EncodingError,
    MiniZincModel,
    SplitPlan,
    encode_minizinc_cumulative,
    encode_minizinc_naive,
    split_discharge,
)
from .smtlib import (
    ModelParseError,
    SmtOptions,
    encode_smtlib,
    parse_check_sat,
    parse_smt_model,
)
