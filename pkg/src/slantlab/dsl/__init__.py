from .expr import (
    BinOp,
    Call,
    Expr,
    Neg,
    Num,
    Param,
    Pi,
    compile_components,
    eval_expr,
    max_param_index,
    parse_expr,
    to_source,
)
from .scenario import CHECK_NAMES, DEFAULT_COUNT, Scenario, load_scenario

__all__ = [
    "BinOp",
    "Call",
    "Expr",
    "Neg",
    "Num",
    "Param",
    "Pi",
    "compile_components",
    "eval_expr",
    "max_param_index",
    "parse_expr",
    "to_source",
    "CHECK_NAMES",
    "DEFAULT_COUNT",
    "Scenario",
    "load_scenario",
]
