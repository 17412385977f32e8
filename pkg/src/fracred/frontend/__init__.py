"""Problem files, the right-hand-side expression language and the CLI."""

from .expr import (affine_form, compile_expression, eval_expression, parse_expression, parse_power_sum,
                   render)
from .problem import ProblemFile, load_problem, read_problem

__all__ = ["ProblemFile", "affine_form", "compile_expression", "eval_expression", "load_problem",
           "parse_expression", "parse_power_sum", "read_problem", "render"]
