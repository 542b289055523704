"""MiniLang: the small imperative language that programs under repair are written in."""

from .compiler import (
    MiniRuntimeError, StaticError, StepLimitExceeded, check_statement, compile_program,
    is_valid, validate_program,
)
from .interpreter import (
    DEFAULT_STEP_LIMIT, ExecutionOutcome, TestCase, Verdict, check_suite, execute_test,
    format_suite, load_suite, parse_suite, run_verdict,
)
from .nodes import (
    Assign, Binary, Block, BoolLit, Break, Call, CallStmt, Continue, FloatLit, FunctionDef,
    If, IntLit, Param, Program, Return, Signature, SourceModule, StatementId, StrLit, Unary,
    ValueType, Var, VarDecl, While,
)
from .parser import MiniSyntaxError, parse_expression, parse_program, parse_statement
from .printer import format_expr, format_program, format_statement, format_statement_inline
