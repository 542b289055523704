"""Unit-test execution with statement coverage.

Test-suite files hold one test per line::

    # name: module.function(literal args) => expected
    add_small: calc.add(2, 3) => 5
    div_zero: calc.div(1, 0) => !error
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .compiler import (
    MiniRuntimeError, Runtime, StaticError, StepLimitExceeded, compile_program,
)
from .nodes import (
    BoolLit, Call, FloatLit, IntLit, Program, StatementId, StrLit, ValueType, assignable,
)
from .parser import MiniSyntaxError, Parser
from .printer import format_float

DEFAULT_STEP_LIMIT = 100_000
FLOAT_TOLERANCE = 1e-9

Value = Union[int, float, bool, str]


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    RUNTIME_ERROR = "runtime_error"
    STEP_LIMIT = "step_limit_exceeded"


@dataclass(frozen=True)
class TestCase:
    name: str
    module: str
    function: str
    args: tuple
    expected: Optional[Value] = None
    expect_error: bool = False

    __test__ = False  # keep pytest from collecting this class

    def call_text(self) -> str:
        return f"{self.module}.{self.function}({', '.join(format_value(a) for a in self.args)})"

    def to_line(self) -> str:
        rhs = "!error" if self.expect_error else format_value(self.expected)
        return f"{self.name}: {self.call_text()} => {rhs}"


@dataclass(frozen=True)
class ExecutionOutcome:
    verdict: Verdict
    covered: frozenset
    steps_used: int
    value: object = None  # returned value, or the error message

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    return str(v)


def _literal_value(expr, line_no: int):
    if isinstance(expr, (IntLit, FloatLit, BoolLit, StrLit)):
        return expr.value
    raise MiniSyntaxError("test arguments and expectations must be literals", line_no, 1)


_TEST_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*:\s*([A-Za-z_][A-Za-z_0-9]*)\.(.*?)=>(.*)$")


def parse_suite(text: str) -> list[TestCase]:
    tests = []
    names = set()
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _TEST_LINE.match(line)
        if m is None:
            raise MiniSyntaxError("expected `name: module.function(args) => expected`", line_no, 1)
        name, module, call_text, rhs = m.groups()
        if name in names:
            raise MiniSyntaxError(f"duplicate test name {name!r}", line_no, 1)
        names.add(name)
        p = Parser(call_text)
        call = p.parse_postfix()
        p.finish()
        if not isinstance(call, Call):
            raise MiniSyntaxError("expected a function call", line_no, 1)
        args = tuple(_literal_value(a, line_no) for a in call.args)
        rhs = rhs.strip()
        if rhs == "!error":
            tests.append(TestCase(name, module, call.name, args, None, True))
        else:
            q = Parser(rhs)
            expected = q.parse_expr()
            q.finish()
            tests.append(TestCase(name, module, call.name, args, _literal_value(expected, line_no)))
    return tests


def load_suite(path) -> list[TestCase]:
    return parse_suite(Path(path).read_text(encoding="utf-8"))


def format_suite(tests: Sequence[TestCase]) -> str:
    return "".join(t.to_line() + "\n" for t in tests)


def _value_type(v) -> ValueType:
    if isinstance(v, bool):
        return ValueType.BOOL
    if isinstance(v, int):
        return ValueType.INT
    if isinstance(v, float):
        return ValueType.FLOAT
    return ValueType.STR


def check_suite(p: Program, tests: Sequence[TestCase]) -> None:
    """Raise StaticError unless every test calls an existing public function correctly."""
    for t in tests:
        mod = p.module(t.module)
        fn = mod.function(t.function) if mod is not None else None
        if fn is None:
            raise StaticError("unresolved name", f"test {t.name}: no function {t.module}.{t.function}")
        if not fn.public:
            raise StaticError("visibility", f"test {t.name}: {t.module}.{t.function} is not public")
        if len(t.args) != len(fn.params):
            raise StaticError("arity mismatch", f"test {t.name}: wrong number of arguments")
        for a, prm in zip(t.args, fn.params):
            if not assignable(_value_type(a), prm.type):
                raise StaticError("type mismatch", f"test {t.name}: argument {a!r} for {prm.name}: {prm.type}")
        if not t.expect_error:
            if not assignable(_value_type(t.expected), fn.return_type):
                raise StaticError("type mismatch", f"test {t.name}: expectation does not match return type")


def values_equal(actual, expected) -> bool:
    if actual is None or expected is None:
        return actual is expected
    if isinstance(actual, bool) or isinstance(expected, bool):
        return type(actual) is type(expected) and actual == expected
    if isinstance(actual, float) or isinstance(expected, float):
        if isinstance(actual, str) or isinstance(expected, str):
            return False
        return abs(actual - expected) <= FLOAT_TOLERANCE
    return type(actual) is type(expected) and actual == expected


def execute_test(p: Program, t: TestCase, step_limit: int = DEFAULT_STEP_LIMIT) -> ExecutionOutcome:
    """Run one test on a validated program.

    Raises StaticError if ``p`` does not validate; every other failure mode
    is folded into the returned verdict.
    """
    compiled = compile_program(p)
    enter, sig = compiled.entry(t.module, t.function)
    rt = Runtime(compiled, step_limit)
    args = [float(a) if pt == ValueType.FLOAT else a for a, pt in zip(t.args, sig.params)]
    try:
        value = enter(args, rt)
    except StepLimitExceeded:
        return ExecutionOutcome(Verdict.STEP_LIMIT, frozenset(rt.covered), rt.steps)
    except MiniRuntimeError as err:
        verdict = Verdict.PASS if t.expect_error else Verdict.RUNTIME_ERROR
        return ExecutionOutcome(verdict, frozenset(rt.covered), rt.steps, str(err))
    except RecursionError:
        verdict = Verdict.PASS if t.expect_error else Verdict.RUNTIME_ERROR
        return ExecutionOutcome(verdict, frozenset(rt.covered), rt.steps, "stack overflow")
    if t.expect_error:
        verdict = Verdict.FAIL
    else:
        verdict = Verdict.PASS if values_equal(value, t.expected) else Verdict.FAIL
    return ExecutionOutcome(verdict, frozenset(rt.covered), rt.steps, value)


def run_verdict(p: Program, t: TestCase, step_limit: int = DEFAULT_STEP_LIMIT) -> Verdict:
    """Like :func:`execute_test` but skips materializing the coverage set."""
    compiled = compile_program(p)
    enter, sig = compiled.entry(t.module, t.function)
    rt = Runtime(compiled, step_limit)
    args = [float(a) if pt == ValueType.FLOAT else a for a, pt in zip(t.args, sig.params)]
    try:
        value = enter(args, rt)
    except StepLimitExceeded:
        return Verdict.STEP_LIMIT
    except (MiniRuntimeError, RecursionError):
        return Verdict.PASS if t.expect_error else Verdict.RUNTIME_ERROR
    if t.expect_error:
        return Verdict.FAIL
    return Verdict.PASS if values_equal(value, t.expected) else Verdict.FAIL


def statement_ids(p: Program) -> list[StatementId]:
    return list(p.index)
