"""AST node types for MiniLang.

All nodes are frozen dataclasses. Statement ids are excluded from equality
and hashing, so ``==`` on statements is structural AST equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Iterator, NamedTuple, Optional, Union


class ValueType(Enum):
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    STR = "str"
    VOID = "void"

    def __str__(self) -> str:
        return self.value


def assignable(src: ValueType, dst: ValueType) -> bool:
    """True if a value of type ``src`` may be stored where ``dst`` is expected."""
    return src == dst or (src == ValueType.INT and dst == ValueType.FLOAT)


def compatible(a: ValueType, b: ValueType) -> bool:
    return assignable(a, b) or assignable(b, a)


class StatementId(NamedTuple):
    module: str
    function: str
    ordinal: int

    def __str__(self) -> str:
        return f"{self.module}:{self.function}:{self.ordinal}"

    @classmethod
    def parse(cls, text: str) -> "StatementId":
        module, function, ordinal = text.strip().split(":")
        return cls(module, function, int(ordinal))


# --------------------------------------------------------------------------
# expressions


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int


@dataclass(frozen=True, slots=True)
class FloatLit:
    value: float


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool


@dataclass(frozen=True, slots=True)
class StrLit:
    value: str


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Unary:
    op: str  # "-" or "!"
    operand: "Expr"


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Union[IntLit, FloatLit, BoolLit, StrLit, Var, Unary, Binary, Call]
Literal = Union[IntLit, FloatLit, BoolLit, StrLit]


# --------------------------------------------------------------------------
# statements


@dataclass(frozen=True, slots=True)
class Block:
    """A brace-delimited statement list.

    Bodies of functions, ``if`` and ``while`` are Blocks with ``sid=None``;
    a bare ``{ ... }`` appearing as a statement carries its own id.
    """

    stmts: tuple["Statement", ...]
    sid: Optional[StatementId] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class VarDecl:
    name: str
    type: ValueType
    init: Expr
    sid: Optional[StatementId] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Assign:
    name: str
    value: Expr
    sid: Optional[StatementId] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class If:
    cond: Expr
    then: Block
    orelse: Optional[Block] = None
    sid: Optional[StatementId] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class While:
    cond: Expr
    body: Block
    sid: Optional[StatementId] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Return:
    value: Optional[Expr] = None
    sid: Optional[StatementId] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Break:
    sid: Optional[StatementId] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Continue:
    sid: Optional[StatementId] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class CallStmt:
    call: Call
    sid: Optional[StatementId] = field(default=None, compare=False)


Statement = Union[VarDecl, Assign, If, While, Return, Break, Continue, CallStmt, Block]


def child_blocks(stmt: Statement) -> tuple[Block, ...]:
    """Nested statement lists owned by ``stmt`` (not counting ``stmt`` itself)."""
    if isinstance(stmt, If):
        return (stmt.then,) if stmt.orelse is None else (stmt.then, stmt.orelse)
    if isinstance(stmt, While):
        return (stmt.body,)
    if isinstance(stmt, Block):
        return (stmt,)
    return ()


def iter_statements(block: Block) -> Iterator[Statement]:
    """Pre-order walk over every statement nested in ``block``."""
    for stmt in block.stmts:
        yield stmt
        for inner in child_blocks(stmt):
            yield from iter_statements(inner)


def strip_ids(stmt: Statement) -> Statement:
    """Return ``stmt`` with all statement ids cleared (recursively)."""
    return renumber_statement(stmt, None)


def renumber_statement(stmt: Statement, make_id) -> Statement:
    """Rebuild ``stmt`` assigning ids from ``make_id()`` in pre-order.

    ``make_id=None`` clears ids instead.
    """
    sid = make_id() if make_id is not None else None
    if isinstance(stmt, If):
        then = _renumber_block(stmt.then, make_id)
        orelse = _renumber_block(stmt.orelse, make_id) if stmt.orelse is not None else None
        return If(stmt.cond, then, orelse, sid)
    if isinstance(stmt, While):
        return While(stmt.cond, _renumber_block(stmt.body, make_id), sid)
    if isinstance(stmt, Block):
        return Block(_renumber_block(stmt, make_id).stmts, sid)
    return replace(stmt, sid=sid)


def _renumber_block(block: Block, make_id) -> Block:
    return Block(tuple(renumber_statement(s, make_id) for s in block.stmts))


# --------------------------------------------------------------------------
# declarations


@dataclass(frozen=True, slots=True)
class Param:
    name: str
    type: ValueType


@dataclass(frozen=True, slots=True)
class Signature:
    params: tuple[ValueType, ...]
    ret: ValueType

    def __str__(self) -> str:
        return f"({', '.join(map(str, self.params))}) -> {self.ret}"


@dataclass(frozen=True, slots=True)
class FunctionDef:
    name: str
    params: tuple[Param, ...]
    return_type: ValueType
    body: Block
    public: bool = False

    @property
    def signature(self) -> Signature:
        return Signature(tuple(p.type for p in self.params), self.return_type)


@dataclass(frozen=True, slots=True)
class SourceModule:
    name: str
    globals: tuple[VarDecl, ...]
    functions: tuple[FunctionDef, ...]

    def function(self, name: str) -> Optional[FunctionDef]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


class StmtInfo(NamedTuple):
    """Where a statement sits in its program."""

    module: SourceModule
    function: FunctionDef
    path: tuple[Statement, ...]  # enclosing compound statements, outermost first
    block: Block  # the statement list that contains it
    index: int  # position within ``block.stmts``
    in_loop: bool
    tail: bool  # on the exit path of the function body


@dataclass(frozen=True)
class Program:
    modules: tuple[SourceModule, ...]
    # program this one was derived from by patching; lets the compiler reuse
    # work for functions that were not touched
    base: Optional["Program"] = field(default=None, compare=False, repr=False)

    def module(self, name: str) -> Optional[SourceModule]:
        for m in self.modules:
            if m.name == name:
                return m
        return None

    @cached_property
    def index(self) -> dict[StatementId, StmtInfo]:
        out: dict[StatementId, StmtInfo] = {}
        for mod in self.modules:
            for fn in mod.functions:
                _index_block(out, mod, fn, fn.body, (), False, True)
        return out

    def statement(self, sid: StatementId) -> Statement:
        info = self.index[sid]
        return info.block.stmts[info.index]

    def statements(self) -> Iterator[Statement]:
        for mod in self.modules:
            for fn in mod.functions:
                yield from iter_statements(fn.body)

    def count_statements(self) -> int:
        return len(self.index)


def _index_block(out, mod, fn, block, path, in_loop, tail):
    last = len(block.stmts) - 1
    for i, stmt in enumerate(block.stmts):
        is_tail = tail and i == last
        out[stmt.sid] = StmtInfo(mod, fn, path, block, i, in_loop, is_tail)
        inner_path = path + (stmt,)
        if isinstance(stmt, If):
            # only an if/else can carry the function's exit path
            branch_tail = is_tail and stmt.orelse is not None
            _index_block(out, mod, fn, stmt.then, inner_path, in_loop, branch_tail)
            if stmt.orelse is not None:
                _index_block(out, mod, fn, stmt.orelse, inner_path, in_loop, branch_tail)
        elif isinstance(stmt, While):
            _index_block(out, mod, fn, stmt.body, inner_path, True, False)
        elif isinstance(stmt, Block):
            _index_block(out, mod, fn, stmt, inner_path, in_loop, is_tail)


def definitely_returns(stmt: Statement) -> bool:
    """Conservative check that executing ``stmt`` always ends in a return."""
    if isinstance(stmt, Return):
        return True
    if isinstance(stmt, If):
        return stmt.orelse is not None and block_returns(stmt.then) and block_returns(stmt.orelse)
    if isinstance(stmt, Block):
        return block_returns(stmt)
    return False


def block_returns(block: Block) -> bool:
    # judged on the last statement only, matching how tail positions are indexed
    return bool(block.stmts) and definitely_returns(block.stmts[-1])


def number_function(module: str, fn: FunctionDef) -> FunctionDef:
    """Assign fresh ordinals (1-based, source order) to every statement of ``fn``."""
    counter = iter(range(1, 1 << 30))

    def make_id():
        return StatementId(module, fn.name, next(counter))

    return replace(fn, body=_renumber_block(fn.body, make_id))
