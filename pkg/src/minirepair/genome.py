"""The (b, u, v) patch genome: operation types, decoding and edit application."""

from __future__ import annotations

import difflib
import enum
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .ingredients import Ingredient, ModificationPoint, PointContext
from .minilang import Program, SourceModule, StatementId, format_program, format_statement_inline, parse_statement
from .minilang.nodes import (
    Assign, Block, If, Return, Statement, ValueType, VarDecl, While, number_function,
)


class Op(enum.IntEnum):
    DELETE = 1
    REPLACE = 2
    INSERT = 3


ALL_OPS = (Op.DELETE, Op.REPLACE, Op.INSERT)
_OP_CODES = {Op.DELETE: "D", Op.REPLACE: "R", Op.INSERT: "I"}


def customize_operation_types(stmt: Statement, context: PointContext, has_ingredients: bool,
                              rules: bool = True) -> tuple:
    ops = list(ALL_OPS)
    if rules:
        if isinstance(stmt, VarDecl):
            ops.remove(Op.DELETE)
        elif context.tail and context.return_type != ValueType.VOID:
            ops.remove(Op.DELETE)
    if not has_ingredients:
        ops = [op for op in ops if op == Op.DELETE]
    return tuple(ops)


@dataclass(frozen=True)
class Patch:
    b: tuple
    u: tuple
    v: tuple

    def __post_init__(self):
        if not len(self.b) == len(self.u) == len(self.v):
            raise ValueError("genome parts must have equal length")

    @property
    def n(self) -> int:
        return len(self.b)

    def check_bounds(self, points: Sequence[ModificationPoint]) -> bool:
        for j, pt in enumerate(points):
            if self.b[j] not in (0, 1):
                return False
            if not 1 <= self.u[j] <= len(pt.ops):
                return False
            if pt.ingredients and not 1 <= self.v[j] <= len(pt.ingredients):
                return False
        return True


@dataclass(frozen=True)
class Edit:
    kind: Op
    target: StatementId
    ingredient: Optional[Ingredient] = None
    point: Optional[int] = None  # index j of the modification point, when decoded

    @property
    def statement(self) -> Optional[Statement]:
        return self.ingredient.statement if self.ingredient is not None else None

    def key(self):
        return (self.target, int(self.kind), self.statement)

    def to_line(self) -> str:
        line = f"{_OP_CODES[self.kind]} {self.target}"
        if self.ingredient is not None:
            line += " " + format_statement_inline(self.ingredient.statement)
        return line


def suppressed(kind: Op, target: Statement, ing: Optional[Ingredient], context: PointContext) -> bool:
    """True when one of the operation-disabling rules voids this edit."""
    if kind == Op.DELETE:
        return False
    s = ing.statement
    if kind == Op.REPLACE:
        if s == target:
            return True
        if isinstance(target, VarDecl) and not isinstance(s, VarDecl):
            return True
        if (isinstance(target, Return) and target.value is not None and context.tail
                and not isinstance(s, Return)):
            return True
        return False
    if isinstance(s, VarDecl) and isinstance(target, VarDecl):
        return True
    if isinstance(s, Return):
        return True
    if isinstance(s, Assign) and isinstance(target, Assign) and s.name == target.name:
        return True
    return False


def decode(x: Patch, points: Sequence[ModificationPoint], rules3: bool = True) -> list[Edit]:
    edits = []
    for j, pt in enumerate(points):
        if not x.b[j]:
            continue
        kind = pt.ops[x.u[j] - 1]
        ing = None
        if kind != Op.DELETE:
            ing = pt.ingredients[x.v[j] - 1]
        if rules3 and suppressed(kind, pt.statement, ing, pt.context):
            continue
        edits.append(Edit(kind, pt.sid, ing, j))
    return edits


def effective_genome(x: Patch, points: Sequence[ModificationPoint], rules3: bool = True) -> Patch:
    """``x`` with b_j reset for every suppressed edit."""
    keep = {e.point for e in decode(x, points, rules3)}
    return replace(x, b=tuple(1 if j in keep else 0 for j in range(x.n)))


# --------------------------------------------------------------------------
# applying edits


def _rewrite_block(block: Block, edits: dict) -> Block:
    out = []
    for s in block.stmts:
        e = edits.get(s.sid)
        if e is None:
            out.append(_rewrite_children(s, edits))
        elif e.kind == Op.DELETE:
            continue
        elif e.kind == Op.REPLACE:
            out.append(e.statement)
        else:
            out.append(e.statement)
            out.append(_rewrite_children(s, edits))
    return Block(tuple(out), block.sid)


def _rewrite_children(s: Statement, edits: dict) -> Statement:
    if isinstance(s, If):
        orelse = _rewrite_block(s.orelse, edits) if s.orelse is not None else None
        return If(s.cond, _rewrite_block(s.then, edits), orelse, s.sid)
    if isinstance(s, While):
        return While(s.cond, _rewrite_block(s.body, edits), s.sid)
    if isinstance(s, Block):
        return _rewrite_block(s, edits)
    return s


def apply_edits(p: Program, edits: Iterable[Edit]) -> Program:
    """Apply edits against the original statement ids of ``p``.

    Only the functions holding a target are rebuilt and renumbered; the
    rest are shared with ``p`` so compilation can reuse them.
    """
    by_function: dict = {}
    for e in edits:
        by_function.setdefault((e.target.module, e.target.function), {})[e.target] = e
    if not by_function:
        return p
    modules = []
    for mod in p.modules:
        functions = []
        for fn in mod.functions:
            todo = by_function.get((mod.name, fn.name))
            if todo is None:
                functions.append(fn)
            else:
                body = _rewrite_block(fn.body, todo)
                functions.append(number_function(mod.name, replace(fn, body=body)))
        if functions == list(mod.functions) and all(a is b for a, b in zip(functions, mod.functions)):
            modules.append(mod)
        else:
            modules.append(SourceModule(mod.name, mod.globals, tuple(functions)))
    return Program(tuple(modules), base=p)


# --------------------------------------------------------------------------
# serialization


def format_edit_script(edits: Sequence[Edit]) -> str:
    return "".join(e.to_line() + "\n" for e in sorted(edits, key=lambda e: e.target))


def parse_edit_script(text: str) -> list[Edit]:
    kinds = {code: op for op, code in _OP_CODES.items()}
    edits = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 2)
        kind = kinds[parts[0]]
        target = StatementId.parse(parts[1])
        ing = None
        if kind != Op.DELETE:
            ing = Ingredient(parse_statement(parts[2]), None, ())
        edits.append(Edit(kind, target, ing))
    return edits


def unified_diff(before: Program, after: Program, name: str = "program.ml") -> str:
    a = format_program(before).splitlines(keepends=True)
    b = format_program(after).splitlines(keepends=True)
    return "".join(difflib.unified_diff(a, b, f"a/{name}", f"b/{name}"))
