"""Canonical text form: one statement per line, four-space indentation."""

from __future__ import annotations

from .nodes import (
    Assign, Binary, Block, BoolLit, Break, Call, CallStmt, Continue, Expr, FloatLit,
    FunctionDef, If, IntLit, Program, Return, SourceModule, Statement, StrLit, Unary,
    Var, VarDecl, While,
)

_BINARY_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7
_INDENT = "    "


def format_float(value: float) -> str:
    text = repr(float(value))
    if text in ("inf", "-inf", "nan"):
        raise ValueError(f"float literal {text} has no MiniLang spelling")
    return text


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def format_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        text, prec = str(e.value), 8
        if e.value < 0:
            text, prec = f"-{-e.value}", _UNARY_PREC
    elif isinstance(e, FloatLit):
        text, prec = format_float(e.value), 8
        if text.startswith("-"):
            prec = _UNARY_PREC
    elif isinstance(e, BoolLit):
        text, prec = ("true" if e.value else "false"), 8
    elif isinstance(e, StrLit):
        text, prec = _quote(e.value), 8
    elif isinstance(e, Var):
        text, prec = e.name, 8
    elif isinstance(e, Call):
        text, prec = f"{e.name}({', '.join(format_expr(a) for a in e.args)})", 8
    elif isinstance(e, Unary):
        inner = format_expr(e.operand, _UNARY_PREC)
        if e.op == "-" and inner.startswith("-"):
            inner = f"({inner})"  # `--x` would re-lex as two negations of a folded literal
        text, prec = e.op + inner, _UNARY_PREC
    elif isinstance(e, Binary):
        prec = _BINARY_PREC[e.op]
        # left-associative: a right operand of equal precedence needs parens
        text = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec + 1)}"
    else:
        raise TypeError(f"not an expression: {e!r}")
    return f"({text})" if prec < parent_prec else text


def _lines(stmt: Statement, depth: int, out: list[str]) -> None:
    pad = _INDENT * depth
    if isinstance(stmt, VarDecl):
        out.append(f"{pad}var {stmt.name}: {stmt.type} = {format_expr(stmt.init)}")
    elif isinstance(stmt, Assign):
        out.append(f"{pad}{stmt.name} = {format_expr(stmt.value)}")
    elif isinstance(stmt, If):
        out.append(f"{pad}if ({format_expr(stmt.cond)}) {{")
        _block_lines(stmt.then, depth + 1, out)
        if stmt.orelse is not None:
            out.append(f"{pad}}} else {{")
            _block_lines(stmt.orelse, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, While):
        out.append(f"{pad}while ({format_expr(stmt.cond)}) {{")
        _block_lines(stmt.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, Return):
        out.append(f"{pad}return" if stmt.value is None else f"{pad}return {format_expr(stmt.value)}")
    elif isinstance(stmt, Break):
        out.append(f"{pad}break")
    elif isinstance(stmt, Continue):
        out.append(f"{pad}continue")
    elif isinstance(stmt, CallStmt):
        out.append(pad + format_expr(stmt.call))
    elif isinstance(stmt, Block):
        out.append(f"{pad}{{")
        _block_lines(stmt, depth + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {stmt!r}")


def _block_lines(block: Block, depth: int, out: list[str]) -> None:
    for s in block.stmts:
        _lines(s, depth, out)


def format_statement(stmt: Statement, depth: int = 0) -> str:
    out: list[str] = []
    _lines(stmt, depth, out)
    return "\n".join(out)


def format_statement_inline(stmt: Statement) -> str:
    """Single-line rendering; nested statements are joined with ``;``."""
    if isinstance(stmt, If):
        text = f"if ({format_expr(stmt.cond)}) {_inline_block(stmt.then)}"
        if stmt.orelse is not None:
            text += f" else {_inline_block(stmt.orelse)}"
        return text
    if isinstance(stmt, While):
        return f"while ({format_expr(stmt.cond)}) {_inline_block(stmt.body)}"
    if isinstance(stmt, Block):
        return _inline_block(stmt)
    return format_statement(stmt)


def _inline_block(block: Block) -> str:
    if not block.stmts:
        return "{ }"
    return "{ " + "; ".join(format_statement_inline(s) for s in block.stmts) + " }"


def format_function(fn: FunctionDef) -> str:
    params = ", ".join(f"{p.name}: {p.type}" for p in fn.params)
    head = f"{'pub ' if fn.public else ''}fn {fn.name}({params}) -> {fn.return_type} {{"
    out = [head]
    _block_lines(fn.body, 1, out)
    out.append("}")
    return "\n".join(out)


def format_module(mod: SourceModule) -> str:
    parts = [f"module {mod.name}"]
    if mod.globals:
        parts.append("\n".join(format_statement(g) for g in mod.globals))
    parts.extend(format_function(fn) for fn in mod.functions)
    return "\n\n".join(parts) + "\n"


def format_program(p: Program) -> str:
    return "\n".join(format_module(m) for m in p.modules)


def statement_lines(p: Program) -> dict:
    """Map each statement id to its 1-based line in ``format_program(p)``."""
    lines: dict = {}
    lineno = 1
    for mi, mod in enumerate(p.modules):
        if mi:
            lineno += 1  # blank line between modules
        lineno += 1  # module header
        if mod.globals:
            lineno += 1 + len(mod.globals)
        for fn in mod.functions:
            lineno += 2  # blank line + signature
            lineno = _number_lines(fn.body, lineno, lines)
            lineno += 1  # closing brace
    return lines


def _number_lines(block: Block, lineno: int, lines: dict) -> int:
    for s in block.stmts:
        lines[s.sid] = lineno
        lineno += 1
        if isinstance(s, If):
            lineno = _number_lines(s.then, lineno, lines)
            if s.orelse is not None:
                lineno = _number_lines(s.orelse, lineno + 1, lines)
            lineno += 1
        elif isinstance(s, (While, Block)):
            lineno = _number_lines(s.body if isinstance(s, While) else s, lineno, lines)
            lineno += 1
    return lineno
