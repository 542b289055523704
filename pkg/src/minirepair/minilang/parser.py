"""Recursive-descent parser for MiniLang source and test-suite files.

Newlines terminate statements (``;`` is accepted as well), so the canonical
one-statement-per-line layout and compact one-line forms such as
``fn f() -> int { return 1 }`` both parse.
"""

from __future__ import annotations

import re
from typing import Optional

from .nodes import (
    Assign, Binary, Block, BoolLit, Break, Call, CallStmt, Continue, Expr, FloatLit,
    FunctionDef, If, IntLit, Param, Program, Return, SourceModule, Statement, StrLit,
    Unary, ValueType, Var, VarDecl, While, number_function,
)


class MiniSyntaxError(SyntaxError):
    """Malformed MiniLang text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.msg_text = message
        self.line = line
        self.col = col


KEYWORDS = {
    "module", "pub", "fn", "var", "if", "else", "while", "return", "break",
    "continue", "true", "false",
}
TYPE_NAMES = {t.value: t for t in ValueType}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|=>|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){}:,;.])
    """,
    re.VERBOSE,
)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise MiniSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok_text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            tokens.append(Token("nl", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "ident":
            if tok_text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, tok_text, line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, tok_text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_UNESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


def _unquote(text: str, tok: Token) -> str:
    out = []
    i = 1
    while i < len(text) - 1:
        ch = text[i]
        if ch == "\\":
            nxt = text[i + 1]
            if nxt not in _UNESCAPES:
                raise MiniSyntaxError(f"bad escape \\{nxt}", tok.line, tok.col + i)
            out.append(_UNESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


# binary operator precedence, loosest first
_PRECEDENCE = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise MiniSyntaxError(f"{message}, found {found}", tok.line, tok.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.pos += 1
        return t

    def expect_ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            self.error("expected identifier")
        self.pos += 1
        return t.text

    def skip_newlines(self):
        while self.tok.kind == "nl" or self.at(";"):
            self.pos += 1

    def end_of_statement(self):
        t = self.tok
        if t.kind == "nl" or self.at(";"):
            self.skip_newlines()
        elif not (self.at("}") or t.kind == "eof"):
            self.error("expected end of statement")

    # -- declarations
    def parse_program(self) -> Program:
        self.skip_newlines()
        modules = []
        while self.tok.kind != "eof":
            modules.append(self.parse_module())
        if not modules:
            self.error("a program must contain at least one module")
        names = [m.name for m in modules]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise MiniSyntaxError(f"duplicate module {sorted(dupes)[0]!r}", 1, 1)
        return Program(tuple(modules))

    def parse_module(self) -> SourceModule:
        self.expect("module")
        name = self.expect_ident()
        self.end_of_statement()
        globals_, functions = [], []
        while self.tok.kind != "eof" and not self.at("module"):
            if self.at("var"):
                globals_.append(self.parse_vardecl())
                self.end_of_statement()
            elif self.at("pub") or self.at("fn"):
                functions.append(self.parse_function(name))
                self.skip_newlines()
            else:
                self.error("expected 'var', 'fn' or 'module'")
        return SourceModule(name, tuple(globals_), tuple(functions))

    def parse_type(self) -> ValueType:
        t = self.tok
        if t.kind != "ident" or t.text not in TYPE_NAMES:
            self.error("expected a type")
        self.pos += 1
        return TYPE_NAMES[t.text]

    def parse_function(self, module: str) -> FunctionDef:
        public = self.accept("pub")
        self.expect("fn")
        name = self.expect_ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pname = self.expect_ident()
                self.expect(":")
                params.append(Param(pname, self.parse_type()))
                if not self.accept(","):
                    break
        self.expect(")")
        self.expect("->")
        ret = self.parse_type()
        body = self.parse_block()
        return number_function(module, FunctionDef(name, tuple(params), ret, body, public))

    def parse_block(self) -> Block:
        self.expect("{")
        self.skip_newlines()
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            stmts.append(self.parse_statement())
            self.end_of_statement()
        self.expect("}")
        return Block(tuple(stmts))

    # -- statements
    def parse_vardecl(self) -> VarDecl:
        self.expect("var")
        name = self.expect_ident()
        self.expect(":")
        vtype = self.parse_type()
        if vtype == ValueType.VOID:
            self.error("variables cannot be void", self.toks[self.pos - 1])
        self.expect("=")
        return VarDecl(name, vtype, self.parse_expr())

    def parse_statement(self) -> Statement:
        t = self.tok
        if self.at("var"):
            return self.parse_vardecl()
        if self.accept("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_block()
            orelse = None
            if self.accept("else"):
                if self.at("if"):
                    # `else if` is sugar for a nested if inside an else block
                    orelse = Block((self.parse_statement(),))
                else:
                    orelse = self.parse_block()
            return If(cond, then, orelse)
        if self.accept("while"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return While(cond, self.parse_block())
        if self.accept("return"):
            if self.tok.kind in ("nl", "eof") or self.at(";") or self.at("}"):
                return Return(None)
            return Return(self.parse_expr())
        if self.accept("break"):
            return Break()
        if self.accept("continue"):
            return Continue()
        if self.at("{"):
            return self.parse_block()
        if t.kind == "ident":
            nxt = self.toks[self.pos + 1]
            if nxt.text == "=" and nxt.kind == "op":
                self.pos += 2
                return Assign(t.text, self.parse_expr())
            if nxt.text == "(":
                expr = self.parse_postfix()
                if not isinstance(expr, Call):
                    self.error("expected a call statement")
                return CallStmt(expr)
        self.error("expected a statement")

    # -- expressions
    def parse_expr(self, level: int = 0) -> Expr:
        if level == len(_PRECEDENCE):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        ops = _PRECEDENCE[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.tok.text
            self.pos += 1
            left = Binary(op, left, self.parse_expr(level + 1))
        return left

    def parse_unary(self) -> Expr:
        if self.accept("-"):
            operand = self.parse_unary()
            # negative literals are folded so that printing is a fixed point
            if isinstance(operand, IntLit):
                return IntLit(-operand.value)
            if isinstance(operand, FloatLit):
                return FloatLit(-operand.value)
            return Unary("-", operand)
        if self.accept("!"):
            return Unary("!", self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return IntLit(int(t.text))
        if t.kind == "float":
            self.pos += 1
            return FloatLit(float(t.text))
        if t.kind == "str":
            self.pos += 1
            return StrLit(_unquote(t.text, t))
        if self.accept("true"):
            return BoolLit(True)
        if self.accept("false"):
            return BoolLit(False)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.pos += 1
            if self.accept("("):
                return Call(t.text, self.parse_args())
            return Var(t.text)
        self.error("expected an expression")

    def parse_args(self) -> tuple[Expr, ...]:
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(args)

    def finish(self):
        self.skip_newlines()
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")


def parse_program(source: str) -> Program:
    """Parse MiniLang source text into a Program with statement ids assigned."""
    return Parser(source).parse_program()


def parse_statement(text: str) -> Statement:
    """Parse a single (possibly compound) statement; ids are left unset."""
    p = Parser(text)
    p.skip_newlines()
    stmt = p.parse_statement()
    p.finish()
    return stmt


def parse_expression(text: str) -> Expr:
    p = Parser(text)
    e = p.parse_expr()
    p.finish()
    return e
