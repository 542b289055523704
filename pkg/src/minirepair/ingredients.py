"""Scope determination, ingredient screening and modification points."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .localization import Seed, SuspiciousStatement
from .minilang import Program, StatementId, StaticError, compile_program
from .minilang.compiler import FunctionCompiler, LocalScope, ModuleContext, check_statement
from .minilang.nodes import (
    Assign, Binary, Block, Break, Call, CallStmt, Continue, Expr, If, Return, Signature,
    Statement, Unary, ValueType, Var, VarDecl, While, assignable, child_blocks, compatible,
)

log = logging.getLogger(__name__)


class IngredientMode(enum.Enum):
    FILE = "file"
    PACKAGE = "package"
    APPLICATION = "application"


class NoModificationPoints(Exception):
    """Every candidate statement ended up with no admissible operation."""


@dataclass
class Scope:
    module: str
    # insertion order is declaration order; the most recent declaration is last
    variables: dict[str, ValueType]
    functions: dict[str, Signature]
    locals: dict[str, ValueType] = field(default_factory=dict)  # params + locals only


@dataclass(frozen=True)
class PointContext:
    in_loop: bool
    last_in_block: bool
    tail: bool  # on the function's exit path
    return_type: ValueType


@dataclass(frozen=True)
class Ingredient:
    statement: Statement
    origin: Optional[StatementId]
    substitution: tuple = ()  # ((old, new), ...) variables first, then functions


@dataclass(frozen=True)
class ModificationPoint:
    index: int
    sid: StatementId
    statement: Statement
    susp: float
    scope: Scope = field(compare=False)
    ops: tuple  # O_j, a tuple of Op
    ingredients: tuple  # I_j'
    context: PointContext

    def summary(self) -> str:
        return (f"{self.index}\t{self.sid}\t{self.susp:.4f}\t{len(self.scope.variables)}\t"
                f"{len(self.scope.functions)}\t{len(self.ingredients)}\t"
                f"{','.join(op.name for op in self.ops)}")


# --------------------------------------------------------------------------
# scope


def _block_chain(block: Block, sid) -> Optional[list]:
    for i, s in enumerate(block.stmts):
        if s.sid == sid:
            return [(block, i)]
        for child in child_blocks(s):
            found = _block_chain(child, sid)
            if found is not None:
                return [(block, i)] + found
    return None


def module_context(p: Program, module: str) -> ModuleContext:
    return compile_program(p).ctx.modules[module]


def determine_scope(p: Program, loc: StatementId) -> Scope:
    info = p.index[loc]
    mctx = module_context(p, info.module.name)
    variables: dict[str, ValueType] = {}
    local_vars: dict[str, ValueType] = {}

    def declare(name, vtype, local=True):
        variables.pop(name, None)
        variables[name] = vtype
        if local:
            local_vars.pop(name, None)
            local_vars[name] = vtype

    for g in info.module.globals:
        declare(g.name, g.type, local=False)
    for prm in info.function.params:
        declare(prm.name, prm.type)
    for block, i in _block_chain(info.function.body, loc):
        for s in block.stmts[:i]:
            if isinstance(s, VarDecl):
                declare(s.name, s.type)
    functions = {name: sig for name, (_, sig) in mctx.functions.items()}
    for name, entry in mctx.foreign.items():
        if entry is not None:
            functions[name] = entry[1]
    return Scope(info.module.name, variables, functions, local_vars)


def point_context(p: Program, loc: StatementId) -> PointContext:
    info = p.index[loc]
    return PointContext(info.in_loop, info.index == len(info.block.stmts) - 1, info.tail,
                        info.function.return_type)


# --------------------------------------------------------------------------
# names referenced by a statement


def free_names(stmt: Statement) -> tuple[list[str], list[str]]:
    """Variables and functions a statement refers to, in first-use order.

    Variables declared inside the statement itself are not free.
    """
    fvars: list[str] = []
    ffuncs: list[str] = []

    def expr(e: Expr, bound):
        if isinstance(e, Var):
            if not any(e.name in b for b in bound) and e.name not in fvars:
                fvars.append(e.name)
        elif isinstance(e, Unary):
            expr(e.operand, bound)
        elif isinstance(e, Binary):
            expr(e.left, bound)
            expr(e.right, bound)
        elif isinstance(e, Call):
            if e.name not in ffuncs:
                ffuncs.append(e.name)
            for a in e.args:
                expr(a, bound)

    def statement(s: Statement, bound):
        if isinstance(s, VarDecl):
            expr(s.init, bound)
            bound[-1].add(s.name)
        elif isinstance(s, Assign):
            expr(Var(s.name), bound)
            expr(s.value, bound)
        elif isinstance(s, (If, While)):
            expr(s.cond, bound)
            for child in child_blocks(s):
                block(child, bound)
        elif isinstance(s, Return):
            if s.value is not None:
                expr(s.value, bound)
        elif isinstance(s, CallStmt):
            expr(s.call, bound)
        elif isinstance(s, Block):
            block(s, bound)

    def block(b: Block, bound):
        bound.append(set())
        for s in b.stmts:
            statement(s, bound)
        bound.pop()

    statement(stmt, [set()])
    return fvars, ffuncs


def declared_names(stmt: Statement) -> set:
    names = set()
    stack = [stmt]
    while stack:
        s = stack.pop()
        if isinstance(s, VarDecl):
            names.add(s.name)
        for child in child_blocks(s):
            stack.extend(child.stmts)
    return names


def rename(stmt: Statement, var_map: dict, func_map: dict) -> Statement:
    """Rename free variables and called functions of ``stmt``."""

    def expr(e: Expr, bound) -> Expr:
        if isinstance(e, Var):
            if e.name in var_map and not any(e.name in b for b in bound):
                return Var(var_map[e.name])
            return e
        if isinstance(e, Unary):
            return Unary(e.op, expr(e.operand, bound))
        if isinstance(e, Binary):
            return Binary(e.op, expr(e.left, bound), expr(e.right, bound))
        if isinstance(e, Call):
            return Call(func_map.get(e.name, e.name), tuple(expr(a, bound) for a in e.args))
        return e

    def name(n, bound):
        if n in var_map and not any(n in b for b in bound):
            return var_map[n]
        return n

    def statement(s: Statement, bound) -> Statement:
        if isinstance(s, VarDecl):
            init = expr(s.init, bound)
            bound[-1].add(s.name)
            return VarDecl(s.name, s.type, init)
        if isinstance(s, Assign):
            return Assign(name(s.name, bound), expr(s.value, bound))
        if isinstance(s, If):
            cond = expr(s.cond, bound)
            then = block(s.then, bound)
            orelse = block(s.orelse, bound) if s.orelse is not None else None
            return If(cond, then, orelse)
        if isinstance(s, While):
            return While(expr(s.cond, bound), block(s.body, bound))
        if isinstance(s, Return):
            return Return(expr(s.value, bound) if s.value is not None else None)
        if isinstance(s, CallStmt):
            return CallStmt(expr(s.call, bound))
        if isinstance(s, Block):
            return block(s, bound)
        if isinstance(s, Break):
            return Break()
        if isinstance(s, Continue):
            return Continue()
        raise TypeError(s)

    def block(b: Block, bound) -> Block:
        bound.append(set())
        out = tuple(statement(s, bound) for s in b.stmts)
        bound.pop()
        return Block(out)

    return statement(stmt, [set()])


# --------------------------------------------------------------------------
# screening


def signatures_compatible(a: Signature, b: Signature) -> bool:
    return (len(a.params) == len(b.params)
            and all(compatible(x, y) for x, y in zip(a.params, b.params))
            and (a.ret == b.ret or compatible(a.ret, b.ret)))


class SeedInfo:
    """Per-seed facts needed by screening, computed once per run."""

    def __init__(self, p: Program, seed: Seed):
        self.seed = seed
        self.statement = seed.statement
        fvars, ffuncs = free_names(seed.statement)
        origin_scope = determine_scope(p, seed.origin)
        self.var_types = {v: origin_scope.variables[v] for v in fvars}
        self.func_sigs = {f: origin_scope.functions[f] for f in ffuncs}
        self.declared = declared_names(seed.statement)
        self.modules = {o.module for o in seed.origins}

    def origin_in(self, mode: IngredientMode, module: str) -> Optional[StatementId]:
        if mode == IngredientMode.APPLICATION:
            return self.seed.origin
        for o in self.seed.origins:
            if o.module == module:
                return o
        return None


def _seed_info(p: Program, seed) -> SeedInfo:
    return seed if isinstance(seed, SeedInfo) else SeedInfo(p, seed)


def screen_direct(seed, scope: Scope, mode: IngredientMode, loc: StatementId,
                  p: Program) -> Optional[Ingredient]:
    """Accept ``seed`` unchanged if all its names resolve at ``loc``; None if rejected."""
    info = _seed_info(p, seed)
    origin = info.origin_in(mode, loc.module)
    if origin is None:
        return None
    for v, vt in info.var_types.items():
        st = scope.variables.get(v)
        if st is None or not compatible(vt, st):
            return None
    for f, fsig in info.func_sigs.items():
        sig = scope.functions.get(f)
        if sig is None or not signatures_compatible(fsig, sig):
            return None
    return Ingredient(info.statement, origin, ())


def _pick(name_type, candidates: list, used: set, same, compat):
    for cand, ctype in candidates:
        if cand not in used and same(name_type, ctype):
            return cand
    for cand, ctype in candidates:
        if cand not in used and compat(name_type, ctype):
            return cand
    return None


def screen_type_match(seed, scope: Scope, mode: IngredientMode, loc: StatementId, p: Program,
                      match_vars: bool = True, match_funcs: bool = False) -> list[Ingredient]:
    """Rewrite out-of-scope names of ``seed`` onto compatible in-scope ones.

    At most one ingredient is produced per seed: each out-of-scope name is
    mapped to the nearest (most recently declared) unused in-scope name of
    the same type, falling back to a compatible type.
    """
    info = _seed_info(p, seed)
    origin = info.origin_in(mode, loc.module)
    if origin is None:
        return []
    var_map: dict[str, str] = {}
    used_vars = set(info.declared)
    pending_vars = []
    for v, vt in info.var_types.items():
        st = scope.variables.get(v)
        if st is not None and compatible(vt, st):
            used_vars.add(v)
        else:
            pending_vars.append((v, vt))
    if pending_vars:
        if not match_vars:
            return []
        nearest_first = list(reversed(scope.variables.items()))
        for v, vt in pending_vars:
            target = _pick(vt, nearest_first, used_vars, lambda a, b: a == b, compatible)
            if target is None:
                return []
            var_map[v] = target
            used_vars.add(target)

    func_map: dict[str, str] = {}
    used_funcs = set()
    pending_funcs = []
    for f, fsig in info.func_sigs.items():
        sig = scope.functions.get(f)
        if sig is not None and signatures_compatible(fsig, sig):
            used_funcs.add(f)
        else:
            pending_funcs.append((f, fsig))
    if pending_funcs:
        if not match_funcs:
            return []
        ordered = list(scope.functions.items())
        for f, fsig in pending_funcs:
            target = _pick(fsig, ordered, used_funcs, lambda a, b: a == b, signatures_compatible)
            if target is None:
                return []
            func_map[f] = target
            used_funcs.add(target)

    if not var_map and not func_map:
        return [Ingredient(info.statement, origin, ())]
    rewritten = rename(info.statement, var_map, func_map)
    return [Ingredient(rewritten, origin, tuple(var_map.items()) + tuple(func_map.items()))]


def expression_type(e: Expr, mctx: ModuleContext, variables: dict) -> Optional[ValueType]:
    scope = LocalScope()
    for name, vtype in variables.items():
        scope.frames[-1][name] = (scope.nslots, vtype)
        scope.nslots += 1
    try:
        return FunctionCompiler(mctx, ValueType.VOID, scope).expr(e)[1]
    except StaticError:
        return None


def apply_ingredient_rules(candidate: Statement, ing: Ingredient, context: PointContext,
                           scope: Optional[Scope] = None, mctx: Optional[ModuleContext] = None) -> bool:
    """True to keep ``ing`` for ``candidate``; False if an ingredient rule fires."""
    s = ing.statement
    if isinstance(s, Continue) and not context.in_loop:
        return False
    if isinstance(s, Break) and not context.in_loop:
        return False
    if isinstance(s, Return):
        if not context.last_in_block:
            return False
        if context.return_type == ValueType.VOID:
            if s.value is not None:
                return False
        else:
            if s.value is None:
                return False
            if scope is not None and mctx is not None:
                rtype = expression_type(s.value, mctx, scope.variables)
                if rtype is None or not assignable(rtype, context.return_type):
                    return False
    if isinstance(s, VarDecl):
        if not isinstance(candidate, VarDecl):
            return False
        if candidate.name != s.name or candidate.type != s.type:
            return False
    return True


def ingredient_is_sound(p: Program, loc: StatementId, ing: Ingredient, scope: Scope, mctx: ModuleContext,
                        context: PointContext) -> bool:
    """Both replacing ``loc`` by ``ing`` and inserting it before ``loc`` must validate."""
    from .genome import Edit, Op, apply_edits

    try:
        check_statement(ing.statement, mctx, scope.locals, context.return_type, context.in_loop)
    except StaticError:
        return False
    # the local check cannot see effects on later statements (declarations, exit paths)
    for kind in (Op.REPLACE, Op.INSERT):
        try:
            compile_program(apply_edits(p, [Edit(kind, loc, ing)]))
        except StaticError:
            return False
    return True


# --------------------------------------------------------------------------
# assembling modification points


@dataclass(frozen=True)
class Screening:
    """How seeds become ingredients: direct, or type matching for vars/functions."""

    match_vars: bool = False
    match_funcs: bool = False

    @property
    def direct(self) -> bool:
        return not (self.match_vars or self.match_funcs)

    @classmethod
    def from_name(cls, name: str) -> "Screening":
        return {
            "direct": cls(False, False),
            "vars": cls(True, False),
            "funcs": cls(False, True),
            "both": cls(True, True),
        }[name]


def screen_ingredients(p: Program, loc: StatementId, seeds: Sequence, scope: Scope, context: PointContext,
                       mode: IngredientMode, screening: Screening, ingredient_rules: bool = True) -> list:
    candidate = p.statement(loc)
    mctx = module_context(p, loc.module)
    found: dict = {}
    for seed in seeds:
        if screening.direct:
            ing = screen_direct(seed, scope, mode, loc, p)
            got = [ing] if ing is not None else []
        else:
            got = screen_type_match(seed, scope, mode, loc, p, screening.match_vars, screening.match_funcs)
        for ing in got:
            if ing.statement in found:
                continue
            if ingredient_rules and not apply_ingredient_rules(candidate, ing, context, scope, mctx):
                continue
            if not ingredient_is_sound(p, loc, ing, scope, mctx, context):
                continue
            found[ing.statement] = ing
    return list(found.values())


def build_modification_points(p: Program, candidates: Sequence[SuspiciousStatement], seeds: Sequence[Seed],
                              mode: IngredientMode = IngredientMode.PACKAGE,
                              screening: Screening = Screening(), operation_rules: bool = True,
                              ingredient_rules: bool = True) -> list[ModificationPoint]:
    from .genome import customize_operation_types

    infos = [SeedInfo(p, s) for s in seeds]
    points = []
    for cand in candidates:
        scope = determine_scope(p, cand.id)
        context = point_context(p, cand.id)
        ings = screen_ingredients(p, cand.id, infos, scope, context, mode, screening, ingredient_rules)
        stmt = p.statement(cand.id)
        ops = customize_operation_types(stmt, context, bool(ings), rules=operation_rules)
        if not ops:
            log.debug("dropping %s: no admissible operation", cand.id)
            continue
        points.append(ModificationPoint(len(points), cand.id, stmt, cand.susp, scope, ops, tuple(ings), context))
    if not points:
        raise NoModificationPoints("every candidate statement collapsed")
    return points
