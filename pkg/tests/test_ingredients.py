import pytest

from minirepair.corpus import bug_names, load_bug
from minirepair.genome import Op
from minirepair.ingredients import (
    Ingredient, IngredientMode, NoModificationPoints, PointContext, Screening, apply_ingredient_rules,
    build_modification_points, determine_scope, free_names, point_context, rename, screen_direct,
    screen_type_match,
)
from minirepair.localization import Seed, SuspiciousStatement
from minirepair.minilang import StatementId, ValueType, parse_program, parse_statement
from minirepair.search import SearchConfig, prepare_problem

INT, FLOAT = ValueType.INT, ValueType.FLOAT

TWO_MODULES = """\
module calc

var base: int = 10
var rate: float = 0.5

fn hidden() -> int {
    return 1
}

pub fn shown(k: int) -> int {
    return k
}

pub fn neg(p: int) -> int {
    p = -p
    return p
}

fn fun(a: int, b: int) -> int {
    return a - b
}

pub fn pair(q: int, r: int) -> int {
    q = q + r
    return q
}

pub fn twice(y: int) -> int {
    y = y * 2
    return y
}

pub fn caller(x: int, y: int) -> int {
    var z: int = fun(x, -y)
    return z
}

module other

pub fn target(y: int) -> int {
    y = y + 1
    return y
}

pub fn sub(a: int, b: int) -> int {
    return a - b
}

pub fn user(x: int, y: int) -> int {
    var z: int = 0
    z = x + y
    return z
}
"""


@pytest.fixture(scope="module")
def prog():
    return parse_program(TWO_MODULES)


def sid(m, f, n):
    return StatementId(m, f, n)


def seed(p, loc):
    return Seed(p.statement(loc), (loc,))


# scope ---------------------------------------------------------------------


def test_scope_before_any_local_is_the_globals():
    p = parse_program("module m\nvar g1: int = 1\nvar g2: float = 2.0\n"
                      "fn f() -> int {\n    var t: int = 3\n    return t\n}\n")
    scope = determine_scope(p, sid("m", "f", 1))
    assert scope.variables == {"g1": INT, "g2": FLOAT}


def test_scope_includes_params_and_prior_locals():
    p = parse_program("module m\nfn f(a: float) -> float {\n    var t: int = 3\n    a = a + t\n"
                      "    var late: int = 1\n    return a\n}\n")
    scope = determine_scope(p, sid("m", "f", 2))
    assert scope.variables["t"] == INT and scope.variables["a"] == FLOAT
    assert "late" not in scope.variables


def test_scope_functions_respect_visibility(prog):
    scope = determine_scope(prog, sid("other", "target", 1))
    assert "shown" in scope.functions and "sub" in scope.functions
    assert "hidden" not in scope.functions and "fun" not in scope.functions


def test_locals_inside_finished_blocks_are_gone():
    p = parse_program("module m\nfn f(a: int) -> int {\n    if (a > 0) {\n        var t: int = 1\n"
                      "        a = t\n    }\n    a = a + 1\n    return a\n}\n")
    assert "t" in determine_scope(p, sid("m", "f", 3)).variables
    assert "t" not in determine_scope(p, sid("m", "f", 4)).variables


# direct screening ------------------------------------------------------------


def test_direct_accepts_resolving_seed(prog):
    loc = sid("other", "user", 2)
    ing = screen_direct(seed(prog, sid("other", "user", 2)), determine_scope(prog, loc), IngredientMode.PACKAGE,
                        loc, prog)
    assert ing is not None and ing.substitution == ()


def test_direct_rejects_unresolved_name(prog):
    loc = sid("other", "target", 1)
    # `z = x + y` uses x and z, which target lacks
    assert screen_direct(seed(prog, sid("other", "user", 2)), determine_scope(prog, loc),
                         IngredientMode.PACKAGE, loc, prog) is None


def test_direct_mode_controls_other_modules(prog):
    loc = sid("other", "target", 1)
    scope = determine_scope(prog, loc)
    s = seed(prog, sid("calc", "twice", 1))  # y = y * 2, y in scope at target
    assert screen_direct(s, scope, IngredientMode.PACKAGE, loc, prog) is None
    assert screen_direct(s, scope, IngredientMode.FILE, loc, prog) is None
    ing = screen_direct(s, scope, IngredientMode.APPLICATION, loc, prog)
    assert ing is not None and ing.statement == parse_statement("y = y * 2")


# type matching ------------------------------------------------------------------


def test_variable_mapping(prog):
    loc = sid("other", "target", 1)
    got = screen_type_match(seed(prog, sid("calc", "neg", 1)), determine_scope(prog, loc),
                            IngredientMode.APPLICATION, loc, prog, True, False)
    assert [g.statement for g in got] == [parse_statement("y = -y")]
    assert got[0].substitution == (("p", "y"),)


def test_function_mapping(prog):
    loc = sid("other", "user", 2)
    got = screen_type_match(seed(prog, sid("calc", "caller", 1)), determine_scope(prog, loc),
                            IngredientMode.APPLICATION, loc, prog, False, True)
    # `var z: int = fun(x, -y)` with fun mapped to sub
    assert [g.statement for g in got] == [parse_statement("var z: int = sub(x, -y)")]


def test_function_mapping_needs_its_flag(prog):
    loc = sid("other", "user", 2)
    s = seed(prog, sid("calc", "caller", 1))
    assert screen_type_match(s, determine_scope(prog, loc), IngredientMode.APPLICATION, loc, prog, True,
                             False) == []


def test_injectivity_can_be_unsatisfiable(prog):
    loc = sid("other", "target", 1)
    got = screen_type_match(seed(prog, sid("calc", "pair", 1)), determine_scope(prog, loc),
                            IngredientMode.APPLICATION, loc, prog, True, False)
    assert got == []


def test_same_type_preferred_then_nearest():
    p = parse_program("module m\nvar g: float = 1.0\nfn src(p: int) -> int {\n    p = p + 1\n    return p\n}\n"
                      "fn dst(a: int, f: float) -> int {\n    var b: int = a\n    a = b\n    return a\n}\n")
    loc = sid("m", "dst", 2)
    got = screen_type_match(seed(p, sid("m", "src", 1)), determine_scope(p, loc), IngredientMode.PACKAGE, loc, p,
                            True, False)
    assert [g.statement for g in got] == [parse_statement("b = b + 1")]


def test_widening_used_when_no_same_type():
    p = parse_program("module m\nfn src(p: int) -> float {\n    var w: float = 1.0\n    w = w + p\n    return w\n}\n"
                      "fn dst(f: float) -> float {\n    var k: float = f\n    k = k * 2.0\n    return k\n}\n")
    loc = sid("m", "dst", 2)
    got = screen_type_match(seed(p, sid("m", "src", 2)), determine_scope(p, loc), IngredientMode.PACKAGE, loc, p,
                            True, False)
    # w takes the nearest float; p has no int partner, so it falls back to the remaining float
    assert [g.statement for g in got] == [parse_statement("k = k + f")]


def test_rename_respects_local_bindings():
    s = parse_statement("while (i < n) {\n    var t: int = i\n    i = t + 1\n}")
    out = rename(s, {"i": "j", "t": "zz"}, {})
    assert out == parse_statement("while (j < n) {\n    var t: int = j\n    j = t + 1\n}")
    assert free_names(s) == (["i", "n"], [])


# ingredient rules ----------------------------------------------------------------

MID = PointContext(in_loop=False, last_in_block=False, tail=False, return_type=INT)
LAST_IN_LOOP = PointContext(in_loop=True, last_in_block=True, tail=False, return_type=INT)


def keep(cand, ing, ctx):
    return apply_ingredient_rules(parse_statement(cand), Ingredient(parse_statement(ing), None), ctx)


def test_continue_and_break_only_in_loops():
    assert not keep("x = 1", "continue", MID)
    assert not keep("x = 1", "break", MID)
    assert keep("x = 1", "continue", LAST_IN_LOOP)
    assert keep("x = 1", "break", LAST_IN_LOOP)


def test_return_only_last_in_block():
    assert not keep("x = 1", "return 1", MID)
    assert keep("x = 1", "return 1", LAST_IN_LOOP)


def test_return_type_must_fit():
    void_ctx = PointContext(False, True, True, ValueType.VOID)
    assert not keep("x = 1", "return 1", void_ctx)
    assert keep("x = 1", "return", void_ctx)
    assert not keep("x = 1", "return", LAST_IN_LOOP)


def test_vardecl_only_for_same_declaration():
    assert keep("var t: int = 1", "var t: int = 0", MID)
    assert not keep("var t: int = 1", "var u: int = 0", MID)
    assert not keep("var t: int = 1", "var t: float = 0.0", MID)
    assert not keep("t = 1", "var t: int = 0", MID)


# assembling points -------------------------------------------------------------

COLLAPSE = """\
module m

pub fn f(a: int) -> int {
    var x1: int = a
    a = a + 1
    var x2: int = a
    a = a * 2
    var x3: int = a
    a = a - x1
    a = a + x2
    a = a + x3
    a = a - 1
    a = a * 3
    return a
}
"""


def test_points_without_ingredients():
    p = parse_program(COLLAPSE)
    cands = [SuspiciousStatement(sid("m", "f", i), 1.0 - i / 100) for i in range(1, 11)]
    points = build_modification_points(p, cands, [])
    assert len(points) == 7
    assert all(pt.ops == (Op.DELETE,) for pt in points)
    assert [pt.index for pt in points] == list(range(7))
    assert all(pt.sid.ordinal not in (1, 3, 5) for pt in points)


def test_tail_return_without_ingredients_collapses():
    p = parse_program(COLLAPSE)
    with pytest.raises(NoModificationPoints):
        build_modification_points(p, [SuspiciousStatement(sid("m", "f", 11), 1.0),
                                      SuspiciousStatement(sid("m", "f", 1), 1.0)], [])


def test_context_of_tail_and_loops():
    p = parse_program("module m\nfn f(a: int) -> int {\n    while (a > 0) {\n        a = a - 1\n    }\n"
                      "    return a\n}\n")
    assert point_context(p, sid("m", "f", 2)).in_loop
    assert point_context(p, sid("m", "f", 3)).tail
    assert not point_context(p, sid("m", "f", 1)).tail


def _corpus_problems(screening):
    for name in bug_names():
        b = load_bug(name)
        yield name, prepare_problem(b.program, b.suite, SearchConfig(screening=Screening.from_name(screening)))


def test_direct_ingredients_survive_type_matching():
    matched = dict(_corpus_problems("both"))
    for name, direct in _corpus_problems("direct"):
        by_sid = {pt.sid: pt for pt in matched[name].points}
        for pt in direct.points:
            other = by_sid[pt.sid]
            assert {i.statement for i in pt.ingredients} <= {i.statement for i in other.ingredients}, (name, pt.sid)


def test_substitutions_are_injective():
    for _, problem in _corpus_problems("both"):
        for pt in problem.points:
            for ing in pt.ingredients:
                targets = [new for _, new in ing.substitution]
                assert len(targets) == len(set(targets))


def test_ingredient_order_is_stable():
    b = load_bug(bug_names()[0])
    first = prepare_problem(b.program, b.suite, SearchConfig())
    second = prepare_problem(b.program, b.suite, SearchConfig())
    assert [pt.ingredients for pt in first.points] == [pt.ingredients for pt in second.points]
