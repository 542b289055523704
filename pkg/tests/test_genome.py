import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minirepair.genome import (
    ALL_OPS, Edit, Op, Patch, apply_edits, customize_operation_types, decode, effective_genome,
    format_edit_script, parse_edit_script, suppressed, unified_diff,
)
from minirepair.ingredients import Ingredient, PointContext
from minirepair.minilang import StatementId, ValueType, format_program, parse_program, parse_statement

from test_acceptance import decode_fixture

INT = ValueType.INT
PLAIN = PointContext(False, False, False, INT)
TAIL = PointContext(False, True, True, INT)

PROG = """\
module m

pub fn f(a: int) -> int {
    var x: int = a
    x = x + 1
    if (x > 3) {
        x = x * 2
        a = a - 1
    }
    x = x - a
    return x
}

pub fn g(b: int) -> int {
    b = b + 2
    return b
}
"""


def sid(n, fn="f"):
    return StatementId("m", fn, n)


def ing(text):
    return Ingredient(parse_statement(text), None)


# operation types ----------------------------------------------------------


def test_vardecl_cannot_be_deleted():
    assert customize_operation_types(parse_statement("var t: int = 1"), PLAIN, True) == (Op.REPLACE, Op.INSERT)


def test_final_return_cannot_be_deleted():
    assert customize_operation_types(parse_statement("return x"), TAIL, True) == (Op.REPLACE, Op.INSERT)


def test_plain_assign_gets_everything():
    assert customize_operation_types(parse_statement("x = 1"), PLAIN, True) == ALL_OPS


def test_no_ingredients_means_delete_only():
    assert customize_operation_types(parse_statement("x = 1"), PLAIN, False) == (Op.DELETE,)
    assert customize_operation_types(parse_statement("var t: int = 1"), PLAIN, False) == ()


def test_rules_off_restores_full_set():
    assert customize_operation_types(parse_statement("var t: int = 1"), PLAIN, True, rules=False) == ALL_OPS


# decoding -----------------------------------------------------------------


def test_all_zero_b_decodes_to_nothing():
    _, points = decode_fixture()
    n = len(points)
    assert decode(Patch((0,) * n, (1,) * n, (1,) * n), points) == []


def test_identical_replacement_is_suppressed():
    _, points = decode_fixture()
    # point 1 is `x = x + b`; ingredient 1 is the same statement, ops are D, R, I
    x = Patch((0, 1, 0, 0, 0), (1, 2, 1, 1, 1), (1, 1, 1, 0, 1))
    assert decode(x, points) == []
    assert len(decode(x, points, rules3=False)) == 1
    assert effective_genome(x, points).b == (0, 0, 0, 0, 0)


def test_suppression_leaves_other_edits():
    _, points = decode_fixture()
    x = Patch((0, 1, 0, 1, 0), (1, 2, 1, 1, 1), (1, 1, 1, 0, 1))
    edits = decode(x, points)
    assert [(e.kind, e.point) for e in edits] == [(Op.DELETE, 3)]


@pytest.mark.parametrize("kind,target,ingredient,ctx,expected", [
    (Op.REPLACE, "x = 1", "x = 1", PLAIN, True),
    (Op.REPLACE, "x = 1", "x = 2", PLAIN, False),
    (Op.REPLACE, "var x: int = 1", "x = 2", PLAIN, True),
    (Op.REPLACE, "var x: int = 1", "var x: int = 2", PLAIN, False),
    (Op.REPLACE, "return x", "x = 1", TAIL, True),
    (Op.REPLACE, "return x", "return 0", TAIL, False),
    (Op.REPLACE, "return x", "x = 1", PLAIN, False),
    (Op.INSERT, "var x: int = 1", "var y: int = 2", PLAIN, True),
    (Op.INSERT, "x = 1", "return 3", PLAIN, True),
    (Op.INSERT, "x = 1", "x = 2", PLAIN, True),
    (Op.INSERT, "x = 1", "y = 2", PLAIN, False),
    (Op.INSERT, "x = 1", "var y: int = 2", PLAIN, False),
    (Op.DELETE, "x = 1", None, PLAIN, False),
])
def test_disabling_rules(kind, target, ingredient, ctx, expected):
    got = suppressed(kind, parse_statement(target), ing(ingredient) if ingredient else None, ctx)
    assert got is expected


def test_decode_is_pure():
    _, points = decode_fixture()
    x = Patch((1, 1, 1, 1, 1), (2, 3, 1, 1, 1), (2, 2, 1, 0, 1))
    assert decode(x, points) == decode(x, points)


# applying edits -----------------------------------------------------------


def test_single_delete():
    p = parse_program(PROG)
    q = apply_edits(p, [Edit(Op.DELETE, sid(2))])
    assert q.count_statements() == p.count_statements() - 1
    assert "x = x + 1" not in format_program(q)
    assert format_program(p).replace("    x = x + 1\n", "", 1) == format_program(q)


def test_input_program_untouched():
    p = parse_program(PROG)
    before = format_program(p)
    apply_edits(p, [Edit(Op.REPLACE, sid(2), ing("x = 0")), Edit(Op.DELETE, sid(4))])
    assert format_program(p) == before


def test_empty_edit_list_is_identity():
    p = parse_program(PROG)
    assert apply_edits(p, []) == p


def test_insert_and_delete_in_either_order():
    p = parse_program(PROG)
    a = Edit(Op.INSERT, sid(2), ing("a = a + 5"))
    b = Edit(Op.DELETE, sid(4))
    assert apply_edits(p, [a, b]) == apply_edits(p, [b, a])
    text = format_program(apply_edits(p, [a, b]))
    assert "a = a + 5\n    x = x + 1" in text and "x = x * 2" not in text


def test_edits_use_original_coordinates():
    p = parse_program(PROG)
    # inserting before statement 2 must not shift which statement 3 is
    q = apply_edits(p, [Edit(Op.INSERT, sid(2), ing("a = 0")), Edit(Op.REPLACE, sid(6), ing("x = a"))])
    text = format_program(q)
    assert "x = a\n" in text and "x = x - a" not in text


def test_nested_edits():
    p = parse_program(PROG)
    q = apply_edits(p, [Edit(Op.REPLACE, sid(5), ing("a = a + 1"))])
    assert "        a = a + 1\n" in format_program(q)


SITES = [sid(2), sid(4), sid(5), sid(6), sid(1, "g")]
EDIT_CHOICES = [Edit(Op.DELETE, s) for s in SITES]
EDIT_CHOICES += [Edit(Op.REPLACE, s, ing("a = a * 3")) for s in SITES]
EDIT_CHOICES += [Edit(Op.INSERT, s, ing("a = 7")) for s in SITES if s.function == "f"]


@st.composite
def edit_lists(draw):
    chosen = draw(st.lists(st.sampled_from(EDIT_CHOICES), max_size=5, unique_by=lambda e: e.target))
    return chosen


@settings(max_examples=150)
@given(edit_lists(), st.randoms())
def test_application_is_order_independent(edits, rnd):
    p = parse_program(PROG)
    shuffled = list(edits)
    rnd.shuffle(shuffled)
    assert apply_edits(p, edits) == apply_edits(p, shuffled)


@settings(max_examples=150)
@given(edit_lists())
def test_edit_script_round_trip(edits):
    text = format_edit_script(edits)
    back = parse_edit_script(text)
    # scripts list edits by target
    assert [e.key() for e in back] == sorted(e.key() for e in edits)
    assert format_edit_script(back) == text


def test_edit_script_format():
    edits = [Edit(Op.REPLACE, sid(2), ing("x = x + 2")), Edit(Op.DELETE, sid(4)),
             Edit(Op.INSERT, sid(6), ing("if (a > 0) {\n    a = 0\n}"))]
    assert format_edit_script(edits).splitlines() == [
        "R m:f:2 x = x + 2",
        "D m:f:4",
        "I m:f:6 if (a > 0) { a = 0 }",
    ]


def test_unified_diff():
    p = parse_program(PROG)
    q = apply_edits(p, [Edit(Op.REPLACE, sid(2), ing("x = x + 2"))])
    diff = unified_diff(p, q, "m.ml")
    assert "-    x = x + 1" in diff and "+    x = x + 2" in diff
    assert diff.startswith("--- a/m.ml")
    assert unified_diff(p, p) == ""


def test_patch_bounds():
    _, points = decode_fixture()
    good = Patch((1, 0, 1, 0, 1), (2, 3, 1, 1, 2), (4, 5, 3, 0, 4))
    assert good.check_bounds(points)
    for bad in (Patch((1, 0, 1, 0, 1), (3, 3, 1, 1, 2), (4, 5, 3, 0, 4)),
                Patch((1, 0, 1, 0, 1), (2, 3, 1, 1, 2), (5, 5, 3, 0, 4))):
        assert not bad.check_bounds(points)
    with pytest.raises(ValueError):
        Patch((1, 0), (1,), (1, 1))


def test_decode_matches_every_small_genome():
    # exhaustive over b for fixed u, v: the kept edits are exactly the unsuppressed selected ones
    _, points = decode_fixture()
    u, v = (1, 3, 2, 1, 2), (2, 4, 2, 0, 2)
    for b in itertools.product((0, 1), repeat=5):
        edits = decode(Patch(b, u, v), points)
        assert {e.point for e in edits} <= {j for j in range(5) if b[j]}
