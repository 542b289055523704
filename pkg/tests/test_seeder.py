import json

import pytest

from minirepair.corpus import SUITES, bug_names, load_bug, load_subject
from minirepair.genome import apply_edits
from minirepair.minilang import (
    StatementId, Verdict, format_program, parse_program, parse_statement, parse_suite, run_verdict,
)
from minirepair.seeder import (
    ExhaustedAttempts, Mutation, Rejected, SeedSpec, check_admissibility, find_redundant_statements,
    load_bundle, seed_bug, statement_mutants, write_bundle,
)

PROG = """\
module m

pub fn f(a: int) -> int {
    var x: int = a + 1
    x = x * 2
    var dead: int = a + 1
    x = x * 1
    return x
}

pub fn g(b: int) -> int {
    b = b + 1
    return b
}
"""

TESTS = "\n".join(f"f{a}: m.f({a}) => {(a + 1) * 2}" for a in range(5)) + "\ng0: m.g(1) => 2\n"


def sid(n, fn="f"):
    return StatementId("m", fn, n)


def mutation(n, text, fn="f", p=None):
    p = p or parse_program(PROG)
    return Mutation(sid(n, fn), p.statement(sid(n, fn)), parse_statement(text), "test")


def test_redundant_statements():
    p = parse_program(PROG)
    # `var x: int = a + 1` and `var dead: int = a + 1` differ by name, so only identical twins count
    assert find_redundant_statements(p) == []
    q = parse_program(PROG.replace("x = x * 1", "x = x * 2"))
    assert find_redundant_statements(q) == [sid(2), sid(4)]
    assert find_redundant_statements(q, "other") == []


def test_statement_mutants_are_valid_and_distinct():
    p = parse_program(PROG)
    found = statement_mutants(p, sid(2))
    texts = [s for _, s in found]
    assert parse_statement("x = x / 2") in texts
    assert parse_statement("x = x * 2") not in texts
    assert len(texts) == len(set(map(repr, texts)))
    assert statement_mutants(p, sid(2), operators=("relational",)) == []


def test_dead_mutation_breaks_principle_two():
    p = parse_program(PROG)
    out = check_admissibility(p, parse_suite(TESTS), [mutation(3, "var dead: int = a - 1")], SeedSpec(k=1))
    assert isinstance(out, Rejected) and out.principle == "principle 2"


def test_harmless_half_of_a_pair_breaks_principle_two():
    p = parse_program(PROG)
    muts = [mutation(2, "x = x / 2"), mutation(3, "var dead: int = a - 1")]
    out = check_admissibility(p, parse_suite(TESTS), muts, SeedSpec(k=2))
    assert isinstance(out, Rejected) and out.principle == "principle 2"


def test_unselected_statement_breaks_principle_one():
    p = parse_program(PROG)
    muts = [mutation(1, "var x: int = a - 1"), mutation(2, "x = x / 2")]
    # every statement of f is equally suspicious; a cap of one keeps only the first
    out = check_admissibility(p, parse_suite(TESTS), muts, SeedSpec(k=2, n_max=1))
    assert isinstance(out, Rejected) and out.principle == "principle 1"
    assert "m:f:2" in out.detail


def test_deletable_mutation_breaks_principle_three():
    p = parse_program(PROG)
    # x = x * 1 -> x = x * 3; deleting the mutant restores the behavior
    out = check_admissibility(p, parse_suite(TESTS), [mutation(4, "x = x * 3")],
                              SeedSpec(k=1, require_redundant=False))
    assert isinstance(out, Rejected) and out.principle == "principle 3"


def test_missing_original_breaks_repairability():
    p = parse_program(PROG)
    out = check_admissibility(p, parse_suite(TESTS), [mutation(2, "x = x / 2")], SeedSpec(k=1))
    assert isinstance(out, Rejected) and out.principle == "repairability"


def test_input_must_pass_its_suite():
    p = parse_program(PROG)
    with pytest.raises(ValueError):
        seed_bug(p, parse_suite(TESTS + "bad: m.g(1) => 5\n"), SeedSpec())


def test_no_redundant_statements_means_exhausted():
    p = parse_program(PROG)
    with pytest.raises(ExhaustedAttempts):
        seed_bug(p, parse_suite(TESTS), SeedSpec(k=1))


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        SeedSpec(k=0)


@pytest.fixture(scope="module")
def seeded():
    p, suite = load_subject("numeric")
    return p, suite, seed_bug(p, suite, SeedSpec(k=1, rng_seed=0, module="intops"))


def test_seeded_bug_fails_and_ground_truth_restores(seeded):
    p, suite, bug = seeded
    assert bug.k == 1 and bug.label == "F"
    assert bug.failing_tests
    assert any(run_verdict(bug.program, t) != Verdict.PASS for t in suite)
    assert apply_edits(bug.program, bug.ground_truth()) == p


def test_seeding_is_deterministic(seeded):
    p, suite, bug = seeded
    again = seed_bug(p, suite, SeedSpec(k=1, rng_seed=0, module="intops"))
    assert again.mutations == bug.mutations


def test_bundle_round_trip(seeded, tmp_path):
    p, suite, bug = seeded
    path = write_bundle(bug, tmp_path, "b1", "numeric", str(SUITES / "numeric.tests"), p)
    back = load_bundle(path)
    assert back.program == bug.program
    assert back.suite == suite
    assert [e.key() for e in back.fix] == [e.key() for e in bug.ground_truth()]
    meta = json.loads((path / "bug.json").read_text())
    assert meta["class"] == "F" and meta["k"] == 1 and meta["redundant"] == [True]
    assert format_program(back.program) == (path / "buggy.ml").read_text()


@pytest.mark.parametrize("name", bug_names())
def test_corpus_bundle_is_consistent(name):
    b = load_bug(name)
    assert b.k == len(b.fix) == len(b.meta["mutations"])
    assert b.label == name.split("-")[1][0]
    fixed = apply_edits(b.program, b.fix)
    assert all(run_verdict(fixed, t) == Verdict.PASS for t in b.suite)
    failing = {t.name for t in b.suite if run_verdict(b.program, t) != Verdict.PASS}
    assert failing == set(b.meta["failing_tests"])
    if b.label == "F":
        assert all(b.meta["redundant"])
