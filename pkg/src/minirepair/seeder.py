"""Seeding benchmark bugs by mutating statements of a correct program."""

from __future__ import annotations

import itertools
import json
import logging
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .genome import Edit, Op, apply_edits, format_edit_script, parse_edit_script
from .ingredients import (
    Ingredient, IngredientMode, Screening, SeedInfo, determine_scope, screen_direct, screen_type_match,
)
from .localization import EmptyCandidateSet, NoNegativeTest, collect_coverage, collect_seed_statements
from .minilang import (
    Program, StatementId, TestCase, Verdict, format_program, is_valid, parse_program,
    parse_statement, run_verdict,
)
from .minilang.nodes import (
    Assign, Binary, BoolLit, Call, CallStmt, Expr, FloatLit, If, IntLit, Return, Statement, Unary, Var,
    VarDecl, While,
)
from .minilang.printer import format_statement_inline
from .search import SearchConfig, prepare_problem, run_deletion_baseline

log = logging.getLogger(__name__)

MUTATION_OPERATORS = ("arithmetic", "relational", "negation", "constant", "variable")

_ARITH_SWAP = {"+": "-", "-": "+", "*": "/", "/": "*", "%": "*"}
_REL_SWAP = {"<": "<=", "<=": "<", ">": ">=", ">=": ">", "==": "!=", "!=": "=="}


class ExhaustedAttempts(Exception):
    """No admissible bug was found within the retry budget."""


# --------------------------------------------------------------------------
# redundancy


def find_redundant_statements(p: Program, module: Optional[str] = None) -> list[StatementId]:
    """Statements with a structurally identical twin elsewhere in their module."""
    groups: dict = {}
    for sid in p.index:
        if module is not None and sid.module != module:
            continue
        groups.setdefault((sid.module, p.statement(sid)), []).append(sid)
    out = [sid for ids in groups.values() if len(ids) > 1 for sid in ids]
    return sorted(out, key=list(p.index).index)


# --------------------------------------------------------------------------
# mutation operators


def _expr_mutants(e: Expr, operators, variables: dict) -> Iterator[tuple[str, Expr]]:
    """Every expression obtained from ``e`` by one mutation, with a description."""
    if isinstance(e, Binary):
        if "arithmetic" in operators and e.op in _ARITH_SWAP:
            yield f"{e.op} -> {_ARITH_SWAP[e.op]}", Binary(_ARITH_SWAP[e.op], e.left, e.right)
        if "relational" in operators and e.op in _REL_SWAP:
            yield f"{e.op} -> {_REL_SWAP[e.op]}", Binary(_REL_SWAP[e.op], e.left, e.right)
        if "negation" in operators and e.op in ("&&", "||"):
            swapped = "||" if e.op == "&&" else "&&"
            yield f"{e.op} -> {swapped}", Binary(swapped, e.left, e.right)
        for desc, sub in _expr_mutants(e.left, operators, variables):
            yield desc, Binary(e.op, sub, e.right)
        for desc, sub in _expr_mutants(e.right, operators, variables):
            yield desc, Binary(e.op, e.left, sub)
    elif isinstance(e, Unary):
        if "negation" in operators and e.op == "!":
            yield "drop !", e.operand
        for desc, sub in _expr_mutants(e.operand, operators, variables):
            yield desc, Unary(e.op, sub)
    elif isinstance(e, Call):
        for i, a in enumerate(e.args):
            for desc, sub in _expr_mutants(a, operators, variables):
                yield desc, Call(e.name, e.args[:i] + (sub,) + e.args[i + 1:])
    elif isinstance(e, IntLit):
        if "constant" in operators:
            yield f"{e.value} -> {e.value + 1}", IntLit(e.value + 1)
            yield f"{e.value} -> {e.value - 1}", IntLit(e.value - 1)
            if e.value != 0:
                yield f"{e.value} -> {-e.value}", IntLit(-e.value)
    elif isinstance(e, FloatLit):
        if "constant" in operators:
            yield f"{e.value} -> {e.value + 1.0}", FloatLit(e.value + 1.0)
            yield f"{e.value} -> {e.value - 1.0}", FloatLit(e.value - 1.0)
            if e.value != 0:
                yield f"{e.value} -> {-e.value}", FloatLit(-e.value)
    elif isinstance(e, BoolLit):
        if "negation" in operators:
            yield f"{e.value} -> {not e.value}", BoolLit(not e.value)
    elif isinstance(e, Var):
        if "variable" in operators and e.name in variables:
            for other, vtype in variables.items():
                if other != e.name and vtype == variables[e.name]:
                    yield f"{e.name} -> {other}", Var(other)


def statement_mutants(p: Program, sid: StatementId,
                      operators: Sequence[str] = MUTATION_OPERATORS) -> list[tuple[str, Statement]]:
    """Valid single mutations of the statement's own expressions.

    Nested statements of an ``if``/``while`` are separate statements and
    are left alone; only the condition is mutated.
    """
    stmt = p.statement(sid)
    variables = determine_scope(p, sid).variables
    results = []
    seen = set()

    def emit(desc, new_stmt):
        new_stmt = parse_statement(format_statement_inline(new_stmt))  # canonical form
        if new_stmt == stmt or new_stmt in seen:
            return
        mutated = apply_edits(p, [Edit(Op.REPLACE, sid, Ingredient(new_stmt, None))])
        if is_valid(mutated):
            seen.add(new_stmt)
            results.append((desc, new_stmt))

    if isinstance(stmt, VarDecl):
        for desc, e in _expr_mutants(stmt.init, operators, variables):
            emit(desc, VarDecl(stmt.name, stmt.type, e))
    elif isinstance(stmt, Assign):
        for desc, e in _expr_mutants(stmt.value, operators, variables):
            emit(desc, Assign(stmt.name, e))
    elif isinstance(stmt, (If, While)):
        if "negation" in operators:
            emit("negate condition", replace(stmt, cond=Unary("!", stmt.cond), sid=None))
        for desc, e in _expr_mutants(stmt.cond, operators, variables):
            emit(desc, replace(stmt, cond=e, sid=None))
    elif isinstance(stmt, Return) and stmt.value is not None:
        for desc, e in _expr_mutants(stmt.value, operators, variables):
            emit(desc, Return(e))
    elif isinstance(stmt, CallStmt):
        for desc, e in _expr_mutants(stmt.call, operators, variables):
            emit(desc, CallStmt(e))
    return results


# --------------------------------------------------------------------------
# seeding


@dataclass
class SeedSpec:
    k: int = 1
    require_redundant: bool = True  # F-class when set, H-class otherwise
    require_rename: bool = False  # H-class: some original is reachable only by renaming
    rng_seed: int = 0
    operators: tuple = MUTATION_OPERATORS
    module: Optional[str] = None
    max_attempts: int = 1000
    gamma_min: float = 0.1
    n_max: int = 40

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")

    @property
    def label(self) -> str:
        return "F" if self.require_redundant else "H"


@dataclass(frozen=True)
class Mutation:
    target: StatementId
    original: Statement
    mutant: Statement
    description: str


@dataclass
class SeededBug:
    program: Program
    mutations: tuple
    failing_tests: list[str]
    label: str
    report: dict
    spec: SeedSpec
    attempt: int = 0

    @property
    def k(self) -> int:
        return len(self.mutations)

    def ground_truth(self) -> list[Edit]:
        return [Edit(Op.REPLACE, m.target, Ingredient(m.original, None)) for m in self.mutations]


@dataclass
class Rejected:
    principle: str
    detail: str = ""


def _fails_some_test(p: Program, suite: Sequence[TestCase], step_limit: int) -> bool:
    return any(run_verdict(p, t, step_limit) != Verdict.PASS for t in suite)


def _search_config(spec: SeedSpec, screening: Screening = Screening()) -> SearchConfig:
    return SearchConfig(gamma_min=spec.gamma_min, n_max=spec.n_max, screening=screening,
                        ingredient_mode=IngredientMode.PACKAGE)


def check_admissibility(original: Program, suite: Sequence[TestCase], mutations: Sequence[Mutation],
                        spec: SeedSpec, step_limit: int = 100_000):
    """Return (report, problem) for an admissible bug, or a Rejected value."""
    buggy = apply_edits(original, [Edit(Op.REPLACE, m.target, Ingredient(m.mutant, None)) for m in mutations])
    if not is_valid(buggy):
        return Rejected("validity", "mutations do not validate together")
    # principle 2: every nonempty subset of the mutations breaks some test
    for r in range(1, len(mutations) + 1):
        for subset in itertools.combinations(mutations, r):
            partial = apply_edits(original, [Edit(Op.REPLACE, m.target, Ingredient(m.mutant, None))
                                             for m in subset])
            if not _fails_some_test(partial, suite, step_limit):
                return Rejected("principle 2", "subset " + ", ".join(str(m.target) for m in subset)
                                + " passes every test")
    # principle 1: fault localization selects every mutated statement
    try:
        problem = prepare_problem(buggy, suite, _search_config(spec))
    except (NoNegativeTest, EmptyCandidateSet) as err:
        return Rejected("principle 1", str(err))
    except Exception as err:  # NoModificationPoints and friends
        return Rejected("principle 1", f"{type(err).__name__}: {err}")
    chosen = {c.id for c in problem.candidates}
    missing = [m.target for m in mutations if m.target not in chosen]
    if missing:
        return Rejected("principle 1", "not selected: " + ", ".join(map(str, missing)))
    # repairability inside the intended search space
    direct_ok = [_original_available(problem, m) for m in mutations]
    report = {
        "principle_1": "ok",
        "principle_2": f"all {2 ** len(mutations) - 1} nonempty subsets fail a test",
        "candidates": len(problem.candidates),
        "modification_points": problem.n,
        "failing_tests": len(problem.partition.negative),
        "original_in_direct_space": direct_ok,
    }
    if spec.require_redundant:
        if not all(direct_ok):
            return Rejected("repairability", "an original statement is missing from its ingredient list")
    else:
        renamed = prepare_problem(buggy, suite, _search_config(spec, Screening(True, False)))
        typed_ok = [_original_available(renamed, m) for m in mutations]
        report["original_in_type_matched_space"] = typed_ok
        report["requires_rename"] = all(typed_ok) and not all(direct_ok)
        if spec.require_rename and not report["requires_rename"]:
            return Rejected("repairability", "not a rename-only repair")
    # principle 3: the deletion baseline finds nothing
    kali = run_deletion_baseline(problem, _search_config(spec))
    if kali.archive:
        return Rejected("principle 3", "deletion baseline repairs it: "
                        + "; ".join(e.to_line() for e in kali.archive[0].edits))
    report["principle_3"] = f"deletion baseline tried {kali.evaluations} variants, none adequate"
    return report, problem, buggy


def _original_available(problem, m: Mutation) -> bool:
    for pt in problem.points:
        if pt.sid == m.target:
            return Op.REPLACE in pt.ops and any(i.statement == m.original for i in pt.ingredients)
    return False


def seed_bug(p: Program, suite: Sequence[TestCase], spec: SeedSpec,
             rng: Optional[random.Random] = None, step_limit: int = 100_000):
    """Draw mutations until an admissible bug is found.

    Returns a :class:`SeededBug`; raises :class:`ExhaustedAttempts` after
    ``spec.max_attempts`` draws.
    """
    rng = rng or random.Random(spec.rng_seed)
    if _fails_some_test(p, suite, step_limit):
        raise ValueError("the input program must pass its whole suite")
    module = spec.module
    pool = [sid for sid in p.index if module is None or sid.module == module]
    redundant = set(find_redundant_statements(p, module))
    mutants_cache: dict = {}

    def mutants(sid):
        if sid not in mutants_cache:
            mutants_cache[sid] = statement_mutants(p, sid, spec.operators)
        return mutants_cache[sid]

    mutable = [sid for sid in pool if mutants(sid)]
    if spec.require_redundant:
        choices = [sid for sid in mutable if sid in redundant]
    else:
        choices = mutable
    rename_pool = rename_candidates(p, suite, mutable) if spec.require_rename else []
    if len(choices) < spec.k or (spec.require_rename and not rename_pool):
        raise ExhaustedAttempts("not enough mutable statements for this spec")
    rejections: dict = {}
    for attempt in range(1, spec.max_attempts + 1):
        if spec.require_rename:
            first = rng.choice(rename_pool)
            rest = rng.sample([s for s in choices if s != first], spec.k - 1)
            targets = [first] + rest
        else:
            targets = rng.sample(choices, spec.k)
        if not spec.require_redundant and all(t in redundant for t in targets):
            rejections["class"] = rejections.get("class", 0) + 1
            continue
        mutations = []
        for sid in targets:
            desc, mutant = rng.choice(mutants(sid))
            mutations.append(Mutation(sid, p.statement(sid), mutant, desc))
        mutations.sort(key=lambda m: m.target)
        outcome = check_admissibility(p, suite, mutations, spec, step_limit)
        if isinstance(outcome, Rejected):
            rejections[outcome.principle] = rejections.get(outcome.principle, 0) + 1
            log.debug("attempt %d rejected (%s): %s", attempt, outcome.principle, outcome.detail)
            continue
        report, problem, buggy = outcome
        report["attempts"] = attempt
        report["rejections"] = dict(sorted(rejections.items()))
        failing = [t.name for t in problem.partition.negative]
        return SeededBug(buggy, tuple(mutations), failing, spec.label, report, spec, attempt)
    raise ExhaustedAttempts(f"no admissible bug in {spec.max_attempts} attempts: {rejections}")


def rename_candidates(p: Program, suite: Sequence[TestCase], sids: Sequence[StatementId]) -> list:
    """Statements whose exact text is only reachable by renaming another seed."""
    coverage = collect_coverage(p, suite, require_negative=False)
    seeds = [SeedInfo(p, s) for s in collect_seed_statements(coverage, p)]
    out = []
    for sid in sids:
        stmt = p.statement(sid)
        scope = determine_scope(p, sid)
        others = [s for s in seeds if not (s.statement == stmt)]
        direct = any(
            (ing := screen_direct(s, scope, IngredientMode.PACKAGE, sid, p)) is not None and ing.statement == stmt
            for s in others)
        if direct:
            continue
        if any(i.statement == stmt for s in others
               for i in screen_type_match(s, scope, IngredientMode.PACKAGE, sid, p, True, False)):
            out.append(sid)
    return out


# --------------------------------------------------------------------------
# bundles on disk


@dataclass
class BugBundle:
    name: str
    path: Path
    program: Program
    suite: list[TestCase]
    meta: dict
    fix: list[Edit] = field(default_factory=list)

    @property
    def label(self) -> str:
        return self.meta.get("class", "?")

    @property
    def k(self) -> int:
        return int(self.meta.get("k", 0))


def write_bundle(bug: SeededBug, directory: Path, name: str, subject: str, suite_ref: str,
                 original: Program) -> Path:
    directory = Path(directory) / name
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "buggy.ml").write_text(format_program(bug.program), encoding="utf-8")
    (directory / "fix.edits").write_text(format_edit_script(bug.ground_truth()), encoding="utf-8")
    meta = {
        "name": name,
        "subject": subject,
        "suite": suite_ref,
        "class": bug.label,
        "k": bug.k,
        "seed": bug.spec.rng_seed,
        "module": bug.spec.module,
        "mutations": [
            {"target": str(m.target), "original": format_statement_inline(m.original),
             "mutant": format_statement_inline(m.mutant), "operator": m.description}
            for m in bug.mutations
        ],
        "redundant": [m.target in set(find_redundant_statements(original, m.target.module)) for m in bug.mutations],
        "failing_tests": bug.failing_tests,
        "admissibility": bug.report,
    }
    (directory / "bug.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return directory


def load_bundle(path, suites_dir: Optional[Path] = None) -> BugBundle:
    from .minilang import load_suite

    path = Path(path)
    meta = json.loads((path / "bug.json").read_text(encoding="utf-8"))
    program = parse_program((path / "buggy.ml").read_text(encoding="utf-8"))
    suite_path = Path(meta["suite"])
    if not suite_path.is_absolute():
        base = suites_dir if suites_dir is not None else path
        suite_path = (base / suite_path).resolve()
    suite = load_suite(suite_path)
    fix_path = path / "fix.edits"
    fix = parse_edit_script(fix_path.read_text(encoding="utf-8")) if fix_path.exists() else []
    return BugBundle(meta.get("name", path.name), path, program, suite, meta, fix)
