"""Spectrum-based fault localization (Ochiai) and seed-statement collection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .minilang import DEFAULT_STEP_LIMIT, Program, StatementId, TestCase, execute_test, validate_program
from .minilang.interpreter import ExecutionOutcome
from .minilang.nodes import Statement


class NoNegativeTest(Exception):
    """Every test passes, so there is nothing to repair."""


class EmptyCandidateSet(Exception):
    """No statement reached the suspiciousness threshold."""


@dataclass
class CoverageMatrix:
    tests: list[TestCase]
    outcomes: list[ExecutionOutcome]
    n_cf: dict = field(default_factory=dict)  # StatementId -> failing tests covering it
    n_cs: dict = field(default_factory=dict)  # StatementId -> passing tests covering it

    @property
    def n_f(self) -> int:
        return sum(1 for o in self.outcomes if not o.passed)

    @property
    def failing(self) -> list[TestCase]:
        return [t for t, o in zip(self.tests, self.outcomes) if not o.passed]

    @property
    def passing(self) -> list[TestCase]:
        return [t for t, o in zip(self.tests, self.outcomes) if o.passed]

    def covered(self, test: TestCase) -> frozenset:
        return self.outcomes[self.tests.index(test)].covered

    def outcome(self, test: TestCase) -> ExecutionOutcome:
        return self.outcomes[self.tests.index(test)]

    def statements(self) -> set:
        return set(self.n_cf) | set(self.n_cs)


@dataclass(frozen=True)
class SuspiciousStatement:
    id: StatementId
    susp: float


def tally(tests: Sequence[TestCase], outcomes: Sequence[ExecutionOutcome]) -> CoverageMatrix:
    m = CoverageMatrix(list(tests), list(outcomes))
    for o in outcomes:
        counts = m.n_cs if o.passed else m.n_cf
        for sid in o.covered:
            counts[sid] = counts.get(sid, 0) + 1
    return m


def collect_coverage(p: Program, suite: Sequence[TestCase], step_limit: int = DEFAULT_STEP_LIMIT,
                     require_negative: bool = True) -> CoverageMatrix:
    validate_program(p)
    outcomes = [execute_test(p, t, step_limit) for t in suite]
    m = tally(suite, outcomes)
    if require_negative and m.n_f == 0:
        raise NoNegativeTest("all tests pass on the input program")
    return m


def ochiai(n_cf: int, n_cs: int, n_f: int) -> float:
    if n_cf == 0:
        return 0.0
    return n_cf / math.sqrt(n_f * (n_cf + n_cs))


def ochiai_suspiciousness(m: CoverageMatrix) -> list[SuspiciousStatement]:
    """Suspiciousness of every statement covered by at least one test."""
    n_f = m.n_f
    out = []
    for sid in sorted(m.statements()):
        out.append(SuspiciousStatement(sid, ochiai(m.n_cf.get(sid, 0), m.n_cs.get(sid, 0), n_f)))
    return out


def select_candidates(ranking: Iterable[SuspiciousStatement], gamma_min: float = 0.1,
                      n_max: int = 40) -> list[SuspiciousStatement]:
    chosen = [s for s in ranking if s.susp >= gamma_min]
    if not chosen:
        raise EmptyCandidateSet(f"no statement has suspiciousness >= {gamma_min}")
    chosen.sort(key=lambda s: (-s.susp, s.id))
    return chosen[:n_max]


@dataclass(frozen=True)
class Seed:
    statement: Statement
    origins: tuple  # every StatementId with this exact AST, first occurrence first

    @property
    def origin(self) -> StatementId:
        return self.origins[0]


def collect_seed_statements(m: CoverageMatrix, p: Program) -> list[Seed]:
    """Covered statements deduplicated by AST, in source order."""
    covered = set()
    for o in m.outcomes:
        covered |= o.covered
    seeds: dict = {}
    for sid in p.index:  # index preserves source order
        if sid not in covered:
            continue
        stmt = p.statement(sid)
        seeds.setdefault(stmt, []).append(sid)
    return [Seed(stmt, tuple(origins)) for stmt, origins in seeds.items()]


def format_ranking(m: CoverageMatrix, ranking: Sequence[SuspiciousStatement]) -> str:
    lines = ["statement\tn_cf\tn_cs\tsusp"]
    for s in sorted(ranking, key=lambda s: (-s.susp, s.id)):
        lines.append(f"{s.id}\t{m.n_cf.get(s.id, 0)}\t{m.n_cs.get(s.id, 0)}\t{s.susp:.6f}")
    return "\n".join(lines) + "\n"
