"""Problem preparation and patch evaluation (patch size and weighted failure rate)."""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..filtering import TestPartition, filter_positive_tests
from ..genome import Edit, Patch, apply_edits, decode
from ..ingredients import IngredientMode, ModificationPoint, Screening, build_modification_points
from ..localization import (
    CoverageMatrix, Seed, SuspiciousStatement, collect_coverage, collect_seed_statements,
    ochiai_suspiciousness, select_candidates,
)
from ..minilang import DEFAULT_STEP_LIMIT, Program, StaticError, TestCase, Verdict, compile_program, run_verdict
from .nsga2 import INVALID, Objectives

log = logging.getLogger(__name__)


@dataclass
class SearchConfig:
    population_size: int = 40
    generations: int = 50
    gamma_min: float = 0.1
    n_max: int = 40
    mu: float = 0.06
    w: float = 0.5
    p_c: float = 1.0
    p_m: Optional[float] = None  # None means 1/n
    n_e: Optional[int] = None
    sample_size: Optional[int] = None
    rng_seed: int = 0
    step_limit: int = DEFAULT_STEP_LIMIT
    ingredient_mode: IngredientMode = IngredientMode.PACKAGE
    screening: Screening = field(default_factory=Screening)
    operation_rules: bool = True
    ingredient_rules: bool = True
    disable_rules: bool = True
    reuse_unaffected: bool = True  # tests that cover no edited statement keep their verdict

    def problem_key(self) -> tuple:
        """Settings that shape the prepared problem (everything before the search)."""
        return (self.gamma_min, self.n_max, self.step_limit, self.ingredient_mode, self.screening,
                self.operation_rules, self.ingredient_rules)


@dataclass
class RepairProblem:
    program: Program
    suite: list[TestCase]
    coverage: CoverageMatrix
    ranking: list[SuspiciousStatement]
    candidates: list[SuspiciousStatement]
    partition: TestPartition
    seeds: list[Seed]
    points: list[ModificationPoint]
    step_limit: int
    prep_seconds: float = 0.0

    @property
    def n(self) -> int:
        return len(self.points)

    def describe(self) -> dict:
        return {
            "statements": self.program.count_statements(),
            "tests": len(self.suite),
            "negative_tests": len(self.partition.negative),
            "positive_tests_kept": len(self.partition.positive),
            "positive_tests_dropped": len(self.partition.dropped),
            "candidates": len(self.candidates),
            "seeds": len(self.seeds),
            "modification_points": self.n,
            "ingredients": sum(len(p.ingredients) for p in self.points),
        }


def prepare_problem(program: Program, suite: Sequence[TestCase], config: SearchConfig) -> RepairProblem:
    started = time.perf_counter()
    coverage = collect_coverage(program, suite, config.step_limit)
    ranking = ochiai_suspiciousness(coverage)
    candidates = select_candidates(ranking, config.gamma_min, config.n_max)
    partition = filter_positive_tests(coverage, [c.id for c in candidates])
    seeds = collect_seed_statements(coverage, program)
    points = build_modification_points(program, candidates, seeds, config.ingredient_mode, config.screening,
                                       config.operation_rules, config.ingredient_rules)
    problem = RepairProblem(program, list(suite), coverage, ranking, candidates, partition, seeds, points,
                            config.step_limit)
    problem.prep_seconds = time.perf_counter() - started
    log.info("prepared problem: %s", problem.describe())
    return problem


def edit_key(edits: Sequence[Edit]) -> tuple:
    return tuple(sorted(e.key() for e in edits))


@dataclass
class Evaluation:
    objectives: Objectives
    edits: tuple
    index: int  # 1-based evaluation number within the run


@dataclass
class ArchiveEntry:
    edits: tuple
    objectives: Objectives
    found_at: int
    patch: Optional[Patch] = None

    @property
    def size(self) -> int:
        return len(self.edits)


class Evaluator:
    """Evaluates patches of one trial, counting every call and archiving repairs."""

    def __init__(self, problem: RepairProblem, config: SearchConfig, use_filtered_suite: bool = True):
        self.problem = problem
        self.config = config
        self.evaluations = 0
        self.archive: dict = {}
        self.anomalies: list[str] = []
        self.first_repair: Optional[int] = None
        self._cache: dict = {}
        self._revalidated: dict = {}
        cov = problem.coverage
        outcomes = {t: o for t, o in zip(cov.tests, cov.outcomes)}
        part = problem.partition
        positives = part.positive if use_filtered_suite else part.positive + part.dropped
        self.t_f = [(t, outcomes[t]) for t in part.negative]
        self.t_c = [(t, outcomes[t]) for t in positives]
        self._by_susp = sorted(range(problem.n), key=lambda j: (-problem.points[j].susp, j))

    # -- objective computation
    def _verdict(self, patched: Program, test: TestCase, original, targets) -> Verdict:
        if self.config.reuse_unaffected and original.covered.isdisjoint(targets):
            return original.verdict
        return run_verdict(patched, test, self.problem.step_limit)

    def _failures(self, patched: Program, tests, targets) -> Optional[int]:
        failed = 0
        for t, original in tests:
            verdict = self._verdict(patched, t, original, targets)
            if verdict == Verdict.STEP_LIMIT:
                return None
            if verdict != Verdict.PASS:
                failed += 1
        return failed

    def objectives(self, edits: Sequence[Edit]) -> Objectives:
        """f1 and f2 for an edit list, without touching counters or the archive."""
        if not edits:
            return INVALID
        patched = apply_edits(self.problem.program, edits)
        try:
            compile_program(patched)
        except StaticError:
            return INVALID
        targets = {e.target for e in edits}
        fail_f = self._failures(patched, self.t_f, targets)
        if fail_f is None:
            return INVALID
        tests_c = self.t_c
        sampled = self.config.sample_size is not None and self.config.sample_size < len(self.t_c)
        if sampled:
            rng = random.Random(f"{self.config.rng_seed}:{self.evaluations}")
            tests_c = rng.sample(self.t_c, self.config.sample_size)
        fail_c = self._failures(patched, tests_c, targets)
        if fail_c is None:
            return INVALID
        f2 = self._f2(fail_f, fail_c, len(tests_c))
        if sampled and f2 == 0:
            fail_c = self._failures(patched, self.t_c, targets)
            if fail_c is None:
                return INVALID
            f2 = self._f2(fail_f, fail_c, len(self.t_c))
        return Objectives(len(edits), f2)

    def _f2(self, fail_f: int, fail_c: int, n_c: int) -> float:
        rate_f = fail_f / len(self.t_f)
        rate_c = fail_c / n_c if n_c else 0.0
        return rate_f + self.config.w * rate_c

    # -- counted entry points
    def edits_for(self, x: Patch) -> list[Edit]:
        edits = decode(x, self.problem.points, self.config.disable_rules)
        cap = self.config.n_e
        if cap is not None and len(edits) > cap:
            rank = {j: r for r, j in enumerate(self._by_susp)}
            edits = sorted(sorted(edits, key=lambda e: rank[e.point])[:cap], key=lambda e: e.point)
        return edits

    def evaluate(self, x: Patch) -> Evaluation:
        return self.evaluate_edits(self.edits_for(x), x)

    def evaluate_edits(self, edits: Sequence[Edit], x: Optional[Patch] = None) -> Evaluation:
        self.evaluations += 1
        edits = tuple(edits)
        key = edit_key(edits)
        obj = self._cache.get(key) if self.config.sample_size is None else None
        if obj is None:
            obj = self.objectives(edits)
            if self.config.sample_size is None:
                self._cache[key] = obj
        if obj.valid and obj.f2 == 0:
            self._archive(key, edits, obj, x)
        return Evaluation(obj, edits, self.evaluations)

    # -- archive
    def revalidate(self, edits: Sequence[Edit]) -> bool:
        """Every test of the original, unfiltered suite passes on the patched program."""
        patched = apply_edits(self.problem.program, edits)
        return all(run_verdict(patched, t, self.problem.step_limit) == Verdict.PASS for t in self.problem.suite)

    def _archive(self, key, edits, obj, x) -> None:
        if key in self.archive:
            return
        ok = self._revalidated.get(key)
        if ok is None:
            ok = self._revalidated[key] = self.revalidate(edits)
            if not ok:
                self.anomalies.append("patch with f2 = 0 failed full-suite revalidation: "
                                      + "; ".join(e.to_line() for e in edits))
                log.warning(self.anomalies[-1])
        if not ok:
            return
        self.archive[key] = ArchiveEntry(edits, obj, self.evaluations, x)
        if self.first_repair is None:
            self.first_repair = self.evaluations
