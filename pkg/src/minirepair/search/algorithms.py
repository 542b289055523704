"""Search variants: NSGA-II, single-objective GA, random search and a deletion baseline."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..genome import Edit, Op
from ..ingredients import Ingredient
from ..minilang.nodes import BoolLit, FloatLit, If, IntLit, Return, StrLit, ValueType
from .fitness import ArchiveEntry, Evaluation, Evaluator, RepairProblem, SearchConfig
from .nsga2 import environmental_selection, rank_and_crowd
from .operators import crossover, init_population, mutate, random_patch


@dataclass
class RepairResult:
    variant: str
    archive: list[ArchiveEntry]
    evaluations: int
    evaluations_to_first: Optional[int]
    wall_time: float
    cpu_time: float
    generations: list[dict] = field(default_factory=list)
    anomalies: list[str] = field(default_factory=list)

    @property
    def repaired(self) -> bool:
        return bool(self.archive)

    def smallest(self) -> list[ArchiveEntry]:
        """The non-dominated repairs: those of minimal size."""
        if not self.archive:
            return []
        best = min(e.size for e in self.archive)
        return [e for e in self.archive if e.size == best]


class _Run:
    def __init__(self, problem: RepairProblem, config: SearchConfig, variant: str,
                 on_generation: Optional[Callable[[dict], None]] = None):
        self.problem = problem
        self.config = config
        self.variant = variant
        self.rng = random.Random(config.rng_seed)
        self.evaluator = Evaluator(problem, config)
        self.on_generation = on_generation
        self.stats: list[dict] = []
        self.p_m = config.p_m if config.p_m is not None else 1.0 / problem.n
        self._wall = time.perf_counter()
        self._cpu = time.process_time()

    def record(self, generation: int, evals: list[Evaluation]) -> None:
        valid = [e.objectives.f2 for e in evals if e.objectives.valid]
        row = {
            "generation": generation,
            "best_f2": min(valid) if valid else None,
            "valid": len(valid),
            "archive_size": len(self.evaluator.archive),
            "evaluations": self.evaluator.evaluations,
        }
        self.stats.append(row)
        if self.on_generation is not None:
            self.on_generation(row)

    def result(self) -> RepairResult:
        ev = self.evaluator
        archive = sorted(ev.archive.values(), key=lambda a: a.found_at)
        return RepairResult(self.variant, archive, ev.evaluations, ev.first_repair,
                            time.perf_counter() - self._wall, time.process_time() - self._cpu,
                            self.stats, list(ev.anomalies))

    def offspring(self, parents, pick) -> list:
        """N children from binary-tournament parents; ``pick`` runs one tournament."""
        points = self.problem.points
        size = self.config.population_size
        children = []
        while len(children) < size:
            a, b = parents[pick()], parents[pick()]
            if self.rng.random() < self.config.p_c:
                a, b = crossover(a, b, points, self.rng)
            children.append(mutate(a, points, self.p_m, self.rng))
            if len(children) < size:
                children.append(mutate(b, points, self.p_m, self.rng))
        return children


def _tournament(rng: random.Random, size: int, better: Callable[[int, int], Optional[bool]]) -> int:
    i, j = rng.randrange(size), rng.randrange(size)
    verdict = better(i, j)
    if verdict is None:
        return i if rng.random() < 0.5 else j
    return i if verdict else j


def run_nsga2(problem: RepairProblem, config: SearchConfig, variant: str = "arja",
              on_generation=None) -> RepairResult:
    """Multi-objective search over (patch size, weighted failure rate).

    The initial population counts as the first of ``config.generations``
    generations, so a run uses exactly N x G evaluations.
    """
    run = _Run(problem, config, variant, on_generation)
    ev = run.evaluator
    n = config.population_size
    pop = init_population(n, problem.points, config.mu, run.rng)
    evals = [ev.evaluate(x) for x in pop]
    run.record(1, evals)
    for g in range(2, config.generations + 1):
        objs = [e.objectives for e in evals]
        rank, crowd, _ = rank_and_crowd(objs)

        def better(i, j):
            if rank[i] != rank[j]:
                return rank[i] < rank[j]
            if crowd[i] != crowd[j]:
                return crowd[i] > crowd[j]
            return None

        children = run.offspring(pop, lambda: _tournament(run.rng, n, better))
        child_evals = [ev.evaluate(x) for x in children]
        merged = pop + children
        merged_evals = evals + child_evals
        keep = environmental_selection([e.objectives for e in merged_evals], n)
        pop = [merged[i] for i in keep]
        evals = [merged_evals[i] for i in keep]
        run.record(g, evals)
    return run.result()


def _f2(e: Evaluation) -> float:
    return e.objectives.f2 if e.objectives.valid else math.inf


def run_single_objective(problem: RepairProblem, config: SearchConfig, variant: str = "arja_s",
                         on_generation=None) -> RepairResult:
    """Elitist GA minimizing the weighted failure rate alone."""
    run = _Run(problem, config, variant, on_generation)
    ev = run.evaluator
    n = config.population_size
    pop = init_population(n, problem.points, config.mu, run.rng)
    evals = [ev.evaluate(x) for x in pop]
    run.record(1, evals)
    for g in range(2, config.generations + 1):
        fit = [_f2(e) for e in evals]

        def better(i, j):
            return None if fit[i] == fit[j] else fit[i] < fit[j]

        children = run.offspring(pop, lambda: _tournament(run.rng, n, better))
        child_evals = [ev.evaluate(x) for x in children]
        merged = pop + children
        merged_evals = evals + child_evals
        keep = sorted(range(len(merged)), key=lambda i: _f2(merged_evals[i]))[:n]
        pop = [merged[i] for i in keep]
        evals = [merged_evals[i] for i in keep]
        run.record(g, evals)
    return run.result()


def run_random_search(problem: RepairProblem, config: SearchConfig, variant: str = "arja_r",
                      on_generation=None) -> RepairResult:
    """Independent draws from the initialization distribution, N x G of them."""
    run = _Run(problem, config, variant, on_generation)
    ev = run.evaluator
    for g in range(1, config.generations + 1):
        evals = [ev.evaluate(random_patch(problem.points, config.mu, run.rng))
                 for _ in range(config.population_size)]
        run.record(g, evals)
    return run.result()


_DEFAULT_RETURN = {
    ValueType.INT: IntLit(0), ValueType.FLOAT: FloatLit(0.0), ValueType.BOOL: BoolLit(False),
    ValueType.STR: StrLit(""),
}


def deletion_candidates(problem: RepairProblem) -> list[Edit]:
    """Single-edit removal/skip patches in descending suspiciousness.

    For each candidate statement: delete it; if it is an ``if``, make its
    condition false; and insert a return before it (with a default value in
    functions that return one).
    """
    out = []
    p = problem.program
    for cand in problem.candidates:
        stmt = p.statement(cand.id)
        info = p.index[cand.id]
        out.append(Edit(Op.DELETE, cand.id))
        if isinstance(stmt, If):
            skipped = If(BoolLit(False), stmt.then, stmt.orelse)
            out.append(Edit(Op.REPLACE, cand.id, Ingredient(skipped, None)))
        rtype = info.function.return_type
        early = Return(None if rtype == ValueType.VOID else _DEFAULT_RETURN[rtype])
        out.append(Edit(Op.INSERT, cand.id, Ingredient(early, None)))
    return out


def run_deletion_baseline(problem: RepairProblem, config: SearchConfig, variant: str = "kali",
                          on_generation=None) -> RepairResult:
    run = _Run(problem, config, variant, on_generation)
    evals = [run.evaluator.evaluate_edits([e]) for e in deletion_candidates(problem)]
    run.record(1, evals)
    return run.result()


VARIANTS = {
    "arja": run_nsga2,
    "arja_v": run_nsga2,
    "arja_m": run_nsga2,
    "arja_b": run_nsga2,
    "arja_s": run_single_objective,
    "arja_r": run_random_search,
    "kali": run_deletion_baseline,
}

VARIANT_SCREENING = {"arja_v": "vars", "arja_m": "funcs", "arja_b": "both"}


def run_variant(name: str, problem: RepairProblem, config: SearchConfig, on_generation=None) -> RepairResult:
    try:
        algorithm = VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown variant {name!r}; choose from {', '.join(VARIANTS)}") from None
    return algorithm(problem, config, name, on_generation)
