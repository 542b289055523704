"""Patch search: fitness, NSGA-II machinery, operators and search variants."""

from .algorithms import (
    VARIANT_SCREENING, VARIANTS, RepairResult, deletion_candidates, run_deletion_baseline, run_nsga2,
    run_random_search, run_single_objective, run_variant,
)
from .fitness import (
    ArchiveEntry, Evaluation, Evaluator, RepairProblem, SearchConfig, edit_key, prepare_problem,
)
from .nsga2 import INVALID, Objectives, crowding_distance, dominates, fast_nondominated_sort
from .operators import crossover, hux, init_population, mutate, random_patch, single_point
