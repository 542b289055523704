"""Benchmark campaigns: many trials per (bug, variant), and their metrics."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import mean
from typing import Iterable, Optional, Sequence

from .ingredients import Screening
from .search import VARIANT_SCREENING, RepairProblem, SearchConfig, prepare_problem, run_variant

log = logging.getLogger(__name__)


def trial_seed(campaign_seed: int, bug: str, variant: str, trial: int) -> int:
    digest = hashlib.sha256(f"{campaign_seed}:{bug}:{variant}:{trial}".encode()).hexdigest()
    return int(digest[:12], 16)


def variant_config(base: SearchConfig, variant: str, seed: int) -> SearchConfig:
    screening = Screening.from_name(VARIANT_SCREENING.get(variant, "direct"))
    return dataclasses.replace(base, rng_seed=seed, screening=screening)


@dataclass
class CampaignSpec:
    bugs: list[str]
    variants: list[str]
    trials: int = 30
    seed: int = 0
    base: SearchConfig = field(default_factory=SearchConfig)
    workers: int = 1


class ProblemCache:
    """Prepared problems keyed by bug and the settings that shape them."""

    def __init__(self, loader):
        self.loader = loader
        self._problems: dict = {}

    def get(self, bug: str, config: SearchConfig) -> RepairProblem:
        key = (bug, config.problem_key())
        if key not in self._problems:
            program, suite = self.loader(bug)
            self._problems[key] = prepare_problem(program, suite, config)
        return self._problems[key]


def run_trial(problems: ProblemCache, bug: str, variant: str, trial: int, spec: CampaignSpec) -> dict:
    seed = trial_seed(spec.seed, bug, variant, trial)
    config = variant_config(spec.base, variant, seed)
    record = {"bug": bug, "variant": variant, "trial": trial, "seed": seed}
    try:
        problem = problems.get(bug, config)
        result = run_variant(variant, problem, config)
    except Exception as err:  # recorded per trial; the campaign goes on
        log.exception("trial %s/%s/%d failed", bug, variant, trial)
        record.update(error=f"{type(err).__name__}: {err}", repaired=False)
        return record
    smallest = result.smallest()
    record.update(
        repaired=result.repaired,
        evaluations=result.evaluations,
        evaluations_to_first=result.evaluations_to_first,
        patches=len(result.archive),
        smallest_size=smallest[0].size if smallest else None,
        smallest_count=len(smallest),
        cpu_seconds=round(result.cpu_time, 4),
        anomalies=len(result.anomalies),
    )
    return record


_WORKER_CACHE: Optional[ProblemCache] = None


def _worker_job(args) -> list[dict]:
    global _WORKER_CACHE
    loader, bug, variant, spec = args
    if _WORKER_CACHE is None:
        _WORKER_CACHE = ProblemCache(loader)
    return [run_trial(_WORKER_CACHE, bug, variant, t, spec) for t in range(spec.trials)]


def run_campaign(spec: CampaignSpec, loader, sink=None) -> list[dict]:
    """Run every (bug, variant, trial); ``sink`` receives each record as it lands.

    Records come back in (bug, variant, trial) order whatever the worker count.
    """
    jobs = [(bug, variant) for bug in spec.bugs for variant in spec.variants]
    records: list[dict] = []
    if spec.workers <= 1:
        cache = ProblemCache(loader)
        for bug, variant in jobs:
            for t in range(spec.trials):
                rec = run_trial(cache, bug, variant, t, spec)
                records.append(rec)
                if sink is not None:
                    sink(rec)
        return records
    with ProcessPoolExecutor(spec.workers) as pool:
        for batch in pool.map(_worker_job, [(loader, b, v, spec) for b, v in jobs]):
            for rec in batch:
                records.append(rec)
                if sink is not None:
                    sink(rec)
    return records


# --------------------------------------------------------------------------
# metrics


@dataclass
class MetricsRow:
    bug: str
    variant: str
    trials: int
    success: int
    mean_evaluations_to_first: Optional[float]
    mean_cpu_seconds: Optional[float]
    mean_smallest_patch_size: Optional[float]
    mean_distinct_smallest_patches: Optional[float]
    errors: int = 0

    COLUMNS = ("bug", "variant", "trials", "success", "evaluations", "cpu_seconds", "patch_size", "patches",
               "errors")

    def cells(self) -> list[str]:
        def fmt(x, digits=2):
            return "-" if x is None else f"{x:.{digits}f}"

        return [self.bug, self.variant, str(self.trials), str(self.success),
                fmt(self.mean_evaluations_to_first, 1), fmt(self.mean_cpu_seconds, 3),
                fmt(self.mean_smallest_patch_size), fmt(self.mean_distinct_smallest_patches), str(self.errors)]


def _mean(values) -> Optional[float]:
    values = [v for v in values if v is not None]
    return mean(values) if values else None


def compute_metrics(records: Iterable[dict]) -> list[MetricsRow]:
    """One row per (bug, variant), in first-appearance order.

    Means run over successful trials only and are absent without any.
    """
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec["bug"], rec["variant"]), []).append(rec)
    rows = []
    for (bug, variant), recs in groups.items():
        won = [r for r in recs if r.get("repaired")]
        rows.append(MetricsRow(
            bug, variant, len(recs), len(won),
            _mean(r["evaluations_to_first"] for r in won),
            _mean(r.get("cpu_seconds") for r in won),
            _mean(r["smallest_size"] for r in won),
            _mean(r["smallest_count"] for r in won),
            sum(1 for r in recs if "error" in r),
        ))
    return rows


def format_metrics(rows: Sequence[MetricsRow]) -> str:
    lines = ["\t".join(MetricsRow.COLUMNS)]
    lines.extend("\t".join(r.cells()) for r in rows)
    return "\n".join(lines) + "\n"


def read_trials(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
