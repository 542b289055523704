"""Drop positive tests that never execute a candidate statement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .localization import CoverageMatrix
from .minilang import TestCase


@dataclass(frozen=True)
class TestPartition:
    negative: tuple[TestCase, ...]  # T_f, never filtered
    positive: tuple[TestCase, ...]  # retained positives, T_c
    dropped: tuple[TestCase, ...]

    __test__ = False

    @property
    def all_tests(self) -> tuple[TestCase, ...]:
        return self.negative + self.positive + self.dropped

    def summary(self) -> dict:
        original = len(self.negative) + len(self.positive) + len(self.dropped)
        return {
            "original_suite": original,
            "negative": len(self.negative),
            "positive_kept": len(self.positive),
            "positive_dropped": len(self.dropped),
            "reduced_suite": len(self.negative) + len(self.positive),
        }


def filter_positive_tests(m: CoverageMatrix, candidates: Iterable) -> TestPartition:
    targets = set(candidates)
    negative, kept, dropped = [], [], []
    for t, o in zip(m.tests, m.outcomes):
        if not o.passed:
            negative.append(t)
        elif o.covered & targets:
            kept.append(t)
        else:
            dropped.append(t)
    return TestPartition(tuple(negative), tuple(kept), tuple(dropped))
