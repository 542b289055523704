"""Checked-in MiniLang subjects, their test suites and seeded bugs."""

from __future__ import annotations

from pathlib import Path

from ..minilang import Program, TestCase, load_suite, parse_program

CORPUS_DIR = Path(__file__).resolve().parent
PROGRAMS = CORPUS_DIR / "programs"
SUITES = CORPUS_DIR / "suites"
BUGS = CORPUS_DIR / "bugs"
FIXTURES = CORPUS_DIR / "fixtures"

# module that bugs are seeded into, per subject
SEED_MODULES = {"numeric": "intops", "finance": "money"}


def subjects() -> list[str]:
    return sorted(p.stem for p in PROGRAMS.glob("*.ml"))


def load_subject(name: str) -> tuple[Program, list[TestCase]]:
    program = parse_program((PROGRAMS / f"{name}.ml").read_text(encoding="utf-8"))
    return program, load_suite(SUITES / f"{name}.tests")


def bug_names() -> list[str]:
    return sorted(p.parent.name for p in BUGS.glob("*/bug.json"))


def load_bug(name: str):
    from ..seeder import load_bundle

    return load_bundle(BUGS / name)


def load_fixture(name: str) -> tuple[Program, list[TestCase]]:
    base = FIXTURES / name
    program = parse_program((base / "program.ml").read_text(encoding="utf-8"))
    return program, load_suite(base / "suite.tests")
