"""Command-line front end: repair, seed, campaign and report."""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .campaign import CampaignSpec, compute_metrics, format_metrics, read_trials, run_campaign, variant_config
from .genome import apply_edits, format_edit_script, unified_diff
from .ingredients import IngredientMode, NoModificationPoints, Screening
from .localization import EmptyCandidateSet, NoNegativeTest, format_ranking
from .minilang import MiniSyntaxError, StaticError, load_suite, parse_program
from .search import VARIANTS, SearchConfig, prepare_problem, run_variant

log = logging.getLogger("minirepair")

EXIT_REPAIRED, EXIT_NOT_REPAIRED, EXIT_ERROR = 0, 1, 2

_INT_KEYS = {"population_size", "generations", "n_max", "n_e", "sample_size", "rng_seed", "step_limit"}
_FLOAT_KEYS = {"gamma_min", "mu", "w", "p_c", "p_m"}
_BOOL_KEYS = {"operation_rules", "ingredient_rules", "disable_rules", "reuse_unaffected"}


class ConfigError(Exception):
    pass


def _convert(key: str, raw: str):
    text = raw.strip()
    try:
        if key in _INT_KEYS:
            return None if text.lower() in ("", "none") else int(text)
        if key in _FLOAT_KEYS:
            return None if text.lower() in ("", "none") else float(text)
        if key in _BOOL_KEYS:
            if text.lower() not in ("true", "false", "yes", "no", "on", "off", "1", "0"):
                raise ValueError(text)
            return text.lower() in ("true", "yes", "on", "1")
        if key == "ingredient_mode":
            return IngredientMode(text.lower())
        if key == "screening":
            return Screening.from_name(text.lower())
    except (ValueError, KeyError):
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    raise ConfigError(f"unknown setting {key!r}")


def load_config(path: Optional[str], base: Optional[SearchConfig] = None) -> SearchConfig:
    """Read the ``[search]`` section of an INI-style file over ``base``."""
    config = base or SearchConfig()
    if path is None:
        return config
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    if not parser.has_section("search"):
        return config
    updates = {key: _convert(key, value) for key, value in parser.items("search")}
    return dataclasses.replace(config, **updates)


def _flag_overrides(args) -> dict:
    names = {
        "population": "population_size", "generations": "generations", "gamma_min": "gamma_min",
        "n_max": "n_max", "mu": "mu", "w": "w", "p_c": "p_c", "p_m": "p_m", "n_e": "n_e",
        "sample_size": "sample_size", "seed": "rng_seed", "step_limit": "step_limit",
    }
    out = {field: getattr(args, flag) for flag, field in names.items() if getattr(args, flag, None) is not None}
    if getattr(args, "mode", None):
        out["ingredient_mode"] = IngredientMode(args.mode)
    if getattr(args, "no_rules", False):
        out.update(operation_rules=False, ingredient_rules=False, disable_rules=False)
    return out


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("search settings (override the config file)")
    g.add_argument("--config", help="INI file with a [search] section")
    g.add_argument("--population", type=int, help="population size N")
    g.add_argument("--generations", type=int, help="generations G (N x G evaluations)")
    g.add_argument("--gamma-min", type=float, help="suspiciousness threshold")
    g.add_argument("--n-max", type=int, help="maximum number of modification points")
    g.add_argument("--mu", type=float, help="initialization scale")
    g.add_argument("--w", type=float, help="weight of positive-test failures")
    g.add_argument("--p-c", type=float, help="crossover probability")
    g.add_argument("--p-m", type=float, help="per-gene mutation probability (default 1/n)")
    g.add_argument("--n-e", type=int, help="cap on the number of applied edits")
    g.add_argument("--sample-size", type=int, help="sample this many positive tests per evaluation")
    g.add_argument("--step-limit", type=int, help="interpreter steps per test")
    g.add_argument("--mode", choices=[m.value for m in IngredientMode], help="ingredient mode")
    g.add_argument("--no-rules", action="store_true", help="disable all search-space reduction rules")


def _resolve_inputs(args):
    """(name, program, suite) from --bug or --program/--suite."""
    if args.bug:
        from .seeder import load_bundle

        path = Path(args.bug)
        if not path.exists():
            from .corpus import BUGS
            path = BUGS / args.bug
        bundle = load_bundle(path)
        return bundle.name, bundle.program, bundle.suite
    if not (args.program and args.suite):
        raise ConfigError("give --bug, or both --program and --suite")
    program = parse_program(Path(args.program).read_text(encoding="utf-8"))
    return Path(args.program).stem, program, load_suite(args.suite)


# --------------------------------------------------------------------------
# repair


def _write_jsonl(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def cmd_repair(args) -> int:
    name, program, suite = _resolve_inputs(args)
    config = load_config(args.config)
    config = dataclasses.replace(config, **_flag_overrides(args))
    config = variant_config(config, args.variant, config.rng_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = prepare_problem(program, suite, config)
    (out / "ranking.tsv").write_text(format_ranking(problem.coverage, problem.ranking), encoding="utf-8")
    (out / "points.tsv").write_text(
        "index\tstatement\tsusp\tvariables\tfunctions\tingredients\toperations\n"
        + "".join(p.summary() + "\n" for p in problem.points), encoding="utf-8")
    result = run_variant(args.variant, problem, config)
    _write_jsonl(out / "generations.jsonl", result.generations)

    patches_dir = out / "patches"
    patches_dir.mkdir(exist_ok=True)
    for old in patches_dir.glob("patch-*"):
        old.unlink()
    patches = []
    for i, entry in enumerate(sorted(result.archive, key=lambda e: (e.size, e.found_at)), 1):
        stem = f"patch-{i:03d}"
        (patches_dir / f"{stem}.edits").write_text(format_edit_script(entry.edits), encoding="utf-8")
        diff = unified_diff(program, apply_edits(program, entry.edits), f"{name}.ml")
        (patches_dir / f"{stem}.diff").write_text(diff, encoding="utf-8")
        patches.append({"id": stem, "size": entry.size, "found_at": entry.found_at,
                        "edits": [e.to_line() for e in sorted(entry.edits, key=lambda e: e.target)]})
    report = {
        "bug": name,
        "variant": args.variant,
        "seed": config.rng_seed,
        "repaired": result.repaired,
        "evaluations": result.evaluations,
        "evaluations_to_first": result.evaluations_to_first,
        "problem": problem.describe(),
        "smallest_size": result.smallest()[0].size if result.archive else None,
        "patches": patches,
        "anomalies": result.anomalies,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    timing = {"wall_seconds": result.wall_time, "cpu_seconds": result.cpu_time,
              "preparation_seconds": problem.prep_seconds}
    (out / "timing.json").write_text(json.dumps(timing, indent=2) + "\n", encoding="utf-8")
    status = "repaired" if result.repaired else "not repaired"
    print(f"{name}: {status}; {len(patches)} patch(es), {result.evaluations} evaluations; report in {out}")
    return EXIT_REPAIRED if result.repaired else EXIT_NOT_REPAIRED


# --------------------------------------------------------------------------
# seed


def cmd_seed(args) -> int:
    from .corpus import BUGS, SEED_MODULES, SUITES, load_subject
    from .seeder import SeedSpec, seed_bug, write_bundle

    if args.subject:
        program, suite = load_subject(args.subject)
        suite_path = SUITES / f"{args.subject}.tests"
        module = args.module or SEED_MODULES.get(args.subject)
        subject = args.subject
    else:
        if not (args.program and args.suite):
            raise ConfigError("give --subject, or both --program and --suite")
        program = parse_program(Path(args.program).read_text(encoding="utf-8"))
        suite = load_suite(args.suite)
        suite_path = Path(args.suite).resolve()
        module = args.module
        subject = Path(args.program).stem
    spec = SeedSpec(k=args.k, require_redundant=args.bug_class == "F", require_rename=args.rename,
                    rng_seed=args.seed, module=module, max_attempts=args.attempts)
    bug = seed_bug(program, suite, spec)
    out = Path(args.out) if args.out else BUGS
    name = args.name or f"{subject}-{spec.label}{spec.k}-s{spec.rng_seed}"
    target = out / name
    target.mkdir(parents=True, exist_ok=True)
    suite_ref = os.path.relpath(suite_path, target)
    path = write_bundle(bug, out, name, subject, suite_ref, program)
    for m in bug.mutations:
        print(f"{m.target}: {m.description}")
    print(f"wrote {path} after {bug.attempt} attempt(s)")
    return 0


# --------------------------------------------------------------------------
# campaign and report


def _bundle_loader(name: str):
    from .corpus import BUGS
    from .seeder import load_bundle

    path = Path(name)
    bundle = load_bundle(path if path.exists() else BUGS / name)
    return bundle.program, bundle.suite


def cmd_campaign(args) -> int:
    from .corpus import bug_names

    bugs = bug_names() if args.bugs == "all" else [b for b in args.bugs.split(",") if b]
    variants = [v for v in args.variants.split(",") if v]
    for v in variants:
        if v not in VARIANTS:
            raise ConfigError(f"unknown variant {v!r}")
    base = dataclasses.replace(load_config(args.config), **_flag_overrides(args))
    spec = CampaignSpec(bugs, variants, args.trials, args.campaign_seed, base, args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trials_path = out / "trials.jsonl"
    with open(trials_path, "w", encoding="utf-8") as fh:
        def sink(rec):
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            fh.flush()
            log.info("%s %s #%d repaired=%s", rec["bug"], rec["variant"], rec["trial"], rec.get("repaired"))

        records = run_campaign(spec, _bundle_loader, sink)
    table = format_metrics(compute_metrics(records))
    (out / "metrics.tsv").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def cmd_report(args) -> int:
    table = format_metrics(compute_metrics(read_trials(args.trials)))
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minirepair", description="Search-based repair of MiniLang programs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    rp = sub.add_parser("repair", help="repair one buggy program")
    rp.add_argument("--bug", help="bug bundle directory (or the name of a corpus bug)")
    rp.add_argument("--program", help="MiniLang source file")
    rp.add_argument("--suite", help="test-suite file")
    rp.add_argument("--variant", default="arja", choices=sorted(VARIANTS))
    rp.add_argument("--seed", type=int, help="random seed")
    rp.add_argument("--out", default="repair-out", help="output directory")
    _add_search_flags(rp)
    rp.set_defaults(func=cmd_repair)

    sp = sub.add_parser("seed", help="generate a seeded bug bundle")
    sp.add_argument("--subject", help="corpus subject name")
    sp.add_argument("--program")
    sp.add_argument("--suite")
    sp.add_argument("--module", help="module to mutate")
    sp.add_argument("--k", type=int, default=1, help="number of mutated statements")
    sp.add_argument("--class", dest="bug_class", choices=["F", "H"], default="F")
    sp.add_argument("--rename", action="store_true", help="H-class: require a rename-only original")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--attempts", type=int, default=1000, help="retry budget")
    sp.add_argument("--name", help="bundle name")
    sp.add_argument("--out", help="parent directory for the bundle (default: the corpus)")
    sp.set_defaults(func=cmd_seed)

    cp = sub.add_parser("campaign", help="run trials over bugs and variants")
    cp.add_argument("--bugs", default="all", help="comma-separated bug names or 'all'")
    cp.add_argument("--variants", default="arja", help="comma-separated variants")
    cp.add_argument("--trials", type=int, default=30)
    cp.add_argument("--campaign-seed", type=int, default=0)
    cp.add_argument("--workers", type=int, default=1)
    cp.add_argument("--out", default="campaign-out")
    _add_search_flags(cp)
    cp.set_defaults(func=cmd_campaign)

    rep = sub.add_parser("report", help="recompute the metrics table from trials.jsonl")
    rep.add_argument("trials")
    rep.add_argument("--out", help="also write the table here")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError, MiniSyntaxError, StaticError, NoNegativeTest, EmptyCandidateSet,
            NoModificationPoints, ValueError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as err:
        from .seeder import ExhaustedAttempts

        if isinstance(err, ExhaustedAttempts):
            print(f"error: ExhaustedAttempts: {err}", file=sys.stderr)
            return EXIT_ERROR
        raise


if __name__ == "__main__":
    sys.exit(main())
