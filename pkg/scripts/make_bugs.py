"""Regenerate the checked-in seeded bugs.

The plan below was fixed before any bug was drawn: seeds count up from 0,
subjects alternate, and the first admissible bug for each (subject, seed)
is kept whatever the repair tools later make of it.
"""

import os
import sys
import time

from minirepair.corpus import BUGS, SEED_MODULES, SUITES, load_subject
from minirepair.seeder import ExhaustedAttempts, SeedSpec, seed_bug, write_bundle

# (subject, k, class, rename, seed)
PLAN = [
    ("numeric", 1, "F", False, 0),
    ("finance", 1, "F", False, 1),
    ("numeric", 1, "F", False, 2),
    ("numeric", 2, "F", False, 3),
    ("finance", 2, "F", False, 4),
    ("numeric", 2, "F", False, 5),
    ("finance", 3, "F", False, 6),
    ("numeric", 3, "F", False, 7),
    ("numeric", 2, "H", True, 8),
    ("finance", 2, "H", True, 9),
    ("numeric", 2, "H", True, 10),
]


def main(only=None):
    for subject, k, label, rename, seed in PLAN:
        name = f"{subject}-{label}{k}-s{seed}"
        if only and name not in only:
            continue
        program, suite = load_subject(subject)
        spec = SeedSpec(k=k, require_redundant=label == "F", require_rename=rename, rng_seed=seed,
                        module=SEED_MODULES[subject])
        start = time.perf_counter()
        try:
            bug = seed_bug(program, suite, spec)
        except ExhaustedAttempts as err:
            print(f"{name}: {err}")
            continue
        suite_ref = os.path.relpath(SUITES / f"{subject}.tests", BUGS / name)
        write_bundle(bug, BUGS, name, subject, suite_ref, program)
        muts = "; ".join(f"{m.target} {m.description}" for m in bug.mutations)
        print(f"{name}: attempt {bug.attempt}, {time.perf_counter() - start:.1f}s, {muts}")


if __name__ == "__main__":
    main(set(sys.argv[1:]))
