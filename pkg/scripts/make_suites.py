"""Regenerate the corpus test suites from hand-picked inputs.

Expected values come from running the reference (correct) programs.
"""

from pathlib import Path

from minirepair.minilang import TestCase, execute_test, format_suite, parse_program

CORPUS = Path(__file__).resolve().parents[1] / "src" / "minirepair" / "corpus"

INPUTS = {
    "numeric": {
        "intops": {
            "sum_to": [(0,), (1,), (4,), (10,)],
            "sum_squares": [(0,), (3,), (5,)],
            "sum_cubes": [(2,), (4,), (1,)],
            "sum_range": [(3, 6), (5, 4), (-2, 2), (0, 0)],
            "factorial": [(0,), (3,), (5,), (1,)],
            "power": [(2, 10), (3, 0), (5, 3), (-2, 3)],
            "abs_val": [(-5,), (0,), (7,)],
            "max2": [(1, 2), (5, 3), (4, 4)],
            "min2": [(1, 2), (5, 3), (4, 4)],
            "max3": [(1, 2, 3), (3, 2, 1), (2, 9, 4), (5, 5, 1)],
            "min3": [(1, 2, 3), (3, 2, 1), (4, 0, 9), (5, 5, 7)],
            "clamp": [(5, 0, 10), (-3, 0, 10), (12, 0, 10), (0, 0, 10)],
            "sign": [(4,), (-9,), (0,)],
            "gcd": [(12, 18), (17, 5), (0, 6), (-8, 12)],
            "lcm": [(4, 6), (3, 5), (0, 9), (7, 7)],
            "digit_sum": [(0,), (123,), (-45,), (9999,)],
            "count_digits": [(0,), (9,), (10,), (-12345,)],
            "reverse_digits": [(123,), (1200,), (7,), (0,)],
            "is_palindrome": [(121,), (123,), (7,), (1221,)],
            "is_prime": [(1,), (2,), (9,), (13,), (25,), (29,)],
            "count_primes": [(1,), (10,), (20,)],
            "count_divisors": [(1,), (12,), (13,), (36,)],
            "sum_divisors": [(1,), (6,), (12,), (28,)],
            "is_perfect": [(6,), (28,), (12,), (1,)],
            "fib": [(0,), (1,), (2,), (7,), (12,)],
            "collatz_steps": [(1,), (6,), (7,), (16,)],
            "triangle": [(0,), (4,), (10,)],
            "sum_odd": [(1,), (6,), (9,)],
            "sum_even": [(1,), (6,), (9,)],
            "count_multiples": [(10, 3), (12, 4), (5, 7), (20, 5)],
            "alt_sum": [(1,), (4,), (7,)],
            "binom": [(5, 2), (6, 0), (6, 6), (4, 5), (10, 3)],
            "isqrt": [(0,), (15,), (16,), (99,)],
            "mod_pow": [(2, 10, 1000), (3, 4, 5), (7, 0, 13), (5, 3, 7)],
            "double_until": [(1, 10), (3, 3), (5, 100), (2, 17)],
            "grow": [(1, 10), (3, 20), (5, 5), (2, 100)],
            "halve_count": [(1,), (8,), (13,), (100,)],
            "shrink": [(100, 10), (7, 10), (64, 1), (50, 3)],
            "countdown_sum": [(5,), (6,), (0,), (1,)],
            "weighted_sum": [(3, 2), (4, 1), (0, 5), (5, 3)],
            "staircase": [(1,), (6,), (7,), (20,)],
            "bounded_product": [(4, 100), (5, 100), (3, 6), (6, 1000)],
            "first_multiple_above": [(3, 10), (5, 5), (7, 0), (4, 13)],
            "digital_root": [(0,), (38,), (999,), (-47,)],
            "tri_gap": [(1, 4), (4, 1), (3, 3), (-1, 2)],
            "median3": [(1, 2, 3), (9, 4, 6), (5, 5, 1), (-3, 8, 0)],
        },
        "report": {
            "describe_sign": [(4,), (-2,), (0,)],
            "describe_pair": [(1, -1), (0, 5), (-3, 0)],
            "parity_word": [(4,), (7,)],
            "prime_word": [(7,), (8,), (2,)],
            "classify": [(2,), (9,), (11,), (10,)],
            "gcd_chain": [(12, 18, 8), (7, 14, 21), (5, 3, 9)],
            "score": [(11,), (4,), (121,), (2,), (9,)],
        },
    },
    "finance": {
        "money": {
            "compound": [(100.0, 0.1, 2), (50.0, 0.0, 5), (200.0, 0.05, 0), (1000.0, 0.02, 3)],
            "simple_interest": [(100.0, 0.1, 2), (0.0, 0.5, 3), (250.0, 0.04, 5)],
            "deposit_plan": [(10.0, 0.0, 3), (100.0, 0.01, 2), (50.0, 0.1, 0), (20.0, 0.5, 3)],
            "months_to_target": [(0.0, 10.0, 35.0), (100.0, 5.0, 50.0), (10.0, 2.5, 20.0)],
            "loan_remaining": [(1000.0, 0.01, 100.0, 3), (100.0, 0.0, 60.0, 3), (500.0, 0.02, 50.0, 0),
                               (200.0, 0.1, 30.0, 2)],
            "fee": [(100.0,), (1000.0,), (0.0,), (150.0,)],
            "net_transfer": [(1000.0,), (50.0,), (300.0,)],
            "average_of_range": [(1, 4), (5, 4), (-2, 2), (3, 3)],
            "harmonic": [(1,), (2,), (4,), (0,)],
            "geometric_sum": [(2.0, 3), (0.5, 4), (1.0, 5), (3.0, 0)],
            "discount": [(100.0, 10.0), (50.0, 150.0), (80.0, 0.0), (20.0, 50.0)],
            "tax": [(100.0, 0.2), (-5.0, 0.2), (0.0, 0.3), (40.0, 0.5)],
            "tiered_tax": [(4000.0,), (7000.0,), (12000.0,), (10000.0,)],
            "depreciate": [(1000.0, 0.1, 2), (500.0, 0.5, 3), (80.0, 0.2, 0)],
            "split_bill": [(90.0, 3), (50.0, 0), (10.0, 4)],
            "savings_rate": [(1000.0, 250.0), (0.0, 10.0), (400.0, 400.0), (500.0, 600.0)],
            "larger": [(1.5, 2.5), (3.0, -1.0), (2.0, 2.0)],
            "smaller": [(1.5, 2.5), (3.0, -1.0), (2.0, 2.0)],
            "cap_amount": [(5.0, 10.0), (15.0, 10.0), (10.0, 10.0)],
            "interest_only": [(100.0, 0.1, 3), (50.0, 0.02, 0), (200.0, 0.05, 2)],
            "doubling_years": [(0.1,), (0.5,), (1.0,), (0.25,)],
            "halving_years": [(0.1,), (0.5,), (0.3,), (0.75,)],
            "is_affordable": [(100.0, 102.0), (100.0, 101.0), (500.0, 600.0)],
            "budget_left": [(100.0, 10.0, 20.0, 30.0), (50.0, 30.0, 30.0, 0.0), (60.0, 0.0, 0.0, 60.0),
                            (80.0, 5.0, 0.0, 1.0)],
            "scaled_total": [(3, 2.0), (0, 5.0), (4, 0.5)],
        },
    },
}


def build(subject: str) -> str:
    program = parse_program((CORPUS / "programs" / f"{subject}.ml").read_text())
    tests = []
    for module, functions in INPUTS[subject].items():
        for fn, calls in functions.items():
            for k, args in enumerate(calls, 1):
                probe = TestCase(f"{fn}_{k}", module, fn, args, None)
                out = execute_test(program, probe)
                if out.verdict.value == "runtime_error":
                    tests.append(TestCase(probe.name, module, fn, args, None, True))
                else:
                    tests.append(TestCase(probe.name, module, fn, args, out.value))
    return format_suite(tests)


if __name__ == "__main__":
    for subject in INPUTS:
        path = CORPUS / "suites" / f"{subject}.tests"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(build(subject))
        print(path)
