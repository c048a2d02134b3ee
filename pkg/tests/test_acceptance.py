"""The nine acceptance criteria, one suite each, at their stated tolerances."""

import pytest

from fracdiff.validation import run_suite

CRITERIA = [
    (1, "gaussian_limit"),
    (2, "levy_cauchy"),
    (3, "three_route"),
    (4, "mittag_leffler"),
    (5, "laplace_pair"),
    (6, "moments"),
    (7, "l1_convergence"),
    (8, "invariants"),
    (9, "tail_exponent"),
]


@pytest.mark.parametrize("number, suite", CRITERIA, ids=[s for _, s in CRITERIA])
def test_criterion(number, suite, capsys):
    res = run_suite(suite)
    with capsys.disabled():
        print(f"\n[criterion {number}] {res.summary()}")
        for note in res.notes:
            print(f"    {note}")
    failed = [f"{label}: {meas:.3e} > {lim:.1e}" for label, meas, lim, ok in res.checks if not ok]
    assert res.passed, "; ".join(failed)
