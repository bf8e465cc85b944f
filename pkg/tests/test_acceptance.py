"""Every acceptance criterion at its stated tolerance, one printed line each.

The checks live in polyent.verify so ``polyent verify all`` reports the same
numbers. Criterion 4 is expected to fail at this scale; see the README.
"""
import pytest

from polyent.verify import Session, suite_checks

TITLES = {
    1: "base entropy of the square and north-south maps",
    2: "F_2 and SF_2 slopes near 2",
    3: "F_3 slope near 3",
    4: "SF_3^2 slope matches F_3",
    5: "distinct tuples match twice the base",
    6: "identity and rotation controls stay flat",
    7: "power, product, conjugacy and factor inequalities",
    8: "wandering-point lower bound for SF_2",
    9: "exact structural suites",
    10: "coding censuses",
    11: "fixed points of SF_2 on the sample grid",
}


@pytest.fixture(scope="module")
def session():
    return Session()


def _checks(criterion):
    checks = [c for c in suite_checks("all") if c.criterion == criterion]
    # the session-wide sandwich check must see every experiment, so it runs last
    return sorted(checks, key=lambda c: c.__name__ == "check_sandwich_session")


@pytest.mark.parametrize("criterion", sorted(TITLES))
def test_criterion(criterion, session, capsys):
    results = [check(session) for check in _checks(criterion)]
    passed = all(r.passed for r in results)
    with capsys.disabled():
        print(f"\ncriterion {criterion:>2} {'PASS' if passed else 'FAIL'}: {TITLES[criterion]}")
        for r in results:
            print(f"    {r.line()}")
    failed = [r.line() for r in results if not r.passed]
    assert not failed, "\n".join(failed)
