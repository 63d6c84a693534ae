"""Acceptance criteria at full size; each prints one PASS/FAIL line.

Also runnable directly: ``python tests/test_acceptance.py [--quick]``.
"""
import sys

import pytest

from renyi_evt import acceptance as acc

CRITERIA = [
    acc.criterion_1,
    acc.criterion_2,
    acc.criterion_3,
    acc.criterion_4,
    acc.criterion_5,
    acc.criterion_6,
    acc.criterion_7,
    acc.criterion_8,
    acc.criterion_9,
    acc.criterion_10,
    acc.criterion_11,
]


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_runtime_limits():
    # exactness grid under a minute, brute force under two
    assert acc.criterion_1().seconds < 60
    assert acc.criterion_2().seconds < 120


if __name__ == "__main__":
    results = acc.run_all(quick="--quick" in sys.argv)
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
