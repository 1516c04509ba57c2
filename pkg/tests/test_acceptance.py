"""One line per acceptance criterion; run with ``pytest -s`` to see them."""

import pytest

from kkmfix.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion):
    result = criterion()
    status = "PASS" if result.passed else "FAIL"
    print(f"\ncriterion {result.number} {result.name}: {status} {result.detail}")
    assert result.passed, result.detail
