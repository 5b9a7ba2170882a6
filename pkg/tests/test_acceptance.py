"""Acceptance criteria at the documented tolerances (one line per criterion)."""
import pytest

from lyapunov_bvp.acceptance import CRITERIA

from conftest import ACCEPTANCE_LINES

_SECONDS = {}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    if number == 10:
        prior = sum(_SECONDS.values()) if len(_SECONDS) == 9 else None
        result = CRITERIA[10](prior_seconds=prior)
    else:
        result = CRITERIA[number]()
        _SECONDS[number] = result.seconds
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, result.summary
