"""Acceptance suite: the eight end-to-end criteria at their stated tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the pytest terminal summary.
"""

import pytest

from dressedspin import scenarios

ACCEPTANCE_LINES: list[str] = []


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, 9))
def test_criterion(number):
    crit = getattr(scenarios, f"criterion_{number}")()
    ACCEPTANCE_LINES.append(crit.line)
    print(crit.line)
    assert crit.passed, crit.line
