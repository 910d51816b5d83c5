"""Shared fixtures: the reference parameter points and the expensive
minimal-solution branch reused across extension, energy and acceptance
tests.

Reference points: (3, 1/2, 3) where the instability condition holds
(the singular solution is unstable) and (11, 1/2, 4) where it fails
(the singular solution is stable and the minimal branch is the
interesting object).
"""

import numpy as np
import pytest

from fracstable import AxisymGrid, Params, extended_singular, minimal_branch

PARAMS_UNSTABLE = Params(3, 0.5, 3.0)
PARAMS_STABLE = Params(11, 0.5, 4.0)


@pytest.fixture(scope="session")
def params_unstable():
    return PARAMS_UNSTABLE


@pytest.fixture(scope="session")
def params_stable():
    return PARAMS_STABLE


@pytest.fixture(scope="session")
def bar_us_stable():
    return extended_singular(PARAMS_STABLE)


@pytest.fixture(scope="session")
def branch128(bar_us_stable):
    """Minimal-solution branch at the condition-failing point on the
    128 x 128 graded grid, for lambda in {0.3, 0.5, 0.7, 0.9}."""
    grid = AxisymGrid.graded(PARAMS_STABLE.n, PARAMS_STABLE.s, 128, 128)
    return minimal_branch(PARAMS_STABLE, [0.3, 0.5, 0.7, 0.9], grid,
                          bar_us=bar_us_stable)


@pytest.fixture(scope="session")
def branch_small(bar_us_stable):
    """Cheap 48 x 48 branch for invariant tests that do not need the
    acceptance-scale grid."""
    grid = AxisymGrid.graded(PARAMS_STABLE.n, PARAMS_STABLE.s, 48, 48)
    return minimal_branch(PARAMS_STABLE, [0.1, 0.2, 0.5], grid,
                          bar_us=bar_us_stable)
