import statistics

import numpy as np
import pytest

from gausschan import fock, verify
from gausschan.states import von_neumann_entropy


@pytest.mark.parametrize("suite", ["entropy", "channels"])
def test_suites_pass(suite):
    results = verify.run_suite(suite, cutoff=120)
    assert results and all(r.passed for r in results), [r for r in results if not r.passed]


def test_extremality_suite_small():
    results = verify.extremality_suite(seeds=6)
    assert all(r.passed for r in results), results
    assert {r.name for r in results} >= {"entropy extremality", "conditional entropy extremality",
                                         "mutual information extremality"}


def test_extremality_samples_are_not_nearly_gaussian():
    gaps = []
    for k in range(8):
        rng = np.random.default_rng([0, k])
        target = verify._extremality_target(rng, 1)
        rho = fock.same_covariance_non_gaussian(target, int(rng.integers(2**31)), 60)
        gaps.append(fock.fock_entropy(rho) - von_neumann_entropy(target))
    assert max(gaps) <= 1e-6
    assert statistics.median(gaps) < -1e-4


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify.run_suite("nope", 10)
