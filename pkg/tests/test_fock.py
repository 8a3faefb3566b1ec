import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from gausschan import fock
from gausschan import states as st
from gausschan import symplectic as sp
from gausschan.channels import apply, lossy


def test_thermal_fock():
    rho = fock.thermal_fock(1.0, 120)
    diag = np.diag(rho.matrix).real
    assert np.allclose(diag[:10], 0.5 ** np.arange(1, 11))
    assert fock.fock_entropy(rho) == pytest.approx(2.0, abs=1e-7)
    assert fock.fock_entropy(fock.thermal_fock(0.5, 120)) == pytest.approx(1.37744, abs=1e-5)
    assert fock.fock_entropy(fock.thermal_fock(0.5, 120)) == pytest.approx(st.g_function(0.5), abs=1e-7)
    assert fock.fock_entropy(rho, 2.0) == pytest.approx(math.log2(3), abs=1e-7)
    assert rho.trace_deficit <= 1e-8


def test_truncation_budget_enforced():
    with pytest.raises(fock.TruncationError):
        fock.thermal_fock(5.0, 20)
    with pytest.raises(ValueError):
        fock.two_mode_squeezed_fock(0.3, fock.MAX_TWO_MODE_CUTOFF + 1)


def test_vacuum_and_coherent_moments():
    vac = fock.coherent_fock([0.0, 0.0], 10)
    assert fock.fock_entropy(vac) == pytest.approx(0.0, abs=1e-12)
    g, d = fock.fock_moments(vac)
    assert np.allclose(g, np.eye(2)) and np.allclose(d, 0)
    g, d = fock.fock_moments(fock.coherent_fock([1.5, -0.5], 60))
    assert np.allclose(g, np.eye(2), atol=1e-6)
    assert np.allclose(d, [1.5, -0.5], atol=1e-6)
    assert np.allclose(fock.fock_covariance(fock.thermal_fock(1, 120)), 3 * np.eye(2), atol=1e-6)


def test_tms_fock():
    r = 0.5
    rho = fock.two_mode_squeezed_fock(r, 40)
    assert fock.fock_entropy(rho) == pytest.approx(0.0, abs=1e-8)
    assert np.allclose(fock.fock_covariance(rho), st.two_mode_squeezed_state(r).gamma, atol=1e-6)
    half = fock.fock_partial_trace(rho, [0])
    ref = fock.thermal_fock(math.sinh(r) ** 2, 40)
    assert np.allclose(half.matrix, ref.matrix, atol=1e-10)


def test_gaussian_to_fock_dispatch():
    a = fock.gaussian_to_fock("squeezed_vacuum", 80, r=0.4)
    b = fock.squeezed_vacuum_fock(0.4, 80)
    assert np.allclose(a.matrix, b.matrix)
    with pytest.raises(ValueError):
        fock.gaussian_to_fock("cat", 10)


@settings(max_examples=15)
@given(seed=hst.integers(0, 2**31 - 1))
def test_general_gaussian_fock_matches_moments(seed):
    rng = np.random.default_rng(seed)
    gamma = sp.random_covariance(2, rng, max_squeezing=0.3, max_thermal=0.6)
    d = rng.uniform(-0.8, 0.8, 4)
    rho = fock.gaussian_state_fock(gamma, d, cutoff=30)
    g_out, d_out = fock.fock_moments(rho)
    assert np.allclose(g_out, gamma, atol=1e-6)
    assert np.allclose(d_out, d, atol=1e-6)
    assert fock.fock_entropy(rho) == pytest.approx(st.von_neumann_entropy(gamma), abs=1e-6)


def test_kraus_completeness():
    cutoff, eta = 30, 0.7
    ops = fock.lossy_kraus(eta, cutoff)
    total = sum(A.conj().T @ A for A in ops)
    assert np.allclose(total, np.eye(cutoff), atol=1e-12)


def test_lossy_fock_channel():
    rho = fock.coherent_fock([1.2, 0.4], 60)
    assert np.allclose(fock.apply_lossy_fock(rho, 1.0).matrix, rho.matrix)
    out = fock.apply_lossy_fock(rho, 0.36)
    coh = fock.coherent_fock([0.6 * 1.2, 0.6 * 0.4], 60)
    assert np.allclose(out.matrix, coh.matrix, atol=1e-10)
    thinned = fock.apply_lossy_fock(fock.thermal_fock(1.0, 120), 0.5)
    assert np.allclose(thinned.matrix, fock.thermal_fock(0.5, 120).matrix, atol=1e-8)
    sq = fock.squeezed_vacuum_fock(0.5, 120)
    assert np.allclose(fock.fock_covariance(fock.apply_lossy_fock(sq, 0.4)),
                       apply(lossy(0.4), st.squeezed_vacuum(0.5).gamma), atol=1e-6)
    with pytest.raises(ValueError):
        fock.apply_lossy_fock(rho, 1.5)


def test_same_covariance_non_gaussian():
    target = 2.0 * np.eye(2)
    rho = fock.same_covariance_non_gaussian(target, seed=3, cutoff=60)
    assert np.allclose(fock.fock_covariance(rho), target, atol=1e-5)
    assert fock.fock_entropy(rho) <= st.g_function(0.5) + 1e-6
    assert fock.fock_entropy(rho) < st.g_function(0.5) - 1e-4, "mixture is visibly non-Gaussian"
    same = fock.same_covariance_non_gaussian(target, seed=3, cutoff=60, fraction=0.0)
    assert same.meta.get("gaussian")
    assert fock.fock_entropy(same) == pytest.approx(st.g_function(0.5), abs=1e-7)
    with pytest.raises(ValueError):
        fock.same_covariance_non_gaussian(np.eye(2), seed=0, cutoff=20)


def test_same_covariance_two_modes():
    rng = np.random.default_rng(5)
    target = sp.random_covariance(2, rng, max_squeezing=0.3, max_thermal=0.8)
    rho = fock.same_covariance_non_gaussian(target, seed=1, cutoff=30)
    assert np.allclose(fock.fock_covariance(rho), target, atol=1e-5)
    assert fock.fock_entropy(rho) <= st.von_neumann_entropy(target) + 1e-6


def test_lossy_mutual_information_oracle_gaussian_case():
    rho = fock.thermal_fock(0.8, 80)
    from gausschan.capacities import mutual_information

    assert fock.lossy_mutual_information_fock(rho, 0.6) == pytest.approx(
        mutual_information(lossy(0.6), st.thermal_state(0.8)), abs=1e-6
    )
