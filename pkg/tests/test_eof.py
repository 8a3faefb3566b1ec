import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy.optimize import approx_fprime

from gausschan import eof
from gausschan import states as st
from gausschan import symplectic as sp
from gausschan.channels import amplifier, classical_noise, identity_channel, lossy
from oracles import noisy_tms, symmetric_eof_closed_form, symmetric_eof_grid

PAIR = st.Bipartition((0,), (1,))
# brute-force grid search of tests/oracles.py on TMS(cosh 2r = 3) + 0.5 I
GRID_ORACLE_NOISY_TMS = 0.245322874093
TMS3 = noisy_tms(3.0, 0.0)


def test_param_count():
    assert [eof.param_count(n) for n in (1, 2, 4)] == [2, 6, 20]


@settings(max_examples=25)
@given(seed=hst.integers(0, 2**31 - 1), n=hst.integers(1, 3))
def test_pure_covariance_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    theta = rng.normal(scale=0.6, size=eof.param_count(n))
    G = eof.pure_covariance(theta, n)
    assert sp.is_pure(G, 1e-8)
    assert np.allclose(eof.pure_parameters(G), theta, atol=1e-8)
    S = sp.random_symplectic(n, rng, 0.5)
    assert np.allclose(eof.pure_covariance(eof.pure_parameters(S @ S.T), n), S @ S.T, atol=1e-8)


def test_entanglement_entropy():
    assert eof.entanglement_entropy(np.eye(4), PAIR) == pytest.approx(0.0, abs=1e-12)
    assert eof.entanglement_entropy(TMS3, PAIR) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        eof.entanglement_entropy(noisy_tms(3.0, 0.1), PAIR)


@given(seed=hst.integers(0, 2**31 - 1))
def test_entanglement_entropy_schmidt_symmetry(seed):
    rng = np.random.default_rng(seed)
    S = sp.random_symplectic(3, rng, 0.8)
    p = st.Bipartition((0, 2), (1,))
    assert eof.entanglement_entropy(S @ S.T, p) == pytest.approx(eof.entanglement_entropy(S @ S.T, p.swapped()), abs=1e-9)


def test_analytic_gradients():
    gamma = noisy_tms(3.0, 0.5)
    prob = eof._Problem(gamma, PAIR)
    theta = eof.pure_parameters(sp.williamson(gamma).S @ sp.williamson(gamma).S.T) * 0.7
    for f in (prob.barrier(1e-2), prob.penalty(1e3)):
        value_only = lambda x, f=f: f(x)[0]
        num = approx_fprime(theta, value_only, 1e-7)
        assert np.allclose(f(theta)[1], num, atol=1e-4 * max(1.0, np.abs(num).max()))


def test_pure_input():
    res = eof.gaussian_eof(TMS3, PAIR)
    assert res.value == pytest.approx(2.0, abs=1e-3)
    assert res.restarts_used == 0
    assert np.allclose(res.gamma_opt, TMS3)


def test_product_states_have_zero_eof():
    assert eof.gaussian_eof(np.eye(4), PAIR).value == pytest.approx(0.0, abs=1e-9)
    rng = np.random.default_rng(2)
    prod = sp.direct_sum(sp.random_covariance(1, rng), sp.random_covariance(1, rng))
    assert eof.gaussian_eof(prod, PAIR, restarts=4).value == pytest.approx(0.0, abs=1e-6)


def test_pinned_grid_oracle_value():
    gamma = noisy_tms(3.0, 0.5)
    value = symmetric_eof_grid(gamma)
    assert value == pytest.approx(GRID_ORACLE_NOISY_TMS, abs=1e-11)
    a, c = gamma[0, 0], gamma[0, 2]
    assert value == pytest.approx(symmetric_eof_closed_form(a, c, c), abs=1e-6)


def test_noisy_tms_matches_grid_oracle():
    res = eof.gaussian_eof(noisy_tms(3.0, 0.5), PAIR)
    assert abs(res.value - GRID_ORACLE_NOISY_TMS) <= 1e-3
    assert res.feasibility_gap >= -eof.FEASIBILITY_TOL
    assert sp.is_pure(res.gamma_opt, 1e-7)


@pytest.mark.parametrize("cosh2r,noise", [(3.0, 0.5), (2.0, 0.1), (5.0, 1.0), (1.5, 0.05)])
def test_symmetric_states_match_closed_form(cosh2r, noise):
    gamma = noisy_tms(cosh2r, noise)
    a, c = gamma[0, 0], gamma[0, 2]
    expected = symmetric_eof_closed_form(a, c, c)
    assert eof.gaussian_eof(gamma, PAIR, restarts=4).value == pytest.approx(expected, abs=1e-5)


def test_separable_noisy_state():
    assert eof.gaussian_eof(noisy_tms(3.0, 2.0), PAIR, restarts=4).value == pytest.approx(0.0, abs=1e-6)


def test_simplex_method_agrees():
    gamma = noisy_tms(3.0, 0.5)
    res = eof.gaussian_eof(gamma, PAIR, restarts=4, method="simplex")
    assert res.method == "simplex"
    assert abs(res.value - GRID_ORACLE_NOISY_TMS) <= 1e-3


def test_local_symplectic_invariance():
    rng = np.random.default_rng(9)
    gamma = noisy_tms(2.5, 0.3)
    base = eof.gaussian_eof(gamma, PAIR, restarts=4).value
    for _ in range(3):
        L = sp.direct_sum(sp.random_symplectic(1, rng, 0.6), sp.random_symplectic(1, rng, 0.6))
        assert eof.gaussian_eof(L @ gamma @ L.T, PAIR, restarts=4).value == pytest.approx(base, abs=1e-3)


def test_partition_sides_agree():
    gamma = noisy_tms(2.5, 0.3)
    a = eof.gaussian_eof(gamma, PAIR, restarts=4).value
    b = eof.gaussian_eof(gamma, PAIR.swapped(), restarts=4).value
    assert a == pytest.approx(b, abs=1e-9)


def test_deterministic_for_seed():
    gamma = noisy_tms(2.0, 0.4)
    r1 = eof.gaussian_eof(gamma, PAIR, restarts=3, seed=5)
    r2 = eof.gaussian_eof(gamma, PAIR, restarts=3, seed=5, workers=3)
    assert r1.value == r2.value
    assert np.array_equal(r1.gamma_opt, r2.gamma_opt)
    doc = r1.to_dict()
    assert set(doc) == {"value_bits", "gamma_opt", "feasibility_gap", "restarts_used"}


def test_input_errors():
    with pytest.raises(ValueError):
        eof.gaussian_eof(0.5 * np.eye(4), PAIR)
    with pytest.raises(ValueError):
        eof.gaussian_eof(np.eye(6), PAIR)
    with pytest.raises(ValueError):
        eof.gaussian_eof(np.eye(4), PAIR, restarts=0)
    with pytest.raises(ValueError):
        eof.gaussian_eof(np.eye(4), PAIR, method="newton")


def test_msw_capacity():
    therm = st.thermal_state(1.0).gamma
    assert eof.msw_capacity(identity_channel(), therm, restarts=2) == pytest.approx(2.0, abs=1e-6)
    val = eof.msw_capacity(lossy(0.9), therm, restarts=4)
    assert val <= st.g_function(0.9) + 1e-6
    assert val == pytest.approx(st.g_function(0.9), abs=1e-4)  # coherent-state coding is optimal
    assert eof.msw_capacity(lossy(0.0), therm, restarts=2) == pytest.approx(0.0, abs=1e-6)


def test_min_output_entropy_direct():
    assert eof.gaussian_min_output_entropy(lossy(0.6)).value == pytest.approx(0.0, abs=1e-6)
    assert eof.gaussian_min_output_entropy(classical_noise(1.0)).value == pytest.approx(1.37744, abs=1e-5)
    amp = eof.gaussian_min_output_entropy(amplifier(2.0))
    assert amp.value == pytest.approx(2.0, abs=1e-6)
    assert np.allclose(amp.gamma_in, np.eye(2), atol=1e-3)
    assert eof.gaussian_min_output_entropy(classical_noise(1.0), alpha=2).value == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("T", [lossy(0.6), classical_noise(1.0)], ids=["lossy", "classical"])
def test_min_output_entropy_routes_agree(T):
    direct = eof.gaussian_min_output_entropy(T, route="direct").value
    via_eof = eof.gaussian_min_output_entropy(T, route="eof", restarts=1)
    assert via_eof.route == "eof"
    assert via_eof.value == pytest.approx(direct, abs=2e-3)


def test_min_output_entropy_errors():
    with pytest.raises(ValueError):
        eof.gaussian_min_output_entropy(lossy(0.5), alpha=0.5)
    with pytest.raises(ValueError):
        eof.gaussian_min_output_entropy(lossy(0.5), alpha=2, route="eof")
