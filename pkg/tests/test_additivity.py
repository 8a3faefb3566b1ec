import csv
import io

import numpy as np
import pytest

from gausschan import additivity as ad
from gausschan import symplectic as sp
from gausschan.channels import classical_noise, lossy
from gausschan.eof import gaussian_eof
from gausschan.states import Bipartition
from oracles import noisy_tms

PAIR = Bipartition((0,), (1,))
PAIRS = ad.copy_bipartition(PAIR)
TOL = 2e-3


def _two_samples(seed):
    rng = np.random.default_rng(seed)
    return ad.sample_state(rng)[0], ad.sample_state(rng)[0]


def test_copy_bipartition():
    assert PAIRS == Bipartition((0, 2), (1, 3))
    assert ad.copy_bipartition(Bipartition((0, 1), (2,)), 2) == Bipartition((0, 1, 3, 4), (2, 5))


def test_beam_splitter_network_is_local_symplectic():
    S = ad.beam_splitter_network(2)
    assert sp.is_symplectic(S)
    assert np.allclose(S @ S.T, np.eye(8))
    qa = sp.quadrature_indices(PAIRS.modes_a, 4)
    qb = sp.quadrature_indices(PAIRS.modes_b, 4)
    assert np.allclose(S[np.ix_(qa, qb)], 0) and np.allclose(S[np.ix_(qb, qa)], 0)


def test_beam_splitter_mix_identity():
    g1, g2 = _two_samples(1)
    S = ad.beam_splitter_network(2)
    Gamma = ad.beam_splitter_mix(g1, g2)
    assert np.allclose(Gamma, S @ sp.direct_sum(g1, g2) @ S.T)
    assert np.allclose(ad.beam_splitter_mix(g1, g1), sp.direct_sum(g1, g1))
    with pytest.raises(ValueError):
        ad.beam_splitter_mix(g1, np.eye(2))


def test_theta_reflection_identities():
    rng = np.random.default_rng(4)
    Gamma = sp.random_covariance(4, rng)
    refl = ad.theta_reflection(Gamma)
    assert np.allclose(ad.theta_reflection(refl), Gamma)
    assert sp.is_valid_covariance(refl)
    blocks = sp.direct_sum(Gamma[:4, :4], Gamma[4:, 4:])
    assert np.allclose(0.5 * (Gamma + refl), blocks)
    # for a beam-splitter mix the diagonal blocks are both the mean
    g1, g2 = _two_samples(2)
    mix = ad.beam_splitter_mix(g1, g2)
    mean = 0.5 * (g1 + g2)
    assert np.allclose(0.5 * (mix + ad.theta_reflection(mix)), sp.direct_sum(mean, mean))


def test_theta_reflection_preserves_eof():
    g1, g2 = noisy_tms(3.0, 0.3), noisy_tms(2.0, 0.1)
    Gamma = ad.beam_splitter_mix(g1, g2)
    a = gaussian_eof(Gamma, PAIRS, restarts=4).value
    b = gaussian_eof(ad.theta_reflection(Gamma), PAIRS, restarts=4).value
    assert a == pytest.approx(b, abs=TOL)


def test_superadditivity_on_direct_sum_is_additivity():
    g1, g2 = noisy_tms(3.0, 0.5), noisy_tms(2.0, 0.2)
    rec = ad.superadditivity_residual(sp.direct_sum(g1, g2), PAIRS, [(0, 1), (2, 3)], restarts=4)
    assert rec.kind == "superadditivity"
    assert abs(rec.residual) <= TOL
    assert not rec.tolerance_flag
    assert rec.inputs["joint"] == pytest.approx(sum(rec.inputs["parts"]), abs=TOL)


def test_superadditivity_errors():
    with pytest.raises(ValueError):
        ad.superadditivity_residual(np.eye(8), PAIRS, [(0, 1), (2,)])
    with pytest.raises(ValueError):
        ad.superadditivity_residual(np.eye(8), PAIR, [(0, 1), (2, 3)])


def test_convexity_examples():
    g1, g2 = noisy_tms(3.0, 0.5), noisy_tms(2.0, 0.1)
    for lam in (0.0, 1.0):
        rec = ad.convexity_residual(g1, g2, lam, PAIR)
        assert rec.residual == 0.0
    assert abs(ad.convexity_residual(g1, g1, 0.3, PAIR, restarts=4).residual) <= TOL
    assert ad.convexity_residual(g1, g2, 0.5, PAIR, restarts=4).residual >= -TOL
    with pytest.raises(ValueError):
        ad.convexity_residual(g1, np.eye(2), 0.5, PAIR)
    with pytest.raises(ValueError):
        ad.convexity_residual(g1, g2, 1.5, PAIR)


def test_implication_chain_on_samples():
    # convexity on (Gamma, theta Gamma theta) and additivity on its blocks bound superadditivity
    for seed in (0, 1):
        g1, g2 = _two_samples(seed + 10)
        Gamma = ad.beam_splitter_mix(g1, g2)
        conv = ad.convexity_residual(Gamma, ad.theta_reflection(Gamma), 0.5, PAIRS, restarts=4)
        blocks = sp.direct_sum(Gamma[:4, :4], Gamma[4:, 4:])
        add = ad.superadditivity_residual(blocks, PAIRS, [(0, 1), (2, 3)], restarts=4)
        sup = ad.superadditivity_residual(Gamma, PAIRS, [(0, 1), (2, 3)], restarts=4)
        assert conv.residual >= -TOL and abs(add.residual) <= TOL
        assert sup.residual >= -TOL


def test_moe_additivity_scan():
    rec = ad.moe_additivity_scan(lossy(0.6), alpha=2, samples=10)
    assert abs(rec.residual) <= TOL
    rec = ad.moe_additivity_scan(classical_noise(1.0), alpha=2, samples=10)
    assert rec.inputs["single"] == pytest.approx(1.0, abs=1e-6)
    assert abs(rec.residual) <= TOL
    one = ad.moe_additivity_scan(lossy(0.6), alpha=2, copies=1, samples=4)
    assert one.residual == 0.0
    with pytest.raises(ValueError):
        ad.moe_additivity_scan(lossy(0.6), alpha=1.0)


def test_sample_family():
    rng = np.random.default_rng(0)
    for symmetric in (True, False):
        for _ in range(20):
            gamma, meta = ad.sample_state(rng, symmetric=symmetric)
            assert sp.is_valid_covariance(gamma)
            assert 0 <= meta["r"] <= 1.5 and 0 <= meta["noise"] <= 2


def test_scan_reproducible_and_ordered():
    rows1, recs = ad.run_scan("convexity", 3, seed=2, workers=1)
    rows2, _ = ad.run_scan("convexity", 3, seed=2, workers=3)
    assert ad.rows_to_csv(rows1) == ad.rows_to_csv(rows2)
    assert [r["sample"] for r in rows1] == [0, 1, 2]
    assert all(r.residual >= -TOL for r in recs)
    table = list(csv.DictReader(io.StringIO(ad.rows_to_csv(rows1))))
    assert tuple(table[0].keys()) == ad.SCAN_COLUMNS
    summary = ad.summarize(rows1)
    assert summary["min_residual"] == min(float(r["residual_bits"]) for r in table)
    assert summary["count"] == 3


def test_scan_errors():
    with pytest.raises(ValueError):
        ad.run_scan("nope", 1)
    with pytest.raises(ValueError):
        ad.run_scan("convexity", 0)
    with pytest.raises(ValueError):
        ad.run_scan("moe_additivity", 1)


def test_noise_floor_and_threshold():
    floor = ad.noise_floor(samples=2)
    assert 0 <= floor < 1e-4
    assert ad.calibrated_threshold(samples=2) >= 1e-6
