import numpy as np
import pytest
import scipy.linalg as sla

from slicesim.config import ControlConfig
from slicesim.control import (GainCertificate, Infeasible,
                              SynthesisError, adjust_gain, block_margin,
                              delay_spectral_radius, lqr_gain,
                              razumikhin_feasible, simulate_delayed_loop,
                              synthesize_gain)


@pytest.fixture
def ccfg():
    return ControlConfig()


def random_stable_instance(rng):
    """Block-diagonal integrator-like plant with mild delayed coupling."""
    n_axes = int(rng.integers(1, 3))
    blocks, bblocks = [], []
    for _ in range(n_axes):
        step = rng.uniform(0.5, 1.5)
        damping = rng.uniform(0.0, 0.3)
        a1 = np.array([[1.0, step], [0.0, 1.0 - damping]])
        b1 = np.array([[step ** 2 / 2.0], [step]]) * rng.uniform(0.5, 2.0)
        blocks.append(a1)
        bblocks.append(b1)
    a = sla.block_diag(*blocks)
    b = sla.block_diag(*bblocks)
    ad = rng.uniform(0.02, 0.12) * np.eye(a.shape[0])
    return a, ad, b


def test_default_synthesis_certifies(ccfg):
    cert = synthesize_gain(ccfg)
    assert isinstance(cert, GainCertificate)
    assert cert.max_block_eigenvalue < 0
    assert cert.gamma == pytest.approx(1.0 + ccfg.decay_rate * ccfg.max_delay_steps)
    evals = np.linalg.eigvalsh(cert.lyap_matrix)
    assert evals[0] > 0  # P positive definite


def test_spec_example_alpha_005_tmax_3(ccfg):
    """The (T_max=3, alpha=0.05) fixture certifies on the default plant."""
    ccfg.decay_rate = 0.05
    cert = synthesize_gain(ccfg, max_delay_steps=3)
    assert cert.max_block_eigenvalue < 0


def test_no_delayed_coupling_lqr_feasible(ccfg):
    ccfg.delayed_coupling = 0.0
    gain = lqr_gain(ccfg.plant_a(), ccfg.plant_b(), 0.3, 1.0)
    res = razumikhin_feasible(gain, ccfg)
    assert isinstance(res, GainCertificate)


def test_zero_gain_unstable_plant_infeasible(ccfg):
    res = razumikhin_feasible(np.zeros((2, 4)), ccfg)
    assert isinstance(res, Infeasible)
    assert "Schur" in res.reason


def test_certified_gain_simulates_bounded(ccfg):
    cert = synthesize_gain(ccfg)
    a, ad, b = ccfg.plant_a(), ccfg.plant_ad(), ccfg.plant_b()
    for delay in range(ccfg.max_delay_steps + 1):
        sup = simulate_delayed_loop(cert.gain, a, ad, b, delay, 10 ** 4)
        assert sup < 1e3


def test_synthesis_failure_on_strong_coupling_weak_input(ccfg):
    ccfg.delayed_coupling = 1.0
    a = ccfg.plant_a()
    ad = ccfg.plant_ad()
    b = ccfg.plant_b() * 1e-6
    with pytest.raises(SynthesisError):
        synthesize_gain(ccfg, plant=(a, ad, b))


def test_delay_free_bound_always_succeeds(ccfg):
    cert = synthesize_gain(ccfg, max_delay_steps=0)
    assert cert.max_block_eigenvalue < 0
    assert cert.max_delay_steps == 0


def test_margin_monotone_in_delay_bound(ccfg):
    rng = np.random.default_rng(21)
    a, ad, b = ccfg.plant_a(), ccfg.plant_ad(), ccfg.plant_b()
    for _ in range(10):
        gain = lqr_gain(a, b, float(rng.uniform(0.3, 3.0)), 1.0)
        margins = [block_margin(gain, a, ad, b, ccfg.decay_rate, t)[0]
                   for t in range(8)]
        diffs = np.diff(margins)
        assert np.all(diffs >= -1e-9)


def test_adjust_noop_when_nominal_feasible(ccfg):
    """At one step past a loose bound the nominal gain often still certifies."""
    ccfg.decay_rate = 0.02  # shallow premise, nominal stays feasible longer
    cert = synthesize_gain(ccfg)
    adj = adjust_gain(cert, cert.max_delay_steps + 1, ccfg)
    assert adj.distance == pytest.approx(0.0)
    assert np.allclose(adj.adjusted, cert.gain)


def test_adjust_requires_violating_delay(ccfg):
    cert = synthesize_gain(ccfg)
    with pytest.raises(ValueError):
        adjust_gain(cert, cert.max_delay_steps, ccfg)


def test_adjust_at_twice_bound_produces_certified_gain(ccfg):
    cert = synthesize_gain(ccfg)
    double = 2 * ccfg.max_delay_steps
    adj = adjust_gain(cert, double, ccfg)
    assert adj.distance > 0
    assert adj.certificate.max_block_eigenvalue < 0
    assert adj.certificate.max_delay_steps == double
    # distance zero iff nominal feasible at the observed delay
    res = razumikhin_feasible(cert.gain, ccfg, max_delay_steps=double)
    assert isinstance(res, Infeasible)


def tracking_error(gain, ccfg, delay, seed, steps=160, switch=40):
    rng = np.random.default_rng(seed)
    a, ad, b = ccfg.plant_a(), ccfg.plant_ad(), ccfg.plant_b()
    hist = [np.zeros(4)] * (delay + 1)
    sp = np.zeros(2)
    errs = []
    for k in range(steps):
        if k % switch == 0:
            sp = rng.uniform(-5, 5, size=2)
        ref = np.array([sp[0], 0.0, sp[1], 0.0])
        x, xd = hist[-1], hist[0]
        xn = a @ x + ad @ xd - b @ (gain @ (x - ref))
        hist = hist[1:] + [xn]
        errs.append(float(np.linalg.norm(xn[[0, 2]] - sp)))
    return float(np.mean(errs))


def test_adjusted_gain_tracks_better_at_violation_delay(ccfg):
    """Sustained delay at twice the bound: adjusted gain beats nominal."""
    cert = synthesize_gain(ccfg)
    double = 2 * ccfg.max_delay_steps
    adj = adjust_gain(cert, double, ccfg)
    wins = sum(
        tracking_error(adj.adjusted, ccfg, double, seed)
        < tracking_error(cert.gain, ccfg, double, seed)
        for seed in range(20))
    assert wins >= 16


def test_grid_oracle_no_feasible_closer_gain(ccfg):
    cert = synthesize_gain(ccfg)
    double = 2 * ccfg.max_delay_steps
    adj = adjust_gain(cert, double, ccfg)
    k_nom, k_hat = cert.gain, adj.adjusted
    rng = np.random.default_rng(5)
    d1 = k_hat - k_nom
    d1 = d1 / np.linalg.norm(d1)
    d2 = rng.normal(size=k_nom.shape)
    d2 -= np.sum(d2 * d1) * d1
    d2 /= np.linalg.norm(d2)
    h = 0.1 * np.linalg.norm(k_hat - k_nom)
    base = np.sum((k_hat - k_nom) ** 2)
    for i in range(-2, 3):
        for j in range(-2, 3):
            cand = k_hat + i * h * d1 + j * h * d2
            dist = np.sum((cand - k_nom) ** 2)
            if dist >= base - 1e-12:
                continue
            res = razumikhin_feasible(cand, ccfg, max_delay_steps=double)
            assert isinstance(res, Infeasible), (
                f"grid point at distance {dist:.5f} < {base:.5f} is feasible")


def test_random_instances_certified_and_bounded(ccfg):
    rng = np.random.default_rng(42)
    successes = 0
    for _ in range(50):
        a, ad, b = random_stable_instance(rng)
        try:
            cert = synthesize_gain(ccfg, plant=(a, ad, b))
        except SynthesisError:
            continue
        successes += 1
        for delay in range(ccfg.max_delay_steps + 1):
            sup = simulate_delayed_loop(cert.gain, a, ad, b, delay, 3000)
            assert sup < 1e3
    assert successes >= 45


def test_spectral_radius_companion_matches_direct(ccfg):
    cert = synthesize_gain(ccfg)
    a, ad, b = ccfg.plant_a(), ccfg.plant_ad(), ccfg.plant_b()
    rho0 = delay_spectral_radius(cert.gain, a, ad, b, 0)
    direct = np.max(np.abs(np.linalg.eigvals(a - b @ cert.gain + ad)))
    assert rho0 == pytest.approx(float(direct), rel=1e-12)


def test_certificate_serializes(ccfg):
    cert = synthesize_gain(ccfg)
    d = cert.to_dict()
    assert d["max_block_eigenvalue"] < 0
    assert np.allclose(np.array(d["gain"]), cert.gain)
