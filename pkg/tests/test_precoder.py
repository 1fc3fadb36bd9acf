"""Precoder construction, normalisation, and the two gain evaluators."""

from __future__ import annotations

import math

import numpy as np
import pytest

from thztrack import (
    AngularInterval,
    ArrayConfig,
    adaptive_precoder,
    array_response,
    beta_coeff,
    bf_gain_closed_form,
    bf_gain_direct,
    bf_gain_profile,
    g_coeff,
    mrt_precoder,
    sample_fn,
)
from conftest import CARRIER_HZ

CFG128 = ArrayConfig(128, CARRIER_HZ)


def random_interval(rng, max_delta=0.3):
    delta = rng.uniform(0.0, max_delta)
    theta = rng.uniform(-(1.0 - delta) * 0.99, (1.0 - delta) * 0.99)
    return AngularInterval(theta, delta)


def test_sample_fn_values():
    assert sample_fn(0.0) == 1.0
    assert sample_fn(math.pi) == pytest.approx(0.0, abs=1e-15)
    assert sample_fn(math.pi / 2.0) == pytest.approx(2.0 / math.pi, rel=1e-12)
    x = np.linspace(-10, 10, 101)
    assert np.allclose(sample_fn(x), sample_fn(-x))


def test_g_coeff_values():
    assert g_coeff(5, 1.23, 0.0) == 1.0
    assert g_coeff(3, 2.0 * math.pi, 0.7) == 1.0  # omega on the antenna grid point
    assert g_coeff(1, math.pi, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_beta_flat_taper():
    for n in (2, 16, 128):
        assert beta_coeff(3.0, 0.0, n) == pytest.approx(1.0 / math.sqrt(n), rel=1e-12)


def test_beta_two_antennas_null_second_term():
    assert beta_coeff(0.0, 1.0, 2) == pytest.approx(1.0, rel=1e-12)


def test_beta_against_direct_summation():
    # brute-force oracle with scalar math
    n_t, omega, delta = 128, 63.5 * math.pi, 0.05
    total = 0.0
    for n in range(1, n_t + 1):
        x = delta * (omega - (n - 1) * math.pi)
        total += (math.sin(x) / x) ** 2 if x != 0.0 else 1.0
    assert beta_coeff(omega, delta, n_t) == pytest.approx(1.0 / math.sqrt(total), rel=1e-12)


def test_adaptive_collapses_to_mrt_at_zero_width():
    for s in (-0.4, 0.0, 0.25):
        adaptive = adaptive_precoder(AngularInterval(s, 0.0), 17.3, CFG128)
        mrt = mrt_precoder(s, CFG128)
        assert np.allclose(adaptive.weights, mrt.weights, atol=1e-12)


def test_adaptive_converges_to_mrt_as_width_vanishes():
    adaptive = adaptive_precoder(AngularInterval(0.1, 1e-9), 40.0, CFG128)
    mrt = mrt_precoder(0.1, CFG128)
    assert np.allclose(adaptive.weights, mrt.weights, atol=1e-7)


def test_adaptive_zero_centre_is_real():
    p = adaptive_precoder(AngularInterval(0.0, 0.05), 30.0, CFG128)
    assert np.allclose(p.weights.imag, 0.0, atol=1e-12)


def test_adaptive_unit_power_fuzz():
    rng = np.random.default_rng(31)
    for _ in range(500):
        n = int(rng.integers(2, 129))
        cfg = ArrayConfig(n, CARRIER_HZ)
        interval = random_interval(rng)
        omega = rng.uniform(0.0, (n - 1) * math.pi)
        p = adaptive_precoder(interval, omega, cfg)
        assert abs(np.sum(np.abs(p.weights) ** 2) - 1.0) < 1e-9


def test_adaptive_main_lobe_covers_interval():
    interval = AngularInterval(0.15, 0.0253)
    p = adaptive_precoder(interval, 30.0, CFG128)
    edges = np.array([interval.lo, interval.hi])
    in_beam = bf_gain_profile(edges, p, CFG128)
    out_beam = bf_gain_profile(np.array([interval.lo - 0.05, interval.hi + 0.05]), p, CFG128)
    assert np.all(in_beam > 4.0 * out_beam)


def test_mrt_uniform_and_peak_gain():
    mrt = mrt_precoder(0.0, CFG128)
    assert np.allclose(mrt.weights, np.full(128, 1.0 / math.sqrt(128.0)), atol=1e-12)
    assert bf_gain_direct(0.0, mrt, CFG128) == pytest.approx(128.0, rel=1e-12)


def test_mrt_first_null():
    mrt = mrt_precoder(0.2, CFG128)
    assert bf_gain_direct(0.2 + 2.0 / 128.0, mrt, CFG128) == pytest.approx(0.0, abs=1e-9)


def test_gain_direct_range_and_orthogonal_nulls():
    mrt = mrt_precoder(0.0, CFG128)
    for k in (1, 2, 5, 20):
        assert bf_gain_direct(2.0 * k / 128.0, mrt, CFG128) == pytest.approx(0.0, abs=1e-9)
    rng = np.random.default_rng(2)
    for _ in range(200):
        g = bf_gain_direct(rng.uniform(-1, 1), mrt, CFG128)
        assert -1e-9 <= g <= 128.0 + 1e-9


def test_gain_direct_rejects_length_mismatch():
    mrt = mrt_precoder(0.0, ArrayConfig(16, CARRIER_HZ))
    with pytest.raises(ValueError):
        bf_gain_direct(0.0, mrt, CFG128)


def test_closed_form_coherent_peak():
    interval = AngularInterval(0.1, 0.0)
    assert bf_gain_closed_form(0.1, interval, 5.0, CFG128) == pytest.approx(128.0, rel=1e-12)


def test_closed_form_two_antennas_hand_expansion():
    # |f1 + f2 e^{j pi s}|^2 expanded symbolically for N = 2
    cfg = ArrayConfig(2, CARRIER_HZ)
    rng = np.random.default_rng(7)
    for _ in range(100):
        interval = random_interval(rng, max_delta=0.4)
        omega = rng.uniform(0.0, math.pi)
        s = rng.uniform(-1.0, 1.0)
        p = adaptive_precoder(interval, omega, cfg)
        f1, f2 = p.weights
        expected = abs(f1 + f2 * np.exp(1j * math.pi * s)) ** 2
        got = bf_gain_closed_form(s, interval, omega, cfg)
        assert got == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_closed_form_matches_direct_fuzz():
    rng = np.random.default_rng(19)
    for _ in range(300):
        n = int(rng.choice([2, 4, 8, 16, 64, 128]))
        cfg = ArrayConfig(n, CARRIER_HZ)
        interval = random_interval(rng)
        omega = rng.uniform(0.0, (n - 1) * math.pi)
        s = rng.uniform(-1.0, 1.0)
        direct = bf_gain_direct(s, adaptive_precoder(interval, omega, cfg), cfg)
        closed = bf_gain_closed_form(s, interval, omega, cfg)
        assert abs(direct - closed) <= 1e-8 * (1.0 + direct)


def test_gain_symmetry_about_half_domain():
    rng = np.random.default_rng(41)
    for n in (2, 4, 8, 128):
        cfg = ArrayConfig(n, CARRIER_HZ)
        axis = (n - 1) * math.pi / 2.0
        for _ in range(30):
            interval = random_interval(rng, max_delta=0.2)
            omega = rng.uniform(0.0, 2.0 * axis)
            s = rng.uniform(-1.0, 1.0)
            g1 = bf_gain_closed_form(s, interval, omega, cfg)
            g2 = bf_gain_closed_form(s, interval, 2.0 * axis - omega, cfg)
            assert abs(g1 - g2) <= 1e-8 * (1.0 + abs(g1))


def test_gain_profile_matches_pointwise():
    rng = np.random.default_rng(51)
    interval = random_interval(rng, max_delta=0.1)
    p = adaptive_precoder(interval, 22.0, CFG128)
    dirs = rng.uniform(-1, 1, 32)
    profile = bf_gain_profile(dirs, p, CFG128)
    for s, g in zip(dirs, profile):
        assert g == pytest.approx(bf_gain_direct(float(s), p, CFG128), rel=1e-10, abs=1e-12)


def test_integral_definition_oracle_small():
    # numerical integration of the defining integral over the covered interval
    rng = np.random.default_rng(77)
    n_nodes = 10_001
    for _ in range(3):
        n = int(rng.choice([8, 32, 128]))
        cfg = ArrayConfig(n, CARRIER_HZ)
        delta = rng.uniform(0.01, 0.25)
        theta = rng.uniform(-0.5, 0.5)
        omega = rng.uniform(0.0, (n - 1) * math.pi)
        interval = AngularInterval(theta, delta)
        p_grid = np.linspace(-delta, delta, n_nodes)
        beta = beta_coeff(omega, delta, n)
        idx = np.arange(n)[:, None]
        integrand = np.exp(-1j * math.pi * idx * (p_grid[None, :] + theta)) * np.exp(
            1j * omega * p_grid[None, :]
        )
        numeric = beta / (2.0 * delta) * np.trapezoid(integrand, p_grid, axis=1)
        closed = adaptive_precoder(interval, omega, cfg).weights
        assert np.max(np.abs(numeric - closed)) < 1e-6


def test_weights_reproduce_generator_formula():
    rng = np.random.default_rng(13)
    for _ in range(50):
        n = int(rng.integers(2, 65))
        cfg = ArrayConfig(n, CARRIER_HZ)
        interval = random_interval(rng)
        omega = rng.uniform(0.0, (n - 1) * math.pi)
        p = adaptive_precoder(interval, omega, cfg)
        idx = np.arange(n)
        rebuilt = (
            p.beta
            * np.exp(-1j * math.pi * interval.theta_m * idx)
            * np.asarray(sample_fn(interval.delta * (omega - idx * math.pi)))
        )
        assert np.max(np.abs(rebuilt - p.weights)) < 1e-12


def test_array_response_consistency_with_mrt():
    s = 0.37
    mrt = mrt_precoder(s, CFG128)
    assert np.allclose(mrt.weights * math.sqrt(128.0), array_response(s, CFG128), atol=1e-12)


def test_export_record_reconstructs_weights():
    interval = AngularInterval(0.2, 0.04)
    p = adaptive_precoder(interval, 55.0, CFG128)
    record = p.as_record()
    assert set(record) == {"theta_m", "delta", "omega", "beta"}
    rebuilt = adaptive_precoder(
        AngularInterval(record["theta_m"], record["delta"]), record["omega"], CFG128
    )
    assert rebuilt.beta == record["beta"]
    assert np.array_equal(rebuilt.weights, p.weights)
    with_weights = p.as_record(include_weights=True)
    assert len(with_weights["weights"]) == 128
    assert with_weights["weights"][0] == (p.weights[0].real, p.weights[0].imag)
