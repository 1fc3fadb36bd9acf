"""Penalty, quadrature objective, and PSO behaviour."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from thztrack import (
    ArrayConfig,
    ObjectiveSpec,
    PsoConfig,
    achievable_rate,
    adaptive_precoder,
    bf_gain_direct,
    objective,
    optimize_omega,
    penalty,
    pose_to_direction,
    predict_pose,
    pso_bounds,
    violation_mass,
)
from conftest import CARRIER_HZ, aligned_rate, make_budget, make_objective_spec, make_scenario

CFG = ArrayConfig(128, CARRIER_HZ)
BUDGET = make_budget()


def spec_for_velocity(v: float, alpha=10.0, n_quad=64, cfg=CFG) -> ObjectiveSpec:
    sc = make_scenario(cfg, BUDGET, velocity=v)
    return make_objective_spec(sc, alpha=alpha, n_quad=n_quad)


def test_penalty_boundary_and_branches():
    assert penalty(5.0, 5.0, 3.0) == 0.0
    assert penalty(6.0, 5.0, 3.0) == 0.0
    assert penalty(3.0, 5.0, 2.0) == pytest.approx(-4.0, rel=1e-12)
    rates = np.array([0.0, 4.9, 5.0, 5.1])
    assert np.allclose(penalty(rates, 5.0, 1.0), [-5.0, -0.1, 0.0, 0.0])


def test_objective_static_target_equals_aligned_rate():
    spec = spec_for_velocity(0.0)
    expected = aligned_rate(CFG, BUDGET)
    for omega in (0.0, 17.0, 150.0):
        assert objective(omega, spec) == pytest.approx(expected, rel=1e-12)


def test_objective_zero_alpha_matches_manual_quadrature():
    # independent re-derivation from public pieces at the same nodes
    spec = spec_for_velocity(50.0, alpha=0.0)
    omega = 80.0
    nodes, weights = np.polynomial.legendre.leggauss(spec.n_quad)
    t = 0.5 * spec.tau * (nodes + 1.0)
    w = 0.5 * spec.tau * weights
    beam = adaptive_precoder(spec.interval, omega, spec.cfg)
    total = 0.0
    for tk, wk in zip(t, w):
        sin_dir, dist = pose_to_direction(predict_pose(spec.state, float(tk), spec.tau), spec.geom)
        rate = achievable_rate(bf_gain_direct(sin_dir, beam, spec.cfg), dist, spec.budget, spec.cfg)
        total += wk * rate
    assert objective(omega, spec) == pytest.approx(total / spec.tau, rel=1e-10)


def test_objective_penalty_disabled_vs_enabled():
    spec_pen = spec_for_velocity(80.0, alpha=10.0)
    spec_off = replace(spec_pen, alpha=0.0)
    omega = 5.0  # poor shape: rates dip below the threshold somewhere
    assert objective(omega, spec_pen) <= objective(omega, spec_off) + 1e-6


def test_objective_quadrature_refinement():
    spec64 = spec_for_velocity(50.0, n_quad=64)
    spec128 = replace(spec64, n_quad=128)
    omega = 120.0
    v64 = objective(omega, spec64)
    v128 = objective(omega, spec128)
    assert abs(v128 - v64) / abs(v128) < 1e-6


def test_objective_reflection_symmetry():
    rng = np.random.default_rng(61)
    for n in (2, 4, 8, 128):
        cfg = ArrayConfig(n, CARRIER_HZ)
        spec = spec_for_velocity(40.0, cfg=cfg)
        full = (n - 1) * math.pi
        for _ in range(10):
            omega = rng.uniform(0.0, full)
            v1 = objective(omega, spec)
            v2 = objective(full - omega, spec)
            assert abs(v1 - v2) <= 1e-8 * abs(v1)


def test_pso_bounds_even_odd():
    assert pso_bounds(ArrayConfig(128, CARRIER_HZ)) == (0.0, 127.0 * math.pi / 2.0)
    assert pso_bounds(ArrayConfig(5, CARRIER_HZ)) == (0.0, 4.0 * math.pi)


def test_optimize_deterministic_across_repeats():
    spec = spec_for_velocity(50.0)
    pso = PsoConfig(bounds=pso_bounds(CFG), n_particles=20, n_iterations=30, seed=99)
    results = [optimize_omega(spec, pso) for _ in range(3)]
    assert results[0] == results[1] == results[2]


def test_optimize_beats_grid_search():
    spec = spec_for_velocity(50.0)
    pso = PsoConfig(bounds=pso_bounds(CFG), seed=5)
    result = optimize_omega(spec, pso)
    grid = np.linspace(*pso.bounds, 257)
    best_grid = max(objective(float(w), spec) for w in grid)
    assert result.objective_value >= best_grid * (1.0 - 1e-4)
    assert pso.bounds[0] <= result.omega_star <= pso.bounds[1]


def test_optimize_static_interval_objective_is_flat():
    spec = spec_for_velocity(0.0)
    pso = PsoConfig(bounds=pso_bounds(CFG), n_particles=8, n_iterations=5, seed=1)
    result = optimize_omega(spec, pso)
    assert result.objective_value == pytest.approx(aligned_rate(CFG, BUDGET), rel=1e-12)


def test_optimize_mirror_domain():
    spec = spec_for_velocity(50.0)
    half = (CFG.n_antennas - 1) * math.pi / 2.0
    left = optimize_omega(spec, PsoConfig(bounds=(0.0, half), seed=8))
    right = optimize_omega(spec, PsoConfig(bounds=(half, 2.0 * half), seed=8))
    assert left.objective_value == pytest.approx(right.objective_value, rel=1e-8)


def test_optimize_rejects_invalid_bounds():
    spec = spec_for_velocity(10.0)
    with pytest.raises(ValueError):
        PsoConfig(bounds=(3.0, 3.0), seed=1)
    with pytest.raises(ValueError):
        optimize_omega(spec, PsoConfig(bounds=(-1.0, 10.0), seed=1))


def test_violation_mass_non_increasing_in_alpha():
    # threshold high enough that the constraint binds at the optimum
    base = spec_for_velocity(80.0)
    r_min = 0.8 * aligned_rate(CFG, BUDGET)
    masses = []
    for alpha in (0.0, 1.0, 10.0, 100.0):
        spec = replace(base, r_min=r_min, alpha=alpha)
        result = optimize_omega(spec, PsoConfig(bounds=pso_bounds(CFG), seed=77))
        masses.append(violation_mass(result.omega_star, spec))
    assert masses[0] > 0.0
    for lo, hi in zip(masses[1:], masses[:-1]):
        assert lo <= hi * (1.0 + 1e-6) + 1e-9


def test_spec_validation():
    sc = make_scenario(CFG, BUDGET, velocity=10.0)
    with pytest.raises(ValueError):
        make_objective_spec(sc, alpha=-1.0)
    with pytest.raises(ValueError):
        make_objective_spec(sc, n_quad=4)
