import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from curlforge.catalog import build_system, galley_bateman_system, galley_forced_km_system, kapitsa_hamiltonian
from curlforge.contact import ConfigPath
from curlforge.core import ScalarField, probe_points
from curlforge.galley import (GalleySystem, check_K_consistency, galley_el_residual, galley_energy_rate,
                              galley_path, galley_rhs, inverse_plus_minus, plus_minus_transform, relabel_defect)
from curlforge.integrate import integrate

vec2 = arrays(float, 2, elements=st.floats(-10, 10))
HARMONIC = ScalarField(lambda v, t: 0.5 * v[1] ** 2 + 0.5 * v[0] ** 2, lambda v, t: np.array([v[0], v[1]]))
HARMONIC_L = ScalarField(lambda v, t: 0.5 * v[1] ** 2 - 0.5 * v[0] ** 2)


def bateman_exact(kappa, x0, v0, t):
    """x'' - kappa x' + x = 0 in closed form (underdamped, kappa < 2)."""
    w = np.sqrt(1 - kappa ** 2 / 4)
    A, B = x0, (v0 - kappa / 2 * x0) / w
    return np.exp(kappa * t / 2) * (A * np.cos(w * t) + B * np.sin(w * t))


def test_transform_examples():
    qm, qp = plus_minus_transform([0.3, -1.0], [0.3, -1.0])
    np.testing.assert_array_equal(qm, 0.0)
    np.testing.assert_array_equal(qp, [0.3, -1.0])
    qm, qp = plus_minus_transform([2.0, 0.0], [0.0, 2.0])
    np.testing.assert_array_equal(qm, [2.0, -2.0])
    np.testing.assert_array_equal(qp, [1.0, 1.0])
    with pytest.raises(ValueError, match="mismatch"):
        plus_minus_transform([1.0], [1.0, 2.0])


@given(vec2, vec2)
def test_transform_roundtrip(q1, q2):
    a, b = inverse_plus_minus(*plus_minus_transform(q1, q2))
    np.testing.assert_allclose(a, q1, atol=1e-14 * max(1, np.max(np.abs(q1))) * 10, rtol=1e-15)
    np.testing.assert_allclose(b, q2, atol=1e-14 * max(1, np.max(np.abs(q2))) * 10, rtol=1e-15)


def test_zero_K_is_canonical():
    sys = GalleySystem.conservative(1, HARMONIC)
    np.testing.assert_array_equal(galley_rhs(sys, [0.4, -0.3]), [-0.3, -0.4])
    assert galley_energy_rate(sys, [0.4, -0.3]) == 0.0


def test_bateman_rhs_example():
    sys = galley_bateman_system(0.4)
    np.testing.assert_allclose(galley_rhs(sys, [1.0, 2.0]), [2.0, -0.2], atol=1e-15)


def test_forced_km_rhs():
    a, b, k, fx, fy = 0.7, 1.3, 0.25, 0.4, -0.6
    sys = galley_forced_km_system(a, b, k, fx, fy)
    for x, y, px, py in probe_points(4, n=8):
        out = galley_rhs(sys, [x, y, px, py])
        np.testing.assert_allclose(out, [px, -py, -b * x - a * y - k * px + fx, b * y - a * x - k * py + fy],
                                   atol=1e-14)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        galley_rhs(galley_bateman_system(0.2), [1.0, 2.0, 3.0])


def test_bateman_energy_rate_value_and_slope():
    sys = galley_bateman_system(0.4)
    # dH/dt = H_p [K_q-] - H_q [K_p-] = p * kappa p
    assert galley_energy_rate(sys, [1.0, 2.0]) == pytest.approx(1.6, abs=1e-14)
    h = 1e-4
    traj = integrate(lambda v, t: galley_rhs(sys, v, t), [1.0, 2.0], 0.0, 2 * h, h)
    H = [sys.H(s) for s in traj.states]
    assert (H[2] - H[0]) / (2 * h) == pytest.approx(galley_energy_rate(sys, traj.states[1]), rel=1e-6)


def test_pure_forcing_rate():
    f = np.array([0.3, -0.2])
    sys = galley_forced_km_system(1.0, 1.0, 0.0, f[0], f[1])
    for s in probe_points(4, n=8):
        qdot = galley_rhs(sys, s)[:2]
        assert galley_energy_rate(sys, s) == pytest.approx(qdot @ f, abs=1e-14)


@pytest.mark.parametrize("name", ["galley_bateman", "galley_forced_km"])
def test_energy_rate_matches_slope_on_catalog(name, long_run):
    params = {"f_x": 0.3, "f_y": -0.1} if name == "galley_forced_km" else None
    sys, traj = long_run(name, params)
    H = np.array([sys.observables["energy"](s) for s in traj.states])
    slope = (H[:-4] - 8 * H[1:-3] + 8 * H[3:-1] - H[4:]) / (12 * traj.dt)
    rate = np.array([sys.energy_rate(s, t) for s, t in zip(traj.states, traj.times)])[2:-2]
    assert np.max(np.abs(slope - rate)) / np.max(np.abs(rate)) <= 1e-4


def test_bateman_matches_closed_form():
    kappa = 0.2
    sys = build_system("galley_bateman", {"kappa": kappa})
    traj = integrate(sys, [1.0, 0.0], 0.0, 10.0, 1e-3)
    assert np.max(np.abs(traj.column(0) - bateman_exact(kappa, 1.0, 0.0, traj.times))) <= 1e-8


def test_forced_km_zero_coupling_is_kapitsa():
    kap = build_system("kapitsa")
    gal = build_system("galley_forced_km", {"kappa": 0.0})
    for x in probe_points(4):
        np.testing.assert_array_equal(kap.rhs(x, 0.0), gal.rhs(x, 0.0))


def test_relabel_antisymmetry():
    sys = galley_forced_km_system(1.0, 1.0, 0.2, 0.1, 0.1)
    assert relabel_defect(sys.K, 2) <= 1e-12
    sym = lambda qp, qm, pp, pm, t: qp @ qp + qm @ qm
    assert relabel_defect(sym, 2) > 1e-3
    with pytest.raises(ValueError, match="antisymmetric"):
        GalleySystem.from_full_K(2, kapitsa_hamiltonian(1, 1), sym)


def test_K_consistency_oracle():
    for sys in (galley_bateman_system(0.3), galley_forced_km_system(1.0, 0.5, 0.2, 0.4, -0.1)):
        assert check_K_consistency(sys) <= 1e-6
    with pytest.raises(ValueError):
        check_K_consistency(GalleySystem.conservative(1, HARMONIC))


def test_augmented_K_identical_rhs():
    base = galley_forced_km_system(1.0, 1.0, 0.2, 0.1, -0.3)
    aug = galley_forced_km_system(1.0, 1.0, 0.2, 0.1, -0.3, extra_term=lambda qp, qm, pp, pm, t: pp @ qp)
    for x in probe_points(4):
        assert np.array_equal(galley_rhs(base, x), galley_rhs(aug, x))


def test_el_residual_conservative_harmonic():
    t = np.arange(0, 10 + 1e-12, 1e-3)
    path = ConfigPath(t, np.cos(t)[:, None], -np.sin(t)[:, None])
    assert np.max(galley_el_residual(HARMONIC_L, GalleySystem.conservative(1, HARMONIC), path)) <= 1e-4


def test_el_residual_bateman_and_negative_control():
    sys = galley_bateman_system(0.2)
    traj = integrate(lambda v, t: galley_rhs(sys, v, t), [1.0, 0.0], 0.0, 10.0, 1e-3)
    assert np.max(galley_el_residual(HARMONIC_L, sys, galley_path(sys, traj))) <= 1e-4
    t = traj.times
    bad = ConfigPath(t, np.cos(t)[:, None], -np.sin(t)[:, None])
    assert np.max(galley_el_residual(HARMONIC_L, sys, bad)) > 1e-1


def test_el_residual_too_short():
    sys = galley_bateman_system(0.2)
    with pytest.raises(ValueError):
        galley_el_residual(HARMONIC_L, sys, ConfigPath(np.array([0.0, 1.0]), np.zeros((2, 1)), np.zeros((2, 1))))
