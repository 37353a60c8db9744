import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccontrol.fracops import (
    ControlSignal,
    FracParams,
    IntegrabilityError,
    convolution_weights,
    kernel,
    mild_solution,
    rr_apply,
    sr_apply,
)
from fraccontrol.mittag_leffler import ml2
from fraccontrol.spectral import Pointwise, Zonal, actuator_coeffs, eigenvalues, unit_mode
from oracles import heat_modal_reference

P7 = FracParams(r=0.7)


def test_params_defaults_and_guard():
    assert P7.horizon == pytest.approx(0.9)
    assert P7.eps_used == 0.0
    p3 = FracParams(r=0.3)
    assert p3.eps_used == pytest.approx(0.045)
    p3.check_integrable()
    with pytest.raises(IntegrabilityError):
        FracParams(r=0.5, eps=0.0).check_integrable()


@pytest.mark.parametrize(
    "kwargs",
    [dict(r=0.0), dict(r=1.2), dict(r=0.5, h=-0.1), dict(r=0.5, tau=0.1, h=0.1), dict(r=0.5, eps=0.95)],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        FracParams(**kwargs)


def test_signal_validation():
    g = np.linspace(0, 0.9, 4)
    with pytest.raises(ValueError):
        ControlSignal(g, np.zeros(3))
    with pytest.raises(ValueError):
        ControlSignal(g[::-1], np.zeros(4))
    with pytest.raises(ValueError):
        ControlSignal(g, np.zeros(4), np.array([-0.1, 0.1]), np.zeros(2))
    with pytest.raises(ValueError):
        ControlSignal(g, np.array([0, np.nan, 0, 0]))
    sig = ControlSignal.uniform(P7, 9, u=lambda t: t, phi=1.0)
    assert sig.history_grid[0] == pytest.approx(-0.1) and np.all(sig.history == 1.0)
    np.testing.assert_allclose(sig.u, sig.grid)


def test_rr_apply_is_free_evolution():
    z0 = [1.0, 0.0, 2.0]
    lam = eigenvalues(3)
    np.testing.assert_allclose(rr_apply(P7, 0.4, z0), ml2(0.7, 1.0, lam * 0.4**0.7) * z0)
    np.testing.assert_allclose(rr_apply(P7, 0.0, z0), z0)


def test_sr_apply_kernel_relation():
    # s^(r-1) sr_apply(s) equals the convolution kernel
    s = 0.37
    v = sr_apply(P7, s, np.ones(4)) * s ** (P7.r - 1)
    np.testing.assert_allclose(v, kernel(P7, 4, [s])[:, 0], rtol=1e-12)
    with pytest.raises(ValueError):
        sr_apply(P7, 0.0, [1.0])


def test_kernel_rejects_nonpositive():
    with pytest.raises(ValueError):
        kernel(P7, 2, [0.0, 0.1])


def test_hat_weights_frozen(frozen):
    # the oracle's singular-segment quadrature runs at QUADPACK's default
    # epsrel (~1.5e-8); the weights themselves are good to ~1e-13 absolute
    ref = frozen["hat_response"]
    p = FracParams(r=ref["r"], tau=ref["T"] + 0.1, h=0.1)
    grid = np.array(ref["grid"])
    C = convolution_weights(p, max(ref["modes"]), p.horizon, grid)
    for row, i in zip(ref["values"], ref["modes"]):
        for val, k in zip(row, ref["hats"]):
            assert C[i - 1, k] == pytest.approx(val, rel=1e-8, abs=1e-13)


def test_weights_integrate_constants_exactly():
    # sum of hats is 1, and int_0^S k = S^r E_{r,r+1}(lam S^r)
    grid = np.linspace(0, 0.9, 37)
    C = convolution_weights(P7, 5, 0.6, grid)
    lam = eigenvalues(5)
    ref = 0.6**0.7 * ml2(0.7, 1.7, lam * 0.6**0.7)
    np.testing.assert_allclose(C.sum(axis=1), ref, rtol=1e-12)
    assert np.all(C[:, grid > 0.6 + 0.025] == 0.0)


def test_free_solution_matches_ml():
    z0 = unit_mode(1, 3) + 0.5 * unit_mode(3, 3)
    sig = ControlSignal.uniform(P7, 30)
    t = np.linspace(0, 1, 6)
    traj = mild_solution(P7, z0, Zonal(0, 0.5), sig, t)
    lam = eigenvalues(3)
    ref = ml2(0.7, 1.0, (lam[None, :] * t[:, None] ** 0.7).ravel()).reshape(6, 3) * z0
    np.testing.assert_allclose(traj.states, ref, atol=1e-14)
    np.testing.assert_allclose(traj.mode(1), ref[:, 0])


def test_delay_makes_control_act_after_h():
    sig = ControlSignal.uniform(P7, 30, u=1.0)
    traj = mild_solution(P7, np.zeros(4), Zonal(0, 0.5), sig, [0.05, 0.1, 0.2])
    assert np.all(traj.states[:2] == 0.0)
    assert np.all(traj.states[2, [0, 1, 2]] != 0.0)


def test_pointwise_even_modes_stay_zero():
    sig = ControlSignal.uniform(P7, 20, u=lambda t: math.sin(7 * t))
    traj = mild_solution(P7, np.zeros(6), Pointwise(0.5), sig, [0.5, 1.0])
    assert np.all(traj.states[:, 1::2] == 0.0)


def test_history_term_contributes():
    sig = ControlSignal.uniform(P7, 30, u=0.0, phi=1.0)
    traj = mild_solution(P7, np.zeros(2), Zonal(0, 0.5), sig, [0.05, 0.1, 0.5])
    assert np.all(traj.states[0] > 0)
    # after t = h the history window is finished: a fixed pulse, then decay
    assert abs(traj.states[2, 0]) < abs(traj.states[1, 0])


def test_classical_limit_heat():
    p = FracParams(r=1.0)
    act = Zonal(0, 0.5)
    sig = ControlSignal.uniform(p, 90, u=1.0)
    t = np.linspace(0, 1, 11)
    traj = mild_solution(p, np.zeros(5), act, sig, t)
    ref = heat_modal_reference(eigenvalues(5), actuator_coeffs(act, 5), p.h, t)
    np.testing.assert_allclose(traj.states, ref, atol=1e-12)


def test_output_time_validation():
    sig = ControlSignal.uniform(P7, 10)
    with pytest.raises(ValueError):
        mild_solution(P7, [1.0], Zonal(0, 0.5), sig, [1.5])
    bad = ControlSignal(np.linspace(0, 0.5, 4), np.zeros(4))
    with pytest.raises(ValueError):
        mild_solution(P7, [1.0], Zonal(0, 0.5), bad, [0.5])


controls = st.lists(st.floats(-5, 5), min_size=11, max_size=11)


@settings(max_examples=25, deadline=None)
@given(controls, controls, st.floats(-3, 3))
def test_linearity_in_control(u1, u2, c):
    s = ControlSignal.uniform(P7, 10)
    run = lambda u: mild_solution(P7, np.zeros(4), Zonal(0.1, 0.6), s.with_u(u), [0.5, 1.0]).states
    lhs = run(np.array(u1) + c * np.array(u2))
    rhs = run(u1) + c * run(u2)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + np.abs(rhs).max()))


@settings(max_examples=25, deadline=None)
@given(controls, st.integers(1, 9))
def test_causality(u, cut):
    # changing u after grid node `cut` cannot affect the state before t = h + node
    s = ControlSignal.uniform(P7, 10)
    u = np.array(u)
    v = u.copy()
    v[cut + 1 :] += 1.0
    t = P7.h + s.grid[cut]
    a = mild_solution(P7, np.zeros(3), Zonal(0, 0.5), s.with_u(u), [t]).states
    b = mild_solution(P7, np.zeros(3), Zonal(0, 0.5), s.with_u(v), [t]).states
    np.testing.assert_array_equal(a, b)
