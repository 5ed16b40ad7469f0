import math

import numpy as np
import pytest

from wignerflow.errors import AccuracyError, DomainError, OrderLimitError
from wignerflow.wigner import GridSpec, WignerEvaluator, worker_count

from conftest import fd_first


# -- analytic Gaussian oracles ------------------------------------------------

def test_harmonic_ground_state_is_gaussian(harm_ce):
    ev = harm_ce(0).evaluator
    assert ev.wigner(0.0, 0.0) == pytest.approx(1.0 / math.pi, rel=1e-9)
    for x, p in [(0.5, -0.3), (1.2, 0.8), (-1.0, 1.5)]:
        assert ev.wigner(x, p) == pytest.approx(
            math.exp(-x * x - p * p) / math.pi, rel=1e-9)


def test_harmonic_first_excited_origin(harm_ce):
    # W_1(x,p) = (1/pi)(2x^2 + 2p^2 - 1) e^{-x^2-p^2}
    ev = harm_ce(1).evaluator
    assert ev.wigner(0.0, 0.0) == pytest.approx(-1.0 / math.pi, rel=1e-9)
    assert ev.wigner(0.5, 0.5) == pytest.approx(0.0, abs=1e-12)


def test_harmonic_second_p_derivative_origin(harm_ce):
    ev = harm_ce(0).evaluator
    assert ev.wigner_dp(0.0, 0.0, 2) == pytest.approx(-2.0 / math.pi, rel=1e-9)


def test_harmonic_dx_vanishes_on_p_axis(harm_ce):
    ev = harm_ce(0).evaluator
    for p in (-1.0, 0.0, 0.7):
        assert abs(ev.wigner_dx(0.0, p)) < 1e-12


# -- integral identities ------------------------------------------------------

def test_morse_normalization(morse1_wide_grid):
    g = morse1_wide_grid
    norm = np.trapezoid(np.trapezoid(g["W"], g.p, axis=1), g.x)
    assert abs(norm - 1.0) < 1e-6


def test_morse_position_marginal(morse1_wide_grid, morse_params):
    from wignerflow.eigenstates import morse_state
    st = morse_state(morse_params, 1)
    g = morse1_wide_grid
    marg = np.trapezoid(g["W"], g.p, axis=1)
    assert np.max(np.abs(marg - st.psi(g.x) ** 2)) < 1e-6


def test_morse_momentum_marginal(morse1_wide_grid, morse_params):
    # oracle: |phi(p)|^2 from a direct Fourier quadrature of psi
    from wignerflow.eigenstates import morse_state
    st = morse_state(morse_params, 1)
    g = morse1_wide_grid
    xf = np.linspace(-6.0, 30.0, 20001)
    psi = st.psi(xf)
    phi2 = np.array([
        (np.trapezoid(psi * np.cos(p * xf), xf) ** 2
         + np.trapezoid(psi * np.sin(p * xf), xf) ** 2) / (2.0 * math.pi)
        for p in g.p])
    marg = np.trapezoid(g["W"], g.x, axis=0)
    assert np.max(np.abs(marg - phi2)) < 1e-6


def test_p_parity(morse1_ce):
    ev = morse1_ce.evaluator
    for x, p in [(0.5, 0.8), (2.0, 1.7), (-1.0, 0.3)]:
        assert ev.wigner(x, p) == pytest.approx(ev.wigner(x, -p), abs=1e-10)
    # odd p-derivatives vanish on the p = 0 axis
    for k in (1, 3, 5):
        assert abs(ev.wigner_dp(1.0, 0.0, k)) < 1e-9


def test_negative_region_exists(morse1_grid):
    assert float(np.min(morse1_grid["W"])) < -0.05 * float(np.max(morse1_grid["W"]))


# -- derivative oracles -------------------------------------------------------

def test_dp_derivative_ladder(morse1_ce):
    # each order is the p-derivative of the previous one, chained to k = 8
    ev = morse1_ce.evaluator
    x0, p0 = 1.0, 0.5
    for k in range(1, 9):
        lower = (lambda p: ev.wigner(x0, p)) if k == 1 else \
                (lambda p, kk=k - 1: ev.wigner_dp(x0, p, kk))
        val = ev.wigner_dp(x0, p0, k)
        assert abs(val - fd_first(lower, p0)) / abs(val) < 1e-5


def test_dx_matches_finite_difference(morse1_ce):
    ev = morse1_ce.evaluator
    val = ev.wigner_dx(0.5, 0.0)
    est = fd_first(lambda x: ev.wigner(x, 0.0), 0.5)
    assert abs(val - est) / abs(val) < 1e-5


def test_dx_integrates_to_boundary_difference(morse1_ce):
    # fundamental theorem of calculus in x at fixed p
    ev = morse1_ce.evaluator
    p0 = 0.5
    x = np.linspace(-3.0, 6.0, 2001)
    integral = np.trapezoid([ev.wigner_dx(xi, p0) for xi in x], x)
    assert integral == pytest.approx(
        ev.wigner(6.0, p0) - ev.wigner(-3.0, p0), abs=1e-7)


# -- grids and determinism ----------------------------------------------------

def test_fill_grid_matches_pointwise(morse1_ce):
    ev = morse1_ce.evaluator
    spec = GridSpec(-1.0, 2.0, 4, -1.0, 1.0, 3)
    g = ev.fill_grid(spec, dp_orders=(1, 2))
    for i, x in enumerate(g.x):
        for j, p in enumerate(g.p):
            assert g["W"][i, j] == pytest.approx(ev.wigner(x, p), rel=1e-12, abs=1e-15)
            assert g["dWdp2"][i, j] == pytest.approx(
                ev.wigner_dp(x, p, 2), rel=1e-12, abs=1e-15)


def test_fill_grid_worker_invariance(harm_ce):
    ev = harm_ce(0).evaluator
    spec = GridSpec(-2.0, 2.0, 41, -2.0, 2.0, 41)
    g1 = ev.fill_grid(spec, dp_orders=(1, 3), workers=1)
    g3 = ev.fill_grid(spec, dp_orders=(1, 3), workers=3)
    for name in ("W", "dWdx", "dWdp1", "dWdp3"):
        assert np.array_equal(g1[name], g3[name])   # bit-identical


def test_worker_count_resolution(monkeypatch):
    monkeypatch.delenv("WIGNER_FLOW_THREADS", raising=False)
    assert worker_count() == 1
    assert worker_count(4) == 4
    monkeypatch.setenv("WIGNER_FLOW_THREADS", "6")
    assert worker_count() == 6
    assert worker_count(2) == 2


# -- guards -------------------------------------------------------------------

def test_order_limit(morse1_ce):
    ev = morse1_ce.evaluator
    with pytest.raises(OrderLimitError):
        ev.wigner_dp(1.0, 0.5, ev.k_max + 1)
    with pytest.raises(DomainError):
        ev.wigner_dp(1.0, 0.5, 0)


def test_out_of_window_position(morse1_ce):
    ev = morse1_ce.evaluator
    with pytest.raises(AccuracyError):
        ev.wigner(40.0, 0.0)
    with pytest.raises(DomainError):
        ev.wigner(math.nan, 0.0)


def test_grid_must_fit_window(morse1_ce):
    ev = morse1_ce.evaluator
    with pytest.raises(AccuracyError):
        ev.fill_grid(GridSpec(-3.0, 30.0, 8, -1.0, 1.0, 8))


def test_grid_spec_guards():
    with pytest.raises(DomainError):
        GridSpec(1.0, -1.0, 10, -1.0, 1.0, 10)
    with pytest.raises(DomainError):
        GridSpec(-1.0, 1.0, 1, -1.0, 1.0, 10)
