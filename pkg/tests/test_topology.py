import math

import numpy as np
import pytest

from wignerflow.errors import DomainError
from wignerflow.topology import (FieldlineControls, default_seeds,
                                 equi_wigner_deviation, extract_zero_contours,
                                 integrate_fieldline, topological_charge,
                                 winding_index)

from conftest import HARM_WINDOW, WINDOW


# -- winding index on synthetic fields ----------------------------------------

def test_winding_center():
    raw, idx, ill = winding_index(lambda x, p: (p, -x), (0.0, 0.0), 1.0)
    assert idx == 1 and not ill
    assert abs(raw - 1.0) < 1e-12


def test_winding_saddle():
    raw, idx, _ = winding_index(lambda x, p: (x, -p), (0.0, 0.0), 1.0)
    assert idx == -1
    assert abs(raw + 1.0) < 1e-12


def test_winding_degenerate_double():
    raw, idx, _ = winding_index(lambda x, p: (x * x - p * p, 2 * x * p),
                                (0.0, 0.0), 1.0)
    assert idx == 2


def test_winding_off_center_zero():
    # no zero enclosed -> index 0
    _, idx, _ = winding_index(lambda x, p: (p, -x), (3.0, 0.0), 0.5)
    assert idx == 0


def test_winding_sample_guard():
    with pytest.raises(DomainError):
        winding_index(lambda x, p: (p, -x), (0.0, 0.0), 1.0, samples=16)


def test_topological_charge_rectangle():
    assert topological_charge(lambda x, p: (p, -x), (-2.0, 2.0, -1.0, 1.0)) == 1
    assert topological_charge(lambda x, p: (x, -p), (-2.0, 2.0, -1.0, 1.0)) == -1
    assert topological_charge(lambda x, p: (p, -x), (1.0, 2.0, 1.0, 2.0)) == 0


# -- harmonic control ---------------------------------------------------------

def test_harmonic_single_stagnation_at_origin(harm_stagnation):
    assert len(harm_stagnation) == 1
    q = harm_stagnation[0]
    assert math.hypot(q.x, q.p) < 1e-8
    assert q.index == 1
    assert q.winding_residual < 0.05
    assert q.refinement_converged


def test_harmonic_fieldline_closes(harm_ce):
    line = integrate_fieldline(harm_ce(0), (1.0, 0.0), HARM_WINDOW)
    assert line.termination == "closed"
    r = np.hypot(line.vertices[:, 0], line.vertices[:, 1])
    assert np.max(np.abs(r - 1.0)) < 1e-6          # an exact circle
    assert line.arc_length == pytest.approx(2.0 * math.pi, abs=0.05)
    rep = equi_wigner_deviation(harm_ce(0), line)
    assert rep["deviation"] < 1e-4
    assert rep["crossings"] == 0


def test_fieldline_step_spacing_and_arc(harm_ce):
    controls = FieldlineControls(max_step=0.05)
    line = integrate_fieldline(harm_ce(0), (1.0, 0.0), HARM_WINDOW,
                               controls=controls)
    seg = np.diff(line.vertices, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    assert np.max(lengths) <= controls.max_step * 1.01   # unit-speed field
    assert line.arc_length == pytest.approx(float(np.sum(lengths)), abs=1e-12)


def test_fieldline_tolerance_tightening(harm_ce):
    # tightening the integrator tolerances 10x must not move the curve by
    # more than 10x the looser tolerance
    loose = integrate_fieldline(harm_ce(0), (1.0, 0.0), HARM_WINDOW,
                                controls=FieldlineControls(rtol=1e-6, atol=1e-8))
    tight = integrate_fieldline(harm_ce(0), (1.0, 0.0), HARM_WINDOW,
                                controls=FieldlineControls(rtol=1e-7, atol=1e-9))
    # both curves are circles of radius 1; compare radial profiles
    for line in (loose, tight):
        r = np.hypot(line.vertices[:, 0], line.vertices[:, 1])
        assert np.max(np.abs(r - 1.0)) < 10.0 * 1e-6


def test_fieldline_direction_reversal(harm_ce):
    fwd = integrate_fieldline(harm_ce(0), (1.0, 0.0), HARM_WINDOW, direction=1)
    bwd = integrate_fieldline(harm_ce(0), (1.0, 0.0), HARM_WINDOW, direction=-1)
    # the clockwise flow starts downward in p, the reversed one upward
    assert fwd.vertices[1, 1] < 0.0 < bwd.vertices[1, 1]


def test_fieldline_leaves_window(harm_ce):
    line = integrate_fieldline(harm_ce(0), (1.0, 0.0), (-1.2, 1.2, -0.5, 0.5))
    assert line.termination == "left-window"


# -- Morse n = 1 --------------------------------------------------------------

def test_morse_stagnation_regression(morse_stagnation):
    # frozen after the first converged run
    assert len(morse_stagnation) == 19
    indices = [q.index for q in morse_stagnation]
    assert indices.count(1) == 16
    assert indices.count(-1) == 3
    assert all(q.index in (1, -1) for q in morse_stagnation)
    assert all(q.winding_residual < 0.05 for q in morse_stagnation)
    assert all(q.refinement_converged for q in morse_stagnation)


def test_morse_index_sum_equals_boundary_winding(morse1_ce, morse_stagnation):
    total = sum(q.index for q in morse_stagnation)
    assert total == 13
    assert total == topological_charge(morse1_ce, WINDOW)


def test_morse_saddle_locations(morse_stagnation):
    saddles = sorted([(q.x, q.p) for q in morse_stagnation if q.index == -1])
    ref = sorted([(-0.047, -0.513), (-0.047, 0.513), (1.244, 0.0)])
    for (x, p), (rx, rp) in zip(saddles, ref):
        assert math.hypot(x - rx, p - rp) < 5e-3


def test_morse_stagnation_points_are_zeros(morse1_ce, morse1_grid, morse_stagnation):
    j_scale = float(np.max(np.hypot(morse1_grid["J_x"], morse1_grid["J_p"])))
    for q in morse_stagnation:
        assert np.hypot(*morse1_ce.current_vector(q.x, q.p)) < 1e-8 * j_scale


def test_morse_crossing_fieldline(morse1_ce, morse_crossing_line):
    rep = equi_wigner_deviation(morse1_ce, morse_crossing_line)
    assert rep["crossings"] >= 2                 # pierces the negative patch twice
    assert rep["deviation"] > 0.05               # far from an equi-Wigner contour
    assert morse_crossing_line.termination == "closed"
    # crossings land on the zero set of W
    for cx, cp in morse_crossing_line.crossings:
        assert abs(morse1_ce.evaluator.wigner(cx, cp)) < 1e-9


def test_morse_crossing_count_is_tolerance_robust(morse1_ce):
    line = integrate_fieldline(morse1_ce, (0.9, 0.0), WINDOW,
                               controls=FieldlineControls(rtol=1e-9, atol=1e-11))
    assert len(line.crossings) == 2
    assert line.termination == "closed"


def test_equi_wigner_needs_vertices(morse1_ce, morse_crossing_line):
    from wignerflow.topology import Fieldline
    stub = Fieldline(seed=(0.0, 0.0), vertices=np.zeros((2, 2)),
                     W_along=np.zeros(2), arc_length=0.0, termination="closed")
    with pytest.raises(DomainError):
        equi_wigner_deviation(morse1_ce, stub)


# -- zero contours ------------------------------------------------------------

def test_jx_contour_contains_p_axis(morse1_grid):
    # J_x = pW/M vanishes identically on p = 0
    cs = extract_zero_contours(morse1_grid, "J_x")
    verts = np.vstack(cs.polylines)
    on_axis = verts[np.abs(verts[:, 1]) < 1e-9]
    assert len(on_axis) >= 100
    assert on_axis[:, 0].min() == pytest.approx(-3.0, abs=0.1)
    assert on_axis[:, 0].max() == pytest.approx(6.0, abs=0.1)


def test_harmonic_w_ring_radius(harm_grid):
    # W_1 = 0 on the circle x^2 + p^2 = 1/2
    cs = extract_zero_contours(harm_grid(1), "W")
    ring = max(cs.polylines, key=len)
    assert np.allclose(ring[0], ring[-1])        # closed
    r = np.hypot(ring[:, 0], ring[:, 1])
    assert np.max(np.abs(r - math.sqrt(0.5))) < 5e-3


def test_morse_w_ring_encircles_negative_patch(morse1_ce, morse1_grid):
    cs = extract_zero_contours(morse1_grid, "W")
    closed = [pl for pl in cs.polylines
              if len(pl) > 10 and np.allclose(pl[0], pl[-1])]
    W = morse1_grid["W"]
    i, j = np.unravel_index(np.argmin(W), W.shape)
    cx, cp = morse1_grid.x[i], morse1_grid.p[j]
    windings = []
    for pl in closed:
        ang = np.unwrap(np.arctan2(pl[:, 1] - cp, pl[:, 0] - cx))
        windings.append(abs(ang[-1] - ang[0]))
    assert any(w > 5.0 for w in windings)        # ~2 pi around the minimum
    # the extracted polyline tracks the true zero level set
    ring = closed[int(np.argmax(windings))]
    w_max = float(np.max(np.abs(W)))
    for vx, vp in ring[::10]:
        assert abs(morse1_ce.evaluator.wigner(vx, vp)) < 5e-3 * w_max


def test_contour_unknown_channel(morse1_grid):
    with pytest.raises(DomainError):
        extract_zero_contours(morse1_grid, "nope")


# -- seeds --------------------------------------------------------------------

def test_default_seed_policies():
    b = default_seeds(WINDOW, "boundary")
    a = default_seeds(WINDOW, "axis")
    both = default_seeds(WINDOW, "both")
    assert all(p == 0.0 for _, p in a)
    assert len(both) == len(a) + len(b)
    for x, p in b:
        assert (x in (WINDOW[0], WINDOW[1])) or (p in (WINDOW[2], WINDOW[3]))
    with pytest.raises(DomainError):
        default_seeds(WINDOW, "everywhere")
