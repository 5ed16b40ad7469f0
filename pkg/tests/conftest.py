"""Shared fixtures: evaluators and grid fills are expensive, so they are
session-scoped and cached per state index."""

import math

import numpy as np
import pytest

from wignerflow.current import CurrentEvaluator, fill_current_grid
from wignerflow.eigenstates import (MorseSpectrumParams, harmonic_state,
                                    morse_state)
from wignerflow.potentials import HarmonicPotential, MorsePotential
from wignerflow.wigner import GridSpec, WignerEvaluator

# the phase-space window every desk-scale check runs on
WINDOW = (-3.0, 6.0, -3.0, 3.0)
DESK_SPEC = GridSpec(-3.0, 6.0, 201, -3.0, 3.0, 201)
HARM_WINDOW = (-3.0, 3.0, -3.0, 3.0)
HARM_SPEC = GridSpec(-3.0, 3.0, 121, -3.0, 3.0, 121)


@pytest.fixture(scope="session")
def morse_pot():
    return MorsePotential()


@pytest.fixture(scope="session")
def morse_params(morse_pot):
    return MorseSpectrumParams(morse_pot)


@pytest.fixture(scope="session")
def morse_ce(morse_pot, morse_params):
    """Cached CurrentEvaluator per Morse quantum number."""
    cache = {}

    def get(n: int) -> CurrentEvaluator:
        if n not in cache:
            st = morse_state(morse_params, n)
            ev = WignerEvaluator(st, (-5.0, 16.0), 6.0, k_max=81)
            cache[n] = CurrentEvaluator(ev, morse_pot, 1.0, 1.0)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def morse_grid(morse_ce):
    """Cached desk-scale current grid per Morse quantum number."""
    cache = {}

    def get(n: int):
        if n not in cache:
            cache[n] = fill_current_grid(morse_ce(n), DESK_SPEC)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def morse1_ce(morse_ce):
    return morse_ce(1)


@pytest.fixture(scope="session")
def morse1_grid(morse_grid):
    return morse_grid(1)


@pytest.fixture(scope="session")
def morse1_wide_grid(morse1_ce):
    """Tail-contained grid for normalization / marginal integrals."""
    spec = GridSpec(-5.0, 16.0, 241, -6.0, 6.0, 241)
    return morse1_ce.evaluator.fill_grid(spec, dp_orders=(1,))


@pytest.fixture(scope="session")
def harm_ce():
    """Cached harmonic CurrentEvaluator per quantum number (M = omega = hbar = 1)."""
    cache = {}

    def get(n: int) -> CurrentEvaluator:
        if n not in cache:
            st = harmonic_state(1.0, 1.0, n)
            ev = WignerEvaluator(st, (-6.0, 6.0), 6.0, k_max=81)
            cache[n] = CurrentEvaluator(ev, HarmonicPotential(1.0, 1.0), 1.0, 1.0)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def harm_grid(harm_ce):
    cache = {}

    def get(n: int):
        if n not in cache:
            cache[n] = fill_current_grid(harm_ce(n), HARM_SPEC)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def morse_stagnation(morse1_ce):
    from wignerflow.topology import find_stagnation_points
    return find_stagnation_points(morse1_ce, WINDOW)


@pytest.fixture(scope="session")
def harm_stagnation(harm_ce):
    from wignerflow.topology import find_stagnation_points
    return find_stagnation_points(harm_ce(0), HARM_WINDOW)


@pytest.fixture(scope="session")
def morse_crossing_line(morse1_ce):
    """The frozen fieldline that pierces the negative patch: seed (0.9, 0)."""
    from wignerflow.topology import integrate_fieldline
    return integrate_fieldline(morse1_ce, (0.9, 0.0), WINDOW)


def fd_first(f, t0: float, h: float = 1e-3) -> float:
    """5-point central first derivative, O(h^4)."""
    return (f(t0 - 2 * h) - 8 * f(t0 - h) + 8 * f(t0 + h) - f(t0 + 2 * h)) / (12 * h)
