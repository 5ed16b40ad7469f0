"""Wigner phase-space current J, velocity field w = J/W and their divergences.

The x-component is purely classical, J_x = p W / M.  The p-component is
the classical force term plus an alternating series coupling even
p-derivatives of W to odd x-derivatives of V:

    J_p = -W V' - sum_{l>=1} (-1)^l (hbar/2)^{2l} / (2l+1)! * d_p^{2l}W * d_x^{2l+1}V

The series stop rule requires two consecutive sub-tolerance terms because
the terms alternate in sign and can have accidental near-zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .potentials import Potential
from .wigner import GridSpec, PhaseGrid, WignerEvaluator

__all__ = ["CurrentEvaluator", "CurrentSample", "VelocitySample", "fill_current_grid"]


@lru_cache(maxsize=None)
def _series_coeff(l: int, hbar: float) -> float:
    """(-1)^l (hbar/2)^{2l} / (2l+1)!  -- real and sign-alternating."""
    return (-1.0) ** l * (hbar / 2.0) ** (2 * l) / math.factorial(2 * l + 1)


@dataclass(frozen=True)
class CurrentSample:
    J_x: float
    J_p: float
    j_x: float
    j_p: float
    quantum_correction: float
    terms_used: int
    truncation_estimate: float
    converged: bool


@dataclass(frozen=True)
class VelocitySample:
    w_x: float
    w_p: float
    singular: bool


class CurrentEvaluator:
    """Current, velocity and divergence evaluation for one eigenstate."""

    def __init__(self, evaluator: WignerEvaluator, potential: Potential,
                 M: float, hbar: float, *, l_max: int = 25,
                 series_rtol: float = 1e-12, series_atol: float = 1e-30,
                 w_floor_rel: float = 1e-10):
        if M <= 0 or hbar <= 0:
            raise DomainError("M and hbar must be positive")
        if l_max < 1:
            raise DomainError("l_max must be >= 1")
        self.evaluator = evaluator
        self.potential = potential
        self.M = float(M)
        self.hbar = float(hbar)
        self.l_max = int(l_max)
        self.series_rtol = float(series_rtol)
        self.series_atol = float(series_atol)
        self.w_floor_rel = float(w_floor_rel)
        if 2 * self.l_max + 1 > evaluator.k_max:
            raise DomainError(
                f"evaluator k_max={evaluator.k_max} too small for l_max={l_max}"
            )
        self._scales: dict | None = None
        # adaptive guess for how many series terms pointwise calls need;
        # only a hint shared across calls, results never depend on it
        self._depth_guess = min(self.l_max, 12)

    # -- scales ---------------------------------------------------------------

    def _grid_scales(self) -> dict:
        """Coarse-grid reference magnitudes (W_max etc.), computed once."""
        if self._scales is None:
            ev = self.evaluator
            spec = GridSpec(ev._x_lo, ev._x_hi, 81, -ev.p_absmax, ev.p_absmax, 81)
            g = ev.fill_grid(spec, dp_orders=(1,))
            self._scales = {
                "W_max": float(np.max(np.abs(g["W"]))),
                "dWdp_max": float(np.max(np.abs(g["dWdp1"]))),
            }
        return self._scales

    @property
    def W_max(self) -> float:
        return self._grid_scales()["W_max"]

    @property
    def w_floor(self) -> float:
        return self.w_floor_rel * self.W_max

    # -- pointwise ------------------------------------------------------------

    def current(self, x: float, p: float, *, l_max: int | None = None,
                series_rtol: float | None = None) -> CurrentSample:
        """The full current sample at one phase-space point."""
        l_max = self.l_max if l_max is None else l_max
        rtol = self.series_rtol if series_rtol is None else series_rtol
        ev = self.evaluator
        depth = min(l_max, max(self._depth_guess, 1))
        ch = ev.point_channels(x, p, dp_orders=tuple(2 * l for l in range(1, depth + 1)))
        W = ch["W"]
        V1 = float(self.potential.deriv(x, 1))
        j_x = p * W / self.M
        j_p = -W * V1
        J_p = j_p
        terms_used = 0
        prev_small = False
        converged = True
        estimate = 0.0
        for l in range(1, l_max + 1):
            dpW = ch.get(f"dWdp{2 * l}")
            if dpW is None:
                dpW = ev.wigner_dp(x, p, 2 * l)
            term = -_series_coeff(l, self.hbar) * dpW \
                   * float(self.potential.deriv(x, 2 * l + 1))
            tol = rtol * max(abs(J_p), self.series_atol)
            small = abs(term) < tol
            if small and prev_small:
                estimate = abs(term)
                break
            J_p += term
            if term != 0.0:
                terms_used = l
            prev_small = small
            estimate = abs(term)
        else:
            converged = rtol == 0.0 or prev_small
        if terms_used > self._depth_guess - 2:
            self._depth_guess = min(self.l_max, terms_used + 2)
        return CurrentSample(J_x=j_x, J_p=J_p, j_x=j_x, j_p=j_p,
                             quantum_correction=J_p - j_p, terms_used=terms_used,
                             truncation_estimate=estimate, converged=converged)

    def current_vector(self, x: float, p: float) -> np.ndarray:
        s = self.current(x, p)
        return np.array([s.J_x, s.J_p])

    def div_J(self, x: float, p: float) -> float:
        """Term-analytic divergence d_x J_x + d_p J_p (zero for eigenstates)."""
        ev = self.evaluator
        depth = min(self.l_max, max(self._depth_guess, 1))
        ch = ev.point_channels(
            x, p, dp_orders=(1,) + tuple(2 * l + 1 for l in range(1, depth + 1)))
        V1 = float(self.potential.deriv(x, 1))
        out = (p / self.M) * ch["dWdx"] - ch["dWdp1"] * V1
        prev_small = False
        for l in range(1, self.l_max + 1):
            dpW = ch.get(f"dWdp{2 * l + 1}")
            if dpW is None:
                dpW = ev.wigner_dp(x, p, 2 * l + 1)
            term = -_series_coeff(l, self.hbar) * dpW \
                   * float(self.potential.deriv(x, 2 * l + 1))
            tol = self.series_rtol * max(abs(out), self.series_atol)
            small = abs(term) < tol
            if small and prev_small:
                break
            out += term
            prev_small = small
        return out

    def velocity(self, x: float, p: float) -> VelocitySample:
        """w = J/W; flagged singular near zeros of W instead of raising."""
        s = self.current(x, p)
        W = self.evaluator.wigner(x, p)
        if abs(W) <= self.w_floor:
            return VelocitySample(w_x=math.nan, w_p=math.nan, singular=True)
        return VelocitySample(w_x=s.J_x / W, w_p=s.J_p / W, singular=False)

    def div_w(self, x: float, p: float) -> tuple[float, bool]:
        """(W div J - J . grad W) / W^2, singular-flagged at zeros of W."""
        ch = self.evaluator.point_channels(x, p, dp_orders=(1,))
        W = ch["W"]
        if abs(W) <= self.w_floor:
            return math.nan, True
        s = self.current(x, p)
        dJ = self.div_J(x, p)
        val = (W * dJ - s.J_x * ch["dWdx"] - s.J_p * ch["dWdp1"]) / W**2
        return val, False

    def comoving_dWdt(self, x: float, p: float) -> tuple[float, bool, float]:
        """w . grad W for a stationary state, with the -W div w cross-check residual."""
        ch = self.evaluator.point_channels(x, p, dp_orders=(1,))
        W = ch["W"]
        if abs(W) <= self.w_floor:
            return math.nan, True, math.nan
        s = self.current(x, p)
        advective = (s.J_x * ch["dWdx"] + s.J_p * ch["dWdp1"]) / W
        dw, _ = self.div_w(x, p)
        residual = abs(advective + W * dw)
        return advective, False, residual

    # -- series depth estimate for grid fills ---------------------------------

    def probe_series_depth(self, spec: GridSpec, n_probes: int = 7) -> int:
        """Max terms_used over a probe set, used to size grid derivative orders."""
        xs = np.linspace(spec.x_min, spec.x_max, n_probes + 2)[1:-1]
        ps = np.linspace(spec.p_min, spec.p_max, n_probes + 2)[1:-1]
        depth = 1
        for x, p in zip(xs, ps):
            depth = max(depth, self.current(float(x), float(p)).terms_used)
        return depth


def fill_current_grid(ce: CurrentEvaluator, spec: GridSpec,
                      workers: int | None = None) -> PhaseGrid:
    """All current/velocity channels on a grid, via one batched quadrature fill.

    Channels: W, dWdx, dWdp1, J_x, J_p, j_x, j_p, quantum_correction, divJ,
    w_x, w_p, divw, dWdt, singular_mask, terms_used.
    """
    depth = min(ce.l_max, ce.probe_series_depth(spec) + 4)
    ev = ce.evaluator
    orders = tuple(range(1, 2 * depth + 2))
    grid = ev.fill_grid(spec, dp_orders=orders, workers=workers)
    x, p = spec.x, spec.p
    W = grid["W"]
    dWdx = grid["dWdx"]
    dWdp1 = grid["dWdp1"]
    V1 = np.asarray(ce.potential.deriv(x, 1))[:, None]

    J_x = (p[None, :] / ce.M) * W
    j_p = -W * V1
    J_p = j_p.copy()
    divJ = (p[None, :] / ce.M) * dWdx - dWdp1 * V1
    prev_small = True  # grids: single global stop once terms are uniformly tiny
    terms_used = 0
    for l in range(1, depth + 1):
        c = _series_coeff(l, ce.hbar)
        V_odd = np.asarray(ce.potential.deriv(x, 2 * l + 1))[:, None]
        term_J = -c * grid[f"dWdp{2 * l}"] * V_odd
        term_div = -c * grid[f"dWdp{2 * l + 1}"] * V_odd
        tol = ce.series_rtol * max(float(np.max(np.abs(J_p))), ce.series_atol)
        small = float(np.max(np.abs(term_J))) < tol
        if small and prev_small and ce.series_rtol > 0:
            break
        J_p += term_J
        divJ += term_div
        terms_used = l
        prev_small = small

    W_max = float(np.max(np.abs(W)))
    floor = ce.w_floor_rel * W_max
    singular = np.abs(W) <= floor
    with np.errstate(divide="ignore", invalid="ignore"):
        w_x = np.where(singular, np.nan, J_x / W)
        w_p = np.where(singular, np.nan, J_p / W)
        divw = np.where(singular, np.nan,
                        (W * divJ - J_x * dWdx - J_p * dWdp1) / W**2)
        dWdt = np.where(singular, np.nan, w_x * dWdx + w_p * dWdp1)

    grid.add("J_x", J_x)
    grid.add("J_p", J_p)
    grid.add("j_x", J_x.copy())
    grid.add("j_p", j_p)
    grid.add("quantum_correction", J_p - j_p)
    grid.add("divJ", divJ)
    grid.add("w_x", w_x)
    grid.add("w_p", w_p)
    grid.add("divw", divw)
    grid.add("dWdt", dWdt)
    grid.add("singular_mask", singular.astype(float))
    grid.add("terms_used", np.full_like(W, float(terms_used)))
    return grid
