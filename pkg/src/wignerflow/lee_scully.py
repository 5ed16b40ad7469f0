"""The effective-potential velocity decomposition u_p = J_p / d_pW and its failure.

This is the rival construction the package quantitatively refutes: the
x-component is kept classical (u_x = p/M) while the p-component divides
the current by d_pW instead of W.  Feeding W*u back into the continuity
equation does not reproduce the evolution of W, and u . grad W does not
vanish, so the "equi-Wigner trajectory" picture breaks down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .current import CurrentEvaluator
from .errors import AccuracyError, DomainError
from .wigner import PhaseGrid

__all__ = ["LSVelocitySample", "LSResidualReport", "ls_velocity",
           "ls_continuity_residual", "ls_equi_wigner_test"]


@dataclass(frozen=True)
class LSVelocitySample:
    u_x: float
    u_p: float
    singular: bool

    @property
    def V_eff_gradient(self) -> float:
        return self.u_p


@dataclass
class LSResidualReport:
    residual: np.ndarray      # masked cells are NaN
    R_max: float
    R_l2: float
    baseline_max: float       # same norms for the true div J
    baseline_l2: float
    masked_fraction: float
    scale: float              # max |d_p J_p| (finite differences)
    h: tuple[float, float]    # (dx, dp) of the differencing grid


def ls_velocity(ce: CurrentEvaluator, x: float, p: float,
                floor_rel: float = 1e-10) -> LSVelocitySample:
    """u = (p/M, J_p / d_pW), singular-flagged where d_pW ~ 0."""
    dpW = ce.evaluator.wigner_dp(x, p, 1)
    floor = floor_rel * ce._grid_scales()["dWdp_max"]
    u_x = p / ce.M
    if abs(dpW) <= floor:
        return LSVelocitySample(u_x=u_x, u_p=math.nan, singular=True)
    s = ce.current(x, p)
    return LSVelocitySample(u_x=u_x, u_p=s.J_p / dpW, singular=False)


def ls_continuity_residual(ce: CurrentEvaluator, grid: PhaseGrid,
                           floor_rel: float = 1e-10) -> LSResidualReport:
    """R = div(W u) by central differences of the product field.

    Cells where d_pW is near zero (and their differencing neighbours) are
    masked.  The true div J norms over the same cells are reported as the
    fairness baseline.
    """
    for name in ("W", "J_x", "J_p", "dWdp1", "divJ"):
        if name not in grid:
            raise DomainError(f"grid lacks channel {name!r}; fill the current grid first")
    W = grid["W"]
    J_x = grid["J_x"]
    J_p = grid["J_p"]
    dpW = grid["dWdp1"]
    dx, dp = grid.spec.dx, grid.spec.dp

    floor = floor_rel * float(np.max(np.abs(dpW)))
    singular = np.abs(dpW) <= floor
    with np.errstate(divide="ignore", invalid="ignore"):
        Wu_p = W * J_p / dpW
    Wu_p[singular] = np.nan
    # W u_x = J_x identically
    dJx_dx = np.gradient(J_x, dx, axis=0)
    dWup_dp = np.gradient(Wu_p, dp, axis=1)
    R = dJx_dx + dWup_dp
    # differencing pulls NaNs one cell outward; crop the frame as well
    R[:, 0] = R[:, -1] = np.nan
    R[0, :] = R[-1, :] = np.nan
    valid = np.isfinite(R)
    masked_fraction = 1.0 - float(np.count_nonzero(valid)) / R.size
    if masked_fraction > 0.5:
        raise AccuracyError(
            f"{masked_fraction:.0%} of cells are singular; grid too coarse for the residual"
        )
    Rv = R[valid]
    base = grid["divJ"][valid]
    scale = float(np.max(np.abs(np.gradient(J_p, dp, axis=1))))
    return LSResidualReport(
        residual=R,
        R_max=float(np.max(np.abs(Rv))),
        R_l2=float(np.sqrt(np.mean(Rv**2))),
        baseline_max=float(np.max(np.abs(base))),
        baseline_l2=float(np.sqrt(np.mean(base**2))),
        masked_fraction=masked_fraction,
        scale=scale,
        h=(dx, dp),
    )


def ls_equi_wigner_test(ce: CurrentEvaluator, probes, grid: PhaseGrid) -> dict:
    """u . grad W = (p/M) d_xW + J_p at probe points, normalized by grid scale.

    A nonzero value falsifies the claim that the construction transports
    points along level sets of W.
    """
    scale = float(np.max(np.abs(grid["J_p"])))
    values = []
    for x, p in probes:
        ch = ce.evaluator.point_channels(x, p)
        s = ce.current(x, p)
        values.append((p / ce.M) * ch["dWdx"] + s.J_p)
    values = np.asarray(values)
    return {
        "values": values,
        "max_normalized": float(np.max(np.abs(values)) / scale),
        "scale": scale,
    }
