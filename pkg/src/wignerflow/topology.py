"""Topology of the phase-space current: stagnation points, winding indices,
zero contours and integrated fieldlines.

Fieldlines integrate the unit-normalized field J/||J||: near stagnation
points the raw field stalls, while unit speed gives uniform geometric
resolution.  Fieldline geometry is unchanged by positive rescaling of J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from .current import CurrentEvaluator, fill_current_grid
from .errors import DomainError
from .wigner import GridSpec, PhaseGrid

__all__ = [
    "StagnationPoint",
    "Fieldline",
    "FieldlineControls",
    "ContourSet",
    "find_stagnation_points",
    "winding_index",
    "topological_charge",
    "integrate_fieldline",
    "extract_zero_contours",
    "equi_wigner_deviation",
    "default_seeds",
]


@dataclass(frozen=True)
class StagnationPoint:
    x: float
    p: float
    index: int
    winding_residual: float
    refinement_converged: bool
    multi_degenerate: bool = False
    ill_conditioned: bool = False


@dataclass
class Fieldline:
    seed: tuple[float, float]
    vertices: np.ndarray            # (n, 2) polyline
    W_along: np.ndarray             # (n,)
    arc_length: float
    termination: str                # closed | left-window | step-limit | stagnation-capture
    crossings: list = field(default_factory=list)  # (x, p) where sign(W) flips


@dataclass(frozen=True)
class FieldlineControls:
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = 0.05
    max_steps: int = 20000
    eps_close: float = 5e-3
    min_arc: float = 0.5


@dataclass
class ContourSet:
    channel: str
    polylines: list  # list of (n, 2) arrays


def _field_fn(field_obj):
    """Accept a CurrentEvaluator or a plain callable (x, p) -> (J_x, J_p)."""
    if isinstance(field_obj, CurrentEvaluator):
        return lambda x, p: field_obj.current_vector(x, p)
    return lambda x, p: np.asarray(field_obj(x, p), dtype=float)


def _winding_raw(field_obj, points: np.ndarray) -> tuple[float, bool]:
    """Summed wrapped angle increments of J along a closed sample loop."""
    fn = _field_fn(field_obj)
    J = np.array([fn(float(q[0]), float(q[1])) for q in points])
    mag = np.hypot(J[:, 0], J[:, 1])
    ill = bool(np.min(mag) < 1e-14 * np.max(mag))
    theta = np.arctan2(J[:, 1], J[:, 0])
    dtheta = np.diff(np.concatenate([theta, theta[:1]]))
    dtheta = (dtheta + math.pi) % (2.0 * math.pi) - math.pi
    return float(np.sum(dtheta) / (2.0 * math.pi)), ill


def winding_index(field_obj, center: tuple[float, float], radius: float,
                  samples: int = 128) -> tuple[float, int, bool]:
    """Raw winding of J on a circle and its nearest integer.

    Returns (raw, index, ill_conditioned).
    """
    if samples < 64:
        raise DomainError("winding_index needs at least 64 samples")
    ang = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    pts = np.column_stack([center[0] + radius * np.cos(ang),
                           center[1] + radius * np.sin(ang)])
    raw, ill = _winding_raw(field_obj, pts)
    return raw, int(round(raw)), ill


def topological_charge(field_obj, window: tuple[float, float, float, float],
                       samples: int = 400) -> int:
    """Winding of J along the rectangular window boundary."""
    x0, x1, p0, p1 = window
    per_side = max(16, samples // 4)
    tx = np.linspace(x0, x1, per_side, endpoint=False)
    tp = np.linspace(p0, p1, per_side, endpoint=False)
    # counterclockwise rectangle
    top = np.column_stack([np.linspace(x1, x0, per_side, endpoint=False),
                           np.full(per_side, p1)])
    left = np.column_stack([np.full(per_side, x0),
                            np.linspace(p1, p0, per_side, endpoint=False)])
    pts = np.concatenate([
        np.column_stack([tx, np.full(per_side, p0)]),
        np.column_stack([np.full(per_side, x1), tp]),
        top,
        left,
    ])
    raw, ill = _winding_raw(field_obj, pts)
    if ill:
        raise DomainError("window boundary passes too close to a stagnation point")
    return int(round(raw))


def _newton_refine(fn, x: float, p: float, step: float,
                   j_scale: float, max_iter: int = 50) -> tuple[float, float, bool]:
    """2D Newton on J with a central-difference Jacobian."""
    for _ in range(max_iter):
        F = fn(x, p)
        if np.hypot(*F) < 1e-11 * j_scale:
            return x, p, True
        Jac = np.empty((2, 2))
        Jac[:, 0] = (fn(x + step, p) - fn(x - step, p)) / (2.0 * step)
        Jac[:, 1] = (fn(x, p + step) - fn(x, p - step)) / (2.0 * step)
        try:
            delta = np.linalg.solve(Jac, -F)
        except np.linalg.LinAlgError:
            return x, p, False
        if not np.all(np.isfinite(delta)):
            return x, p, False
        nd = np.hypot(*delta)
        if nd > 10.0 * step:
            delta *= 10.0 * step / nd
        x, p = x + delta[0], p + delta[1]
        if nd < 1e-12 * max(1.0, abs(x), abs(p)):
            return x, p, np.hypot(*fn(x, p)) < 1e-10 * j_scale
    return x, p, np.hypot(*fn(x, p)) < 1e-10 * j_scale


def find_stagnation_points(ce: CurrentEvaluator,
                           window: tuple[float, float, float, float],
                           coarse_n: int = 96,
                           winding_samples: int = 128,
                           grid: PhaseGrid | None = None) -> list[StagnationPoint]:
    """Locate zeros of J inside the window and attach winding indices.

    A coarse grid flags cells where both components change sign; each
    flagged cell seeds a Newton refinement.  Zero curves of W (where J
    vanishes identically) are rejected by the ill-conditioned winding test.
    """
    if coarse_n < 64:
        raise DomainError("coarse_n must be >= 64")
    x0, x1, p0, p1 = window
    if grid is None:
        spec = GridSpec(x0, x1, coarse_n, p0, p1, coarse_n)
        grid = fill_current_grid(ce, spec)
    Jx, Jp = grid["J_x"], grid["J_p"]
    j_scale = float(np.max(np.hypot(Jx, Jp)))

    def cell_flips(F):
        c = np.stack([F[:-1, :-1], F[1:, :-1], F[1:, 1:], F[:-1, 1:]])
        return np.logical_and(np.min(c, axis=0) < 0.0, np.max(c, axis=0) > 0.0)

    flagged = cell_flips(Jx) & cell_flips(Jp)
    # drop cells where J is pure quadrature noise (deep tails)
    mag = np.hypot(Jx, Jp)
    cell_mag = np.stack([mag[:-1, :-1], mag[1:, :-1], mag[1:, 1:], mag[:-1, 1:]]).max(axis=0)
    flagged &= cell_mag > 1e-9 * j_scale
    xg, pg = grid.x, grid.p
    dx_cell = xg[1] - xg[0]
    dp_cell = pg[1] - pg[0]
    fn = lambda x, p: ce.current_vector(x, p)
    step = min(dx_cell, dp_cell) / 8.0

    eps_dup = 2.0 * max(dx_cell, dp_cell)
    candidates: list[tuple[float, float, bool]] = []
    for i, j in np.argwhere(flagged):
        # linearize J over the cell; seed Newton only if the linear zero
        # falls inside (bands where the two zero curves pass without
        # intersecting are rejected here)
        F0 = np.array([Jx[i, j], Jp[i, j]])
        A = np.array([
            [(Jx[i + 1, j] - Jx[i, j]) / dx_cell, (Jx[i, j + 1] - Jx[i, j]) / dp_cell],
            [(Jp[i + 1, j] - Jp[i, j]) / dx_cell, (Jp[i, j + 1] - Jp[i, j]) / dp_cell],
        ])
        try:
            d = np.linalg.solve(A, -F0)
        except np.linalg.LinAlgError:
            continue
        if not (-0.3 * dx_cell <= d[0] <= 1.3 * dx_cell
                and -0.3 * dp_cell <= d[1] <= 1.3 * dp_cell):
            continue
        cx, cp = xg[i] + d[0], pg[j] + d[1]
        if any(np.hypot(cx - qx, cp - qp) < eps_dup for qx, qp, _ in candidates):
            continue
        rx, rp, ok = _newton_refine(fn, float(cx), float(cp), step, j_scale)
        if not (x0 - dx_cell <= rx <= x1 + dx_cell and p0 - dp_cell <= rp <= p1 + dp_cell):
            continue
        if any(np.hypot(rx - qx, rp - qp) < eps_dup for qx, qp, _ in candidates):
            continue
        candidates.append((rx, rp, ok))

    points: list[StagnationPoint] = []
    base_radius = 4.0 * min(dx_cell, dp_cell)
    for rx, rp, ok in candidates:
        radius = base_radius
        others = [(qx, qp) for qx, qp, _ in candidates if (qx, qp) != (rx, rp)]
        if others:
            nearest = min(np.hypot(rx - qx, rp - qp) for qx, qp in others)
            while radius * 2.0 > nearest and radius > 0.25 * min(dx_cell, dp_cell):
                radius *= 0.5
        raw, idx, ill = winding_index(ce, (rx, rp), radius, winding_samples)
        points.append(StagnationPoint(
            x=rx, p=rp, index=idx, winding_residual=abs(raw - idx),
            refinement_converged=ok,
            multi_degenerate=abs(idx) > 1,
            ill_conditioned=ill,
        ))
    return points


def integrate_fieldline(ce: CurrentEvaluator, seed: tuple[float, float],
                        window: tuple[float, float, float, float],
                        direction: int = 1,
                        controls: FieldlineControls = FieldlineControls()) -> Fieldline:
    """Integrate dr/ds = J/||J|| from seed with an adaptive embedded RK pair.

    Records W at every accepted step and bisects W sign changes into
    crossing events.  Terminates on closure, window exit, step budget
    or collapse of ||J|| near a stagnation point.
    """
    x0, x1, p0, p1 = window
    stall = 1e-10 * float(np.hypot(*ce.current_vector(
        0.5 * (x0 + x1), 0.5 * (p0 + p1))) + 1e-300)
    J0 = ce.current_vector(*seed)
    n0 = np.hypot(*J0)
    if n0 < stall or n0 == 0.0:
        return Fieldline(seed=seed, vertices=np.array([seed]),
                         W_along=np.array([ce.evaluator.wigner(*seed)]),
                         arc_length=0.0, termination="stagnation-capture")

    def rhs(_s, r):
        J = ce.current_vector(r[0], r[1])
        n = np.hypot(*J)
        if n == 0.0:
            return np.zeros(2)
        return direction * J / n

    heading0 = rhs(0.0, np.asarray(seed, dtype=float))
    solver = RK45(rhs, 0.0, np.asarray(seed, dtype=float), t_bound=np.inf,
                  max_step=controls.max_step, rtol=controls.rtol, atol=controls.atol)
    verts = [np.asarray(seed, dtype=float)]
    Ws = [ce.evaluator.wigner(*seed)]
    crossings = []
    termination = "step-limit"
    for _ in range(controls.max_steps):
        try:
            solver.step()
        except Exception:
            termination = "stagnation-capture"
            break
        if solver.status != "running":
            termination = "stagnation-capture"
            break
        r = solver.y.copy()
        W = ce.evaluator.wigner(r[0], r[1])
        r_prev, W_prev = verts[-1], Ws[-1]
        if W_prev != 0.0 and W != 0.0 and np.sign(W) != np.sign(W_prev):
            a, b = r_prev, r
            Wa = W_prev
            for _ in range(60):
                m = 0.5 * (a + b)
                Wm = ce.evaluator.wigner(m[0], m[1])
                if Wm == 0.0:
                    break
                if np.sign(Wm) == np.sign(Wa):
                    a, Wa = m, Wm
                else:
                    b = m
            crossings.append((float(0.5 * (a[0] + b[0])), float(0.5 * (a[1] + b[1]))))
        verts.append(r)
        Ws.append(W)
        if not (x0 <= r[0] <= x1 and p0 <= r[1] <= p1):
            termination = "left-window"
            break
        if np.hypot(*ce.current_vector(r[0], r[1])) < stall:
            termination = "stagnation-capture"
            break
        if solver.t > controls.min_arc:
            # closest approach of the accepted segment to the seed
            seg = r - r_prev
            L2 = float(seg @ seg)
            t = float(np.clip((np.asarray(seed) - r_prev) @ seg / L2, 0.0, 1.0)) if L2 > 0 else 0.0
            closest = r_prev + t * seg
            if np.hypot(*(closest - seed)) < controls.eps_close:
                if np.dot(rhs(0.0, r), heading0) > 0.0:
                    termination = "closed"
                    break
    vertices = np.array(verts)
    seg = np.diff(vertices, axis=0)
    arc = float(np.sum(np.hypot(seg[:, 0], seg[:, 1]))) if len(verts) > 1 else 0.0
    return Fieldline(seed=tuple(map(float, seed)), vertices=vertices,
                     W_along=np.array(Ws), arc_length=arc,
                     termination=termination, crossings=crossings)


def equi_wigner_deviation(ce: CurrentEvaluator, line: Fieldline) -> dict:
    """Max |W_along - W(seed)| / W_max plus crossing count.

    Quantifies how far a J-fieldline is from an equi-Wigner contour.
    """
    if len(line.vertices) < 10:
        raise DomainError("fieldline must have at least 10 vertices")
    W_seed = line.W_along[0]
    dev = float(np.max(np.abs(line.W_along - W_seed)) / ce.W_max)
    return {"deviation": dev, "crossings": len(line.crossings),
            "termination": line.termination, "arc_length": line.arc_length}


def default_seeds(window: tuple[float, float, float, float],
                  policy: str = "both", n_boundary: int = 16,
                  n_axis: int = 9) -> list[tuple[float, float]]:
    """Seed policy: uniform fan on the window boundary and/or seeds along p = 0."""
    if policy not in ("boundary", "axis", "both"):
        raise DomainError(f"unknown seed policy {policy!r}")
    x0, x1, p0, p1 = window
    seeds = []
    if policy in ("boundary", "both"):
        t = np.linspace(0.05, 0.95, max(1, n_boundary // 4))
        for ti in t:
            seeds += [(x0 + ti * (x1 - x0), p0), (x0 + ti * (x1 - x0), p1),
                      (x0, p0 + ti * (p1 - p0)), (x1, p0 + ti * (p1 - p0))]
    if policy in ("axis", "both"):
        for xi in np.linspace(x0 + 0.1 * (x1 - x0), x1 - 0.1 * (x1 - x0), n_axis):
            seeds.append((float(xi), 0.0))
    return seeds


# -- marching squares ---------------------------------------------------------

def extract_zero_contours(grid: PhaseGrid, channel: str) -> ContourSet:
    """Zero level-set polylines of a grid channel by marching squares.

    Linear interpolation along cell edges; ambiguous saddle cells are
    resolved by the sign of the cell average.
    """
    if channel not in grid:
        raise DomainError(f"channel {channel!r} not present in grid")
    F = grid[channel]
    xg, pg = grid.x, grid.p
    nx, np_ = F.shape

    def interp(v0, v1, c0, c1):
        if v1 == v0:
            return 0.5 * (c0 + c1)
        t = v0 / (v0 - v1)
        return c0 + t * (c1 - c0)

    segments = []
    for i in range(nx - 1):
        for j in range(np_ - 1):
            v = (F[i, j], F[i + 1, j], F[i + 1, j + 1], F[i, j + 1])
            code = sum(1 << m for m in range(4) if v[m] > 0.0)
            if code in (0, 15):
                continue
            # edge midzero points: bottom (j), right (i+1), top (j+1), left (i)
            pts = {}
            if (v[0] > 0.0) != (v[1] > 0.0):
                pts["b"] = (interp(v[0], v[1], xg[i], xg[i + 1]), pg[j])
            if (v[1] > 0.0) != (v[2] > 0.0):
                pts["r"] = (xg[i + 1], interp(v[1], v[2], pg[j], pg[j + 1]))
            if (v[3] > 0.0) != (v[2] > 0.0):
                pts["t"] = (interp(v[3], v[2], xg[i], xg[i + 1]), pg[j + 1])
            if (v[0] > 0.0) != (v[3] > 0.0):
                pts["l"] = (xg[i], interp(v[0], v[3], pg[j], pg[j + 1]))
            keys = sorted(pts)
            if len(keys) == 2:
                segments.append((pts[keys[0]], pts[keys[1]]))
            elif len(keys) == 4:
                # saddle cell: pair edges by the sign of the cell average
                avg = 0.25 * sum(v)
                corner_pos = v[0] > 0.0
                if (avg > 0.0) == corner_pos:
                    segments.append((pts["b"], pts["l"]))
                    segments.append((pts["t"], pts["r"]))
                else:
                    segments.append((pts["b"], pts["r"]))
                    segments.append((pts["t"], pts["l"]))

    return ContourSet(channel=channel, polylines=_join_segments(segments))


def _join_segments(segments: list) -> list:
    """Chain raw segments into ordered polylines by shared endpoints."""
    def key(pt):
        return (round(pt[0], 9), round(pt[1], 9))

    adj: dict = {}
    used = [False] * len(segments)
    for idx, (a, b) in enumerate(segments):
        adj.setdefault(key(a), []).append((idx, b))
        adj.setdefault(key(b), []).append((idx, a))

    polylines = []
    for start in range(len(segments)):
        if used[start]:
            continue
        a, b = segments[start]
        used[start] = True
        chain = [a, b]
        for endpoint_side in (1, 0):
            while True:
                tip = chain[-1] if endpoint_side == 1 else chain[0]
                nxt = None
                for idx, other in adj.get(key(tip), []):
                    if not used[idx]:
                        nxt = (idx, other)
                        break
                if nxt is None:
                    break
                used[nxt[0]] = True
                if endpoint_side == 1:
                    chain.append(nxt[1])
                else:
                    chain.insert(0, nxt[1])
        polylines.append(np.array(chain, dtype=float))
    return polylines
