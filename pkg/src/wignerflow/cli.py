"""Command-line harness: configuration, orchestration, bit-exact export.

Subcommands: spectrum, wigner-grid, current-grid, divergence-grid,
stagnation, fieldlines, contours, lee-scully, validate.

Exit codes: 0 ok, 2 config error, 3 accuracy/validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .current import CurrentEvaluator, fill_current_grid
from .eigenstates import (Eigenstate, MorseSpectrumParams, fd_diagonalize,
                          harmonic_state, morse_energy, morse_state)
from .errors import AccuracyError, ConfigError, WignerFlowError
from .lee_scully import ls_continuity_residual
from .potentials import HarmonicPotential, MorsePotential
from .topology import (FieldlineControls, default_seeds, extract_zero_contours,
                       find_stagnation_points, integrate_fieldline)
from .wigner import GridSpec, WignerEvaluator, worker_count


# -- model construction -------------------------------------------------------

def build_state(cfg: RunConfig) -> Eigenstate:
    s = cfg.system
    if s.potential == "morse":
        params = MorseSpectrumParams(MorsePotential(D=s.D, a=s.a, x0=s.x0),
                                     mass=s.M, hbar=s.hbar)
        return morse_state(params, cfg.n)
    return harmonic_state(s.M, s.omega, cfg.n, hbar=s.hbar)


def build_current_evaluator(cfg: RunConfig,
                            x_window: tuple[float, float] | None = None,
                            p_absmax: float | None = None) -> CurrentEvaluator:
    state = build_state(cfg)
    w = cfg.window
    if x_window is None:
        x_window = (w.x_min, w.x_max)
    if p_absmax is None:
        p_absmax = max(abs(w.p_min), abs(w.p_max))
    ev = WignerEvaluator(state, x_window, p_absmax,
                         tail_tol=cfg.quadrature.tail_tol,
                         nodes_per_panel=cfg.quadrature.nodes_per_panel,
                         k_max=2 * cfg.series.l_max + 1)
    return CurrentEvaluator(ev, state.potential, cfg.system.M, cfg.system.hbar,
                            l_max=cfg.series.l_max, series_rtol=cfg.series.rtol)


def grid_spec(cfg: RunConfig) -> GridSpec:
    w = cfg.window
    return GridSpec(w.x_min, w.x_max, w.n_x, w.p_min, w.p_max, w.n_p)


def support_window(state: Eigenstate, cut: float = 1e-9) -> tuple[float, float]:
    """Interval outside which |psi| < cut * max|psi|, found by scanning."""
    scale = 1.0
    x = np.linspace(-200.0, 200.0, 40001)
    amp = np.abs(state.psi(x))
    keep = np.where(amp > cut * amp.max())[0]
    lo, hi = x[keep[0]], x[keep[-1]]
    pad = 0.05 * (hi - lo) + scale
    return float(lo - pad), float(hi + pad)


# -- output writers -----------------------------------------------------------

def _meta_line(cfg: RunConfig) -> str:
    return f"# wignerflow {__version__} config_sha256={cfg.sha256}"


def write_grid_csv(path: str, grid, channels: list[str], cfg: RunConfig) -> None:
    """Row-major in x then p, 17 significant digits (bit-exact round-trip)."""
    nx, np_ = grid.spec.n_x, grid.spec.n_p
    cols = [np.repeat(grid.x, np_), np.tile(grid.p, nx)]
    cols += [np.asarray(grid[c]).ravel() for c in channels]
    data = np.column_stack(cols)
    header = _meta_line(cfg) + "\nx,p," + ",".join(channels)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", comments="",
               header=header)


def write_json(path: str, payload: dict, cfg: RunConfig) -> None:
    payload = {"tool": f"wignerflow {__version__}", "config_sha256": cfg.sha256,
               **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


# -- subcommands --------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, out: str) -> int:
    s = cfg.system
    rows = []
    if s.potential == "morse":
        pot = MorsePotential(D=s.D, a=s.a, x0=s.x0)
        params = MorseSpectrumParams(pot, mass=s.M, hbar=s.hbar)
        span = 1.0 / s.a
        fd = fd_diagonalize(pot, s.M, s.hbar, s.x0 - 2.05 * span,
                            s.x0 + 24.5 * span, 4096, n_states=params.n_max + 2)
        for n in range(params.n_max + 1):
            e_cf = morse_energy(params, n)
            rows.append((n, e_cf, float(fd.energies[n]), abs(e_cf - fd.energies[n])))
    else:
        pot = HarmonicPotential(M=s.M, omega=s.omega)
        span = math.sqrt(s.hbar / (s.M * s.omega))
        fd = fd_diagonalize(pot, s.M, s.hbar, -14.0 * span, 14.0 * span, 4096,
                            n_states=max(8, cfg.n + 2))
        for n in range(max(8, cfg.n + 1)):
            e_cf = s.hbar * s.omega * (n + 0.5)
            rows.append((n, e_cf, float(fd.energies[n]), abs(e_cf - fd.energies[n])))
    print(f"{'n':>3} {'E_closed_form':>22} {'E_oracle':>22} {'|delta|':>12}")
    for n, e1, e2, d in rows:
        print(f"{n:>3} {e1:>22.15g} {e2:>22.15g} {d:>12.3e}")
    path = os.path.join(out, "spectrum.csv")
    with open(path, "w") as fh:
        fh.write(_meta_line(cfg) + "\nn,E_closed_form,E_oracle,abs_delta\n")
        for n, e1, e2, d in rows:
            fh.write(f"{n},{e1:.17g},{e2:.17g},{d:.17g}\n")
    return 0


def cmd_wigner_grid(cfg: RunConfig, out: str) -> int:
    ce = build_current_evaluator(cfg)
    grid = ce.evaluator.fill_grid(grid_spec(cfg), dp_orders=(1, 2, 3),
                                  workers=worker_count())
    write_grid_csv(os.path.join(out, "wigner_grid.csv"), grid,
                   ["W", "dWdx", "dWdp1", "dWdp2", "dWdp3"], cfg)
    return 0


def cmd_current_grid(cfg: RunConfig, out: str) -> int:
    ce = build_current_evaluator(cfg)
    grid = fill_current_grid(ce, grid_spec(cfg), workers=worker_count())
    write_grid_csv(os.path.join(out, "current_grid.csv"), grid,
                   ["W", "J_x", "J_p", "j_x", "j_p", "quantum_correction",
                    "terms_used"], cfg)
    return 0


def cmd_divergence_grid(cfg: RunConfig, out: str) -> int:
    ce = build_current_evaluator(cfg)
    grid = fill_current_grid(ce, grid_spec(cfg), workers=worker_count())
    write_grid_csv(os.path.join(out, "divergence_grid.csv"), grid,
                   ["W", "divJ", "w_x", "w_p", "divw", "dWdt",
                    "singular_mask"], cfg)
    return 0


def cmd_stagnation(cfg: RunConfig, out: str) -> int:
    ce = build_current_evaluator(cfg)
    w = cfg.window
    pts = find_stagnation_points(ce, (w.x_min, w.x_max, w.p_min, w.p_max),
                                 coarse_n=cfg.topology.coarse_n,
                                 winding_samples=cfg.topology.winding_samples)
    payload = {"points": [
        {"x": q.x, "p": q.p, "index": q.index,
         "winding_residual": q.winding_residual,
         "converged": q.refinement_converged}
        for q in pts]}
    write_json(os.path.join(out, "stagnation.json"), payload, cfg)
    return 0


def cmd_fieldlines(cfg: RunConfig, out: str) -> int:
    ce = build_current_evaluator(cfg)
    w = cfg.window
    window = (w.x_min, w.x_max, w.p_min, w.p_max)
    fl_cfg = cfg.fieldlines
    controls = FieldlineControls(rtol=fl_cfg.rtol, atol=fl_cfg.atol,
                                 max_step=fl_cfg.max_step,
                                 max_steps=fl_cfg.max_steps)
    seeds = default_seeds(window, fl_cfg.seed_policy,
                          n_boundary=fl_cfg.n_boundary, n_axis=fl_cfg.n_axis)
    lines = []
    for seed in seeds:
        if np.hypot(*ce.current_vector(*seed)) == 0.0:
            continue
        lines.append(integrate_fieldline(ce, seed, window, controls=controls))
    csv_path = os.path.join(out, "fieldlines.csv")
    with open(csv_path, "w") as fh:
        fh.write(_meta_line(cfg) + "\nfieldline_id,vertex_index,x,p,W,arc_length\n")
        for fid, line in enumerate(lines):
            arc = 0.0
            prev = None
            for vid, (vx, vp) in enumerate(line.vertices):
                if prev is not None:
                    arc += math.hypot(vx - prev[0], vp - prev[1])
                prev = (vx, vp)
                fh.write(f"{fid},{vid},{vx:.17g},{vp:.17g},"
                         f"{line.W_along[vid]:.17g},{arc:.17g}\n")
    meta = {"fieldlines": [
        {"id": fid, "seed": list(line.seed), "termination": line.termination,
         "arc_length": line.arc_length,
         "crossings": [list(c) for c in line.crossings]}
        for fid, line in enumerate(lines)]}
    write_json(os.path.join(out, "fieldlines_meta.json"), meta, cfg)
    return 0


def cmd_contours(cfg: RunConfig, out: str) -> int:
    ce = build_current_evaluator(cfg)
    grid = fill_current_grid(ce, grid_spec(cfg), workers=worker_count())
    path = os.path.join(out, "contours.csv")
    with open(path, "w") as fh:
        fh.write(_meta_line(cfg) + "\nchannel,polyline_id,vertex_index,x,p\n")
        for channel in ("J_x", "J_p", "W"):
            cs = extract_zero_contours(grid, channel)
            for pid, poly in enumerate(cs.polylines):
                for vid, (vx, vp) in enumerate(poly):
                    fh.write(f"{channel},{pid},{vid},{vx:.17g},{vp:.17g}\n")
    return 0


def cmd_lee_scully(cfg: RunConfig, out: str) -> int:
    ce = build_current_evaluator(cfg)
    grid = fill_current_grid(ce, grid_spec(cfg), workers=worker_count())
    report = ls_continuity_residual(ce, grid)
    grid.add("ls_residual", report.residual)
    write_grid_csv(os.path.join(out, "lee_scully_residual.csv"), grid,
                   ["ls_residual"], cfg)
    write_json(os.path.join(out, "lee_scully.json"), {
        "R_max": report.R_max, "R_l2": report.R_l2,
        "baseline_max": report.baseline_max, "baseline_l2": report.baseline_l2,
        "masked_fraction": report.masked_fraction,
        "scale_dpJp": report.scale, "h": list(report.h),
    }, cfg)
    return 0


# -- validate -----------------------------------------------------------------

def run_validation(cfg: RunConfig) -> list[dict]:
    """The invariant suite: each entry is {check, value, tolerance, passed}."""
    checks: list[dict] = []

    def add(name: str, value: float, tol: float, smaller: bool = True):
        ok = value < tol if smaller else value > tol
        checks.append({"check": name, "value": float(value),
                       "tolerance": float(tol), "passed": bool(ok)})

    state = build_state(cfg)
    lo, hi = support_window(state)
    p_wide = max(6.0 / math.sqrt(cfg.system.hbar), 2.0 * max(abs(cfg.window.p_min),
                                                             abs(cfg.window.p_max)))
    ce = build_current_evaluator(cfg, x_window=(lo, hi), p_absmax=p_wide)
    ev = ce.evaluator
    wide = GridSpec(lo, hi, 241, -p_wide, p_wide, 241)
    grid = ev.fill_grid(wide, dp_orders=(1,), workers=worker_count())
    W = grid["W"]

    norm = np.trapezoid(np.trapezoid(W, grid.p, axis=1), grid.x)
    add("normalization |1 - integral W|", abs(norm - 1.0), 1e-6)

    marg = np.trapezoid(W, grid.p, axis=1)
    add("marginal max |int W dp - psi^2|",
        float(np.max(np.abs(marg - state.psi(grid.x) ** 2))), 1e-6)

    half = W[:, ::-1]
    add("p-parity max |W(x,p) - W(x,-p)|", float(np.max(np.abs(W - half))), 1e-10)

    cg = fill_current_grid(ce, grid_spec(cfg), workers=worker_count())
    w_max = float(np.max(np.abs(cg["W"])))
    add("stationarity max |div J| / W_max",
        float(np.max(np.abs(cg["divJ"]))) / w_max, 1e-6)

    rng = np.random.default_rng(20240817)
    xs = rng.uniform(cfg.window.x_min, cfg.window.x_max, 20)
    ps = rng.uniform(cfg.window.p_min, cfg.window.p_max, 20)
    rel = 0.0
    for x, p in zip(xs, ps):
        a = ce.current(float(x), float(p))
        b = ce.current(float(x), float(p), l_max=min(40, ev.k_max // 2),
                       series_rtol=0.0)
        rel = max(rel, abs(a.J_p - b.J_p) / max(abs(b.J_p), 1e-300))
    add("series truncation max rel dev vs blind sum", rel, 1e-8)

    if cfg.system.potential == "harmonic":
        add("harmonic quantum correction max",
            float(np.max(np.abs(cg["quantum_correction"]))), 1e-12)
        add("harmonic max |div w|", float(np.nanmax(np.abs(cg["divw"]))), 1e-7)
    else:
        pot = MorsePotential(D=cfg.system.D, a=cfg.system.a, x0=cfg.system.x0)
        params = MorseSpectrumParams(pot, mass=cfg.system.M, hbar=cfg.system.hbar)
        span = 1.0 / cfg.system.a
        fd = fd_diagonalize(pot, cfg.system.M, cfg.system.hbar,
                            cfg.system.x0 - 2.05 * span, cfg.system.x0 + 24.5 * span,
                            4096, n_states=params.n_max + 1)
        diff = max(abs(morse_energy(params, n) - float(fd.energies[n]))
                   for n in range(params.n_max + 1))
        add("spectrum max |closed form - oracle|", diff, 1e-5)
    return checks


def cmd_validate(cfg: RunConfig, out: str) -> int:
    checks = run_validation(cfg)
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['check']}: {c['value']:.3e} (tol {c['tolerance']:.0e})")
    write_json(os.path.join(out, "validate_report.json"),
               {"checks": checks, "all_passed": all(c["passed"] for c in checks)},
               cfg)
    if not all(c["passed"] for c in checks):
        print("validation FAILED", file=sys.stderr)
        return 3
    return 0


# -- entry point --------------------------------------------------------------

_COMMANDS = {
    "spectrum": cmd_spectrum,
    "wigner-grid": cmd_wigner_grid,
    "current-grid": cmd_current_grid,
    "divergence-grid": cmd_divergence_grid,
    "stagnation": cmd_stagnation,
    "fieldlines": cmd_fieldlines,
    "contours": cmd_contours,
    "lee-scully": cmd_lee_scully,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="wignerflow",
                                     description="Wigner phase-space current toolkit")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="YAML config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--state", type=int, default=None, help="quantum number n")
    parser.add_argument("--window", default=None, help="X0:X1:NX,P0:P1:NP")
    parser.add_argument("--lmax", type=int, default=None, help="series truncation cap")
    parser.add_argument("--seed-policy", default=None,
                        choices=["boundary", "axis", "both"])
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, overrides={
            "n": args.state, "out_dir": args.out, "l_max": args.lmax,
            "seed_policy": args.seed_policy, "window": args.window,
        })
    except ConfigError as exc:
        json.dump({"error": "config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2

    os.makedirs(cfg.out_dir, exist_ok=True)
    try:
        return _COMMANDS[args.command](cfg, cfg.out_dir)
    except AccuracyError as exc:
        json.dump({"error": "accuracy", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    except WignerFlowError as exc:
        json.dump({"error": "config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
