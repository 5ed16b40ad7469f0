"""Fixtures drive the wignerflow CLI once per session to produce real
artifact directories; the renderers are tested against those files only."""

import subprocess
import sys

import pytest

COMMANDS = ["current-grid", "divergence-grid", "stagnation", "contours",
            "fieldlines"]


def _run_cli(args):
    proc = subprocess.run([sys.executable, "-m", "wignerflow.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def morse_artifacts(tmp_path_factory):
    out = tmp_path_factory.mktemp("morse_run")
    for cmd in COMMANDS:
        _run_cli([cmd, "--window=-3:6:81,-3:3:81", "--seed-policy", "axis",
                  "--out", str(out)])
    return str(out)


@pytest.fixture(scope="session")
def harmonic_artifacts(tmp_path_factory):
    out = tmp_path_factory.mktemp("harm_run")
    cfg = out / "harm.yaml"
    cfg.write_text(
        "system:\n  potential: harmonic\n"
        "state:\n  n: 0\n"
        "window:\n  x_min: -2.5\n  x_max: 2.5\n  n_x: 61\n"
        "  p_min: -2.5\n  p_max: 2.5\n  n_p: 61\n"
        "fieldlines:\n  n_axis: 3\n  n_boundary: 4\n"
    )
    for cmd in COMMANDS:
        _run_cli([cmd, "--config", str(cfg), "--out", str(out)])
    return str(out)
