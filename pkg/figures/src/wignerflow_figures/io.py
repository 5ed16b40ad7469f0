"""Readers for the documented wignerflow CSV/JSON artifact schemas.

This package never recomputes physics: everything plotted comes from these
files.  Grid CSVs are row-major in x then p with a `x,p,<channel>...` header
line preceded by one `#` metadata line.
"""

from __future__ import annotations

import json
import os

import numpy as np


class MissingInputError(FileNotFoundError):
    """An expected artifact file is absent from the input directory."""


def _require(indir: str, name: str) -> str:
    path = os.path.join(indir, name)
    if not os.path.exists(path):
        raise MissingInputError(f"missing input file: {path}")
    return path


def read_grid_csv(indir: str, name: str) -> dict:
    """Parse a grid CSV into axis vectors plus (n_x, n_p) channel arrays."""
    path = _require(indir, name)
    with open(path) as fh:
        meta = fh.readline().rstrip("\n")
        header = fh.readline().rstrip("\n").split(",")
        data = np.loadtxt(fh, delimiter=",")
    if header[:2] != ["x", "p"]:
        raise ValueError(f"{path}: unexpected header {header[:2]}")
    x = np.unique(data[:, 0])
    p = np.unique(data[:, 1])
    n_x, n_p = len(x), len(p)
    if n_x * n_p != data.shape[0]:
        raise ValueError(f"{path}: not a complete rectangular grid")
    out = {"meta": meta, "x": x, "p": p}
    for col, channel in enumerate(header[2:], start=2):
        out[channel] = data[:, col].reshape(n_x, n_p)
    return out


def read_stagnation(indir: str) -> list[dict]:
    path = _require(indir, "stagnation.json")
    with open(path) as fh:
        payload = json.load(fh)
    return payload["points"]


def read_fieldlines(indir: str) -> list[dict]:
    """Fieldline polylines with W along them, joined with the sidecar metadata."""
    csv_path = _require(indir, "fieldlines.csv")
    meta_path = _require(indir, "fieldlines_meta.json")
    with open(meta_path) as fh:
        meta = {entry["id"]: entry for entry in json.load(fh)["fieldlines"]}
    with open(csv_path) as fh:
        fh.readline()
        fh.readline()
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    lines = []
    if data.size == 0:
        return lines
    for fid in np.unique(data[:, 0]).astype(int):
        rows = data[data[:, 0] == fid]
        rows = rows[np.argsort(rows[:, 1])]
        entry = dict(meta.get(fid, {}))
        entry.update({
            "id": int(fid),
            "vertices": rows[:, 2:4],
            "W": rows[:, 4],
            "arc": rows[:, 5],
        })
        lines.append(entry)
    return lines


def read_contours(indir: str) -> dict[str, list[np.ndarray]]:
    """Zero-contour polylines keyed by channel name."""
    path = _require(indir, "contours.csv")
    out: dict[str, list[np.ndarray]] = {}
    with open(path) as fh:
        fh.readline()
        fh.readline()
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not rows:
        return out
    channels = sorted({r[0] for r in rows})
    for channel in channels:
        sub = [(int(r[1]), int(r[2]), float(r[3]), float(r[4]))
               for r in rows if r[0] == channel]
        polys: dict[int, list] = {}
        for pid, vid, x, p in sorted(sub):
            polys.setdefault(pid, []).append((x, p))
        out[channel] = [np.array(v) for _, v in sorted(polys.items())]
    return out
