#!/usr/bin/env python3
"""Render publication-style figures from simulation CSV output.

Usage:
    python3 plots/render.py --input sweep.csv --kind dissipation_vs_nu \
        --out eps.png [--guide gamma=0.5,k_f=1,amplitude=1,length=6.2832]

The script only reads CSVs; it never touches the simulation code.  With
--guide the dissipation figure overlays the closed-form laminar curve
eps(nu) = nu k_f^2 (a/(gamma + nu k_f^2))^2 L^2/2 and self-tests that the
CSV points lie on it (exit 1 on deviation, 2 on schema errors).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("dissipation_vs_nu", "balance_gap", "residual_series",
         "no_travel", "spectrum")

REQUIRED = {
    "dissipation_vs_nu": ("nu", "dissipation_rate"),
    "balance_gap": ("nu", "balance_gap", "dissipation_rate",
                    "telescoping_slack"),
    "residual_series": ("t", "enstrophy", "injection", "damping",
                        "dissipation"),
    "no_travel": ("t", "enstrophy", "y_r1", "y_r2", "y_r3"),
    "spectrum": ("k", "energy", "enstrophy"),
}

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "svg.hashsalt": "fixed",
}


class SchemaError(ValueError):
    pass


def load_csv(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty CSV") from None
            rows = [row for row in reader if row]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing required columns {missing}; found {header}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.array([[float(v) for v in row] for row in rows])
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def parse_guide(text: str) -> dict[str, float]:
    out = {"k_f": 1.0, "amplitude": 1.0, "length": 2.0 * math.pi}
    for part in text.split(","):
        key, _, val = part.partition("=")
        out[key.strip()] = float(val)
    if "gamma" not in out:
        raise SchemaError("--guide needs at least gamma=<value>")
    return out


def laminar_curve(nu, guide):
    ksq = guide["k_f"] ** 2
    amp = (guide["amplitude"] / (guide["gamma"] + nu * ksq))
    return nu * ksq * amp**2 * guide["length"] ** 2 / 2.0


def fig_dissipation_vs_nu(data, guide=None):
    fig, ax = plt.subplots()
    order = np.argsort(data["nu"])
    nu = data["nu"][order]
    eps = data["dissipation_rate"][order]
    ax.loglog(nu, eps, "o-", label="measured")
    deviation = None
    if guide is not None:
        dense = np.geomspace(nu[0], nu[-1], 200)
        ax.loglog(dense, laminar_curve(dense, guide), "--",
                  label="closed form")
        deviation = float(np.max(np.abs(
            eps / laminar_curve(nu, guide) - 1.0)))
    ax.set_xlabel("viscosity")
    ax.set_ylabel("time-averaged enstrophy dissipation")
    ax.legend()
    return fig, deviation


def fig_balance_gap(data):
    fig, ax = plt.subplots()
    order = np.argsort(data["nu"])
    nu = data["nu"][order]
    ax.loglog(nu, np.abs(data["balance_gap"][order]), "s-",
              label="|balance gap|")
    ax.loglog(nu, data["dissipation_rate"][order]
              + data["telescoping_slack"][order], "o--",
              label="dissipation + slack (bound)")
    ax.set_xlabel("viscosity")
    ax.set_ylabel("magnitude")
    ax.legend()
    return fig, None


def fig_residual_series(data):
    t = data["t"]
    q = data["enstrophy"]
    if t.size < 3:
        raise SchemaError("residual series needs at least 3 samples")
    dq = (q[2:] - q[:-2]) / (t[2:] - t[:-2])
    mid = slice(1, -1)
    resid = (0.5 * dq + data["damping"][mid] + data["dissipation"][mid]
             - data["injection"][mid])
    scale = np.maximum(np.abs(data["injection"][mid])
                       + data["damping"][mid], 1e-30)
    fig, ax = plt.subplots()
    ax.semilogy(t[mid], np.abs(resid) / scale, "-")
    ax.set_xlabel("time")
    ax.set_ylabel("normalized enstrophy balance residual")
    return fig, None


def fig_no_travel(data):
    fig, ax = plt.subplots()
    floor = 1e-300
    ax.semilogy(data["t"], np.maximum(data["enstrophy"], floor), "k-",
                label="total enstrophy")
    for col, label in (("y_r1", "R = L/8"), ("y_r2", "R = L/4"),
                       ("y_r3", "R = 3L/8")):
        ax.semilogy(data["t"], np.maximum(data[col], floor), "--",
                    label=label)
    ax.set_xlabel("time")
    ax.set_ylabel("enstrophy mass outside radius R/2")
    ax.legend()
    return fig, None


def fig_spectrum(data):
    fig, ax = plt.subplots()
    ax.loglog(data["k"], np.maximum(data["enstrophy"], 1e-300), "o-",
              label="enstrophy density")
    ax.loglog(data["k"], np.maximum(data["energy"], 1e-300), "s--",
              label="energy density")
    ax.set_xlabel("wavenumber shell")
    ax.set_ylabel("shell-summed density")
    ax.legend()
    return fig, None


def render(input_path: str, kind: str, out_path: str,
           guide: dict | None = None,
           guide_tolerance: float = 1e-6) -> float | None:
    """Render one figure; returns the guide-curve deviation if checked."""
    if kind not in KINDS:
        raise SchemaError(f"unknown figure kind {kind!r}; "
                          f"choose from {KINDS}")
    data = load_csv(input_path, REQUIRED[kind])
    with plt.rc_context(STYLE):
        if kind == "dissipation_vs_nu":
            fig, deviation = fig_dissipation_vs_nu(data, guide)
        elif kind == "balance_gap":
            fig, deviation = fig_balance_gap(data)
        elif kind == "residual_series":
            fig, deviation = fig_residual_series(data)
        elif kind == "no_travel":
            fig, deviation = fig_no_travel(data)
        else:
            fig, deviation = fig_spectrum(data)
        fig.tight_layout()
        fig.savefig(out_path, metadata=_fixed_metadata(out_path))
        plt.close(fig)
    return deviation


def _fixed_metadata(out_path: str):
    # strip creation timestamps so identical inputs give identical files
    if out_path.endswith(".png"):
        return {"Software": "render"}
    if out_path.endswith(".svg"):
        return {"Date": None}
    return None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True, help="source CSV")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output PNG/SVG path")
    parser.add_argument("--guide", default=None,
                        help="laminar closed-form overlay, e.g. "
                             "'gamma=0.5,k_f=1,amplitude=1'")
    parser.add_argument("--guide-tolerance", type=float, default=1e-6)
    args = parser.parse_args(argv)
    try:
        guide = parse_guide(args.guide) if args.guide else None
        deviation = render(args.input, args.kind, args.out, guide,
                           args.guide_tolerance)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    if deviation is not None:
        print(f"guide-curve max relative deviation: {deviation:.3e}")
        if deviation > args.guide_tolerance:
            print("points do not lie on the closed-form curve",
                  file=sys.stderr)
            return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
