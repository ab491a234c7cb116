"""Static SVG plots rendered from the CSV artifacts.

Output is deterministic: the SVG id salt is fixed and no creation date is
written, so identical CSVs give byte-identical files.
"""

from __future__ import annotations

import configparser
import csv
import os
import warnings

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import PlotError  # noqa: E402

_MOD = "cli"

UNITS = {
    "t": "t [1/E_J]",
    "T": "T [1/E_J]",
    "x": "E_C1/E_J",
    "y": "U11/E_J",
    "gamma": "gamma [rad]",
    "V(gamma)": "V [E_J]",
    "u11_over_ej": "U11/E_J",
    "eta": "eta",
    "n_u": "n_u",
    "n_total": "<a^dag a>",
}

# name -> (required columns, renderer)
BUILTIN = {}


def _builtin(name, *cols):
    def deco(fn):
        BUILTIN[name] = (list(cols), fn)
        return fn

    return deco


def read_csv(path) -> tuple[list[str], dict]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise PlotError(f"{path} is empty (no header)", module=_MOD, operation="emit_plots")
    header, body = rows[0], rows[1:]
    data = {}
    for j, name in enumerate(header):
        col = [r[j] for r in body]
        try:
            data[name] = np.array([float(v) for v in col])
        except ValueError:
            data[name] = np.array(col, dtype=object)
    return header, data


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


@_builtin("populations", "t", "p_Psi0u", "p_Psi0", "p_Psi2u")
def _populations(d, ax):
    for col, lab in (("p_Psi0u", "Psi_0u"), ("p_Psi0", "Psi_0"), ("p_Psi2u", "Psi_2u")):
        ax.plot(d["t"], d[col], label=lab)
    ax.set_xlabel(UNITS["t"])
    ax.set_ylabel("population")
    ax.legend()


@_builtin("photons", "t", "eta", "n_u", "n_total")
def _photons(d, ax):
    for col in ("eta", "n_u", "n_total"):
        ax.plot(d["t"], d[col], label=UNITS[col])
    ax.set_xlabel(UNITS["t"])
    ax.legend()


def _grid(d, col):
    xs, ys = np.unique(d["x"]), np.unique(d["y"])
    Z = np.full((len(xs), len(ys)), np.nan)
    ix = np.searchsorted(xs, d["x"])
    iy = np.searchsorted(ys, d["y"])
    Z[ix, iy] = d[col]
    return xs, ys, Z


@_builtin("region", "x", "y", "feasible", "A", "eps_eg_over_ej", "eps_gu_over_eps_eg")
def _region(d, ax, guides=(0.2, 5.0)):
    xs, ys, F = _grid(d, "feasible")
    ax.pcolormesh(xs, ys, F.T, shading="nearest", cmap="Greys_r", vmin=-0.5, vmax=1.5)
    if len(xs) > 1 and len(ys) > 1:
        ax.contour(xs, ys, F.T, levels=[0.5], colors="tab:blue")
        _, _, A = _grid(d, "A")
        if np.isfinite(A).any():
            ax.contour(xs, ys, np.where(np.isfinite(A), A, 1e6).T, levels=[1.0], colors="tab:red")
        _, _, E = _grid(d, "eps_eg_over_ej")
        ax.contour(xs, ys, E.T, levels=[guides[0]], colors="tab:green", linestyles="dashed")
        _, _, R = _grid(d, "eps_gu_over_eps_eg")
        ax.contour(xs, ys, R.T, levels=[guides[1]], colors="tab:cyan", linestyles="dashed")
    ax.set_xlabel(UNITS["x"])
    ax.set_ylabel(UNITS["y"])


@_builtin("sweepT", "variant", "port", "T", "eta_final", "p_target")
def _sweep_t(d, ax):
    keys = sorted({(v, p) for v, p in zip(d["variant"], d["port"])})
    for v, p in keys:
        m = (d["variant"] == v) & (d["port"] == p)
        order = np.argsort(d["T"][m])
        ax.plot(d["T"][m][order], d["eta_final"][m][order], marker="o", label=f"eta {v} {p}")
        if v == "full":
            ax.plot(d["T"][m][order], d["p_target"][m][order], ls="--", label=f"p(Psi_2u) {v} {p}")
    ax.set_xlabel(UNITS["T"])
    ax.legend()


@_builtin("wavefunctions", "gamma", "V(gamma)", "psi_u", "psi_g")
def _wavefunctions(d, ax):
    ax.plot(d["gamma"], d["V(gamma)"], color="k", label="V")
    for col in [c for c in d if c.startswith("psi_")]:
        ax.plot(d["gamma"], d[col], label=col)
    ax.set_xlabel(UNITS["gamma"])
    ax.legend()


@_builtin("merit", "u11_over_ej", "A_q", "A_prime_q", "A_gamma")
def _merit(d, ax):
    order = np.argsort(d["u11_over_ej"])
    for col in ("A_q", "A_prime_q", "A_gamma"):
        ax.semilogy(d["u11_over_ej"][order], d[col][order], marker="o", label=col)
    ax.set_xlabel(UNITS["u11_over_ej"])
    ax.legend()


def _custom_spec(path):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read(path)
    if not cp.has_section("plot"):
        raise PlotError(f"plot spec {path} lacks a [plot] section", module=_MOD, operation="emit_plots")
    sec = cp["plot"]
    allowed = {"x", "y", "title", "xlabel", "ylabel", "logy", "output"}
    bad = set(sec) - allowed
    if bad:
        raise PlotError(f"unknown plot-spec keys {sorted(bad)}", module=_MOD, operation="emit_plots")
    if "x" not in sec or "y" not in sec:
        raise PlotError("plot spec needs x and y", module=_MOD, operation="emit_plots")
    ys = [c.strip() for c in sec["y"].split(",") if c.strip()]
    return dict(sec), [sec["x"], *ys], ys


def emit_plot(csv_path, plotspec: str, out_path=None, *, guides=(0.2, 5.0)):
    """Render ``csv_path`` with a built-in spec name or a custom [plot] INI file.

    Returns the SVG path, or None (with a warning) for a header-only CSV.
    """
    matplotlib.rcParams["svg.hashsalt"] = "vpdetect"
    header, data = read_csv(csv_path)
    if plotspec in BUILTIN:
        required, fn = BUILTIN[plotspec]
        spec = {}
        name = plotspec
    elif os.path.exists(plotspec):
        spec, required, ys = _custom_spec(plotspec)
        fn = None
        name = os.path.splitext(os.path.basename(plotspec))[0]
    else:
        raise PlotError(f"unknown plot spec {plotspec!r}; built-ins: {sorted(BUILTIN)}", module=_MOD, operation="emit_plots")
    missing = [c for c in required if c not in header]
    if missing:
        raise PlotError(f"{csv_path} lacks column(s) {missing} needed by {name}", module=_MOD, operation="emit_plots")
    if len(data[header[0]]) == 0:
        warnings.warn(f"{csv_path} has no data rows; no plot written", RuntimeWarning, stacklevel=2)
        return None
    if out_path is None:
        out_path = spec.get("output") or os.path.splitext(str(csv_path))[0] + f"_{name}.svg"
    fig, ax = plt.subplots(figsize=(6, 4))
    if fn is _region:
        fn(data, ax, guides)
    elif fn is not None:
        fn(data, ax)
    else:
        x = spec["x"]
        for y in ys:
            (ax.semilogy if spec.get("logy", "false").lower() == "true" else ax.plot)(data[x], data[y], label=UNITS.get(y, y))
        ax.set_xlabel(spec.get("xlabel", UNITS.get(x, x)))
        if "ylabel" in spec:
            ax.set_ylabel(spec["ylabel"])
        ax.legend()
    if "title" in spec:
        ax.set_title(spec["title"])
    fig.tight_layout()
    _save(fig, out_path)
    return out_path
