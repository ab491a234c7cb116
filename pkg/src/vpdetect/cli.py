"""Command-line front end.

    vpdetect run <config.ini>        run the configured command
    vpdetect validate <config.ini>   parse, validate and print the resolved config
    vpdetect plot <csv> <plotspec>   render a CSV with a built-in or INI plot spec

Every run writes ``summary.json`` (resolved config, its hash, headline
numbers, output list) next to its CSV files.  Failures print a JSON error
report on stderr and exit with the error's code (2 validation, 3
convergence, 4 no feasible design, 5 internal).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .atom import LEVEL_NAMES, BasisConfig, check_q_gamma_identity, solve_aa, write_wavefunction_csv
from .circuit import hamiltonian_scales, to_physical
from .config import config_hash, load_config, output_directory
from .design import SweepGrid, boundary_points, invert_design, sweep, write_sweep_csv
from .dynamics import calibrate_protocol, evolve, sweep_T, write_sweep_T_csv, write_trajectory_csv
from .eqr import build_eqr, diagonalize_and_label, write_eigen_csv
from .errors import InfeasibleDesignError, VPDetectError
from .measurement import measurement_budget, table_row, tabulated_frequency, write_measurement_csv
from .merit import MeritReport, PortAmplitudes, analyze_design, merit_row, MERIT_COLUMNS, write_merit_csv

_MOD = "cli"


def _clean(v):
    """JSON-safe value: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(v, complex):
        return {"re": _clean(v.real), "im": _clean(v.imag)}
    return v


class Run:
    """Shared state of one CLI run: config, output directory and cached solves."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.out = output_directory(cfg)
        os.makedirs(self.out, exist_ok=True)
        self.outputs: list[str] = []
        self.headline: dict = {}
        self._inv = None

    def path(self, name: str) -> str:
        self.outputs.append(name)
        return os.path.join(self.out, name)

    @property
    def basis(self) -> BasisConfig:
        t = self.cfg["truncation"]
        return BasisConfig(n_points=t["n_points"], half_width=t["half_width"], n_levels=t["n_levels"], tol=t["aa_tol"])

    def inversion(self):
        if self._inv is None:
            c = self.cfg["circuit"]
            self._inv = invert_design(
                c["ej_over_ec1"], c["u11_over_ej"], c["g_over_wc"], c["wc_over_eps_eg"], c["l1_over_l"], basis=self.basis
            )
            if not self._inv.feasible:
                raise InfeasibleDesignError(
                    f"design is not realizable ({self._inv.status}): U22/E_J = {self._inv.u22_over_ej:.4g} "
                    f">= U11/E_J = {c['u11_over_ej']:.4g}",
                    module="design-sweep",
                    operation="invert_design",
                )
        return self._inv

    def eigensystems(self, n_atom: int, n_fock: int, rw: bool = True):
        t = self.cfg["truncation"]
        inv = self.inversion()
        sc = hamiltonian_scales(inv.design)
        kw = dict(vacuum_rule=t["vacuum_rule"], truncation_tol=t["truncation_tol"], on_truncation=t["on_truncation"], max_dim=t["max_dim"])
        build = lambda v: build_eqr(inv.spectrum, sc.omega_c, sc.g_prefactor, n_atom, n_fock, v, max_dim=t["max_dim"])  # noqa: E731
        full = diagonalize_and_label(build("full"), **kw)
        return full, (diagonalize_and_label(build(t["rw_variant"]), **kw) if rw else None)

    def summary(self, command: str) -> str:
        body = {
            "package": "vpdetect",
            "version": __version__,
            "command": command,
            "config": self.cfg,
            "config_hash": config_hash(self.cfg),
            "results": self.headline,
            "outputs": sorted(set(self.outputs)),
        }
        path = os.path.join(self.out, "summary.json")
        with open(path, "w") as fh:
            json.dump(_clean(body), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(run: Run) -> None:
    inv = run.inversion()
    spec = inv.spectrum
    e = spec.eigenvalues
    with open(run.path("spectrum.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "name", "energy_over_ej", "rel_energy_over_ej", "parity", "gamma_with_g", "abs_q_with_g", "gamma_with_u", "abs_q_with_u"])
        for i in range(spec.n_levels):
            name = LEVEL_NAMES[i] if i < len(LEVEL_NAMES) else str(i)
            vals = [e[i], e[i] - e[0], spec.parity[i], spec.gamma[i, 1], abs(spec.q[i, 1]), spec.gamma[i, 0], abs(spec.q[i, 0])]
            w.writerow([i, name] + [f"{v:.12g}" for v in vals])
    if run.cfg["output"]["wavefunctions"]:
        write_wavefunction_csv(spec, run.path("wavefunctions.csv"))
    d = inv.design
    run.headline["spectrum"] = {
        "eps_eg_over_ej": spec.eps_eg,
        "eps_gu_over_eps_eg": spec.eps_gu / spec.eps_eg,
        "gamma_ge": spec.gamma_ge,
        "gamma_ug": spec.gamma_ug,
        "simple_A": inv.simple_A,
        "ej_over_ec2": d.ej_over_ec2,
        "u22_over_ej": d.u22_over_ej,
        "l_over_lj": inv.l_over_lj,
        "l2_over_lj": inv.l2_over_lj,
        "q_gamma_identity_violation": check_q_gamma_identity(spec),
        "basis_convergence": spec.convergence,
    }


def _merit_rows(run: Run) -> list[MeritReport]:
    c, t = run.cfg["circuit"], run.cfg["truncation"]
    kw = dict(n_atom=t["n_atom"], n_fock=t["n_fock"], rw_variant=t["rw_variant"], vacuum_rule=t["vacuum_rule"])
    u_values = run.cfg["merit"]["slice_u11"] or [c["u11_over_ej"]]
    rows = []
    for u in u_values:
        try:
            inv = invert_design(c["ej_over_ec1"], u, c["g_over_wc"], c["wc_over_eps_eg"], c["l1_over_l"], basis=run.basis)
            if not inv.feasible:
                raise InfeasibleDesignError(inv.status, module="design-sweep", operation="invert_design")
            rows.append(analyze_design(inv.design, spectrum=inv.spectrum, **kw).report)
        except VPDetectError as exc:
            from .circuit import CircuitDesign

            nan = PortAmplitudes(*(4 * [complex("nan")]))
            d = CircuitDesign(c["ej_over_ec1"], u, c["g_over_wc"], c["wc_over_eps_eg"], c["l1_over_l"])
            rows.append(MeritReport(float("nan"), nan, nan, float("nan"), design=d, status=f"error:{type(exc).__name__}"))
    return sorted(rows, key=lambda r: r.design.u11_over_ej)


def cmd_merit(run: Run) -> None:
    rows = _merit_rows(run)
    write_merit_csv(rows, run.path("merit.csv"))
    run.headline["merit"] = [dict(zip(MERIT_COLUMNS, merit_row(r))) for r in rows]


def cmd_sweep(run: Run) -> None:
    s = run.cfg["sweep"]
    c = run.cfg["circuit"]
    grid = SweepGrid(
        ec1_over_ej=(s["ec1_min"], s["ec1_max"]),
        u11_over_ej=(s["u11_min"], s["u11_max"]),
        n_ec1=s["n_ec1"],
        n_u11=s["n_u11"],
        g_over_wc=s["g_over_wc"],
        wc_over_eps_eg=c["wc_over_eps_eg"],
        l1_over_l=c["l1_over_l"],
    )
    basis = BasisConfig(n_points=s["n_points"], half_width=run.cfg["truncation"]["half_width"], n_levels=4, tol=run.cfg["truncation"]["aa_tol"])
    labels = sweep(grid, basis=basis, workers=run.cfg["run"]["workers"])
    write_sweep_csv(labels, run.path("sweep.csv"))
    n_feas = sum(r.feasible for r in labels)
    run.headline["sweep"] = {
        "n_points": len(labels),
        "n_feasible": n_feas,
        "n_feasible_A_above_1": sum(r.feasible and r.simple_A_above_1 for r in labels),
        "n_errors": sum(r.status.startswith("error") for r in labels),
        "feasibility_boundary": boundary_points(labels, grid, "margin", 0.0),
    }
    if run.cfg["output"]["plots"]:
        _plot(run, "sweep.csv", "region")
    if n_feas == 0:
        run.summary("sweep")
        raise InfeasibleDesignError("no feasible design point in the sweep", module="design-sweep", operation="sweep")


def _protocol(run: Run, eig, amplitudes=None):
    p = run.cfg["protocol"]
    return calibrate_protocol(
        eig, p["kind"], p["port"], p["omega0_T"] / p["t_width"], p["t_width"], p["tau"], p["delta_p"], p["delta_s"],
        amplitudes=amplitudes,
    )  # fmt: skip


def cmd_dynamics(run: Run) -> None:
    t, p = run.cfg["truncation"], run.cfg["protocol"]
    full, rw = run.eigensystems(t["dyn_n_atom"], t["dyn_n_fock"], rw=p["rw_compare"])
    prot = _protocol(run, full)
    kw = dict(n_samples=p["n_samples"], norm_tol=p["norm_tol"])
    res = evolve(full, prot, p["dt"], verify_dt=p["verify_dt"], **kw)
    write_trajectory_csv(res, run.path("trajectory.csv"))
    head = {
        "protocol": {k: getattr(prot, k) for k in ("kind", "port", "omega0", "t_width", "tau", "wp_max", "ws_max", "omega_p", "omega_s")},
        "full": res.final() | res.meta,
    }
    if rw is not None:
        res_rw = evolve(rw, _protocol(run, rw, (prot.wp_max, prot.ws_max)), p["dt"], **kw)
        write_trajectory_csv(res_rw, run.path("trajectory_rw.csv"))
        head["rw"] = res_rw.final()
    run.headline["dynamics"] = head
    if run.cfg["output"]["plots"]:
        _plot(run, "trajectory.csv", "populations")
        _plot(run, "trajectory.csv", "photons")


def cmd_sweep_t(run: Run) -> None:
    t, st = run.cfg["truncation"], run.cfg["sweep_t"]
    need_rw = any(v != "full" for v, _ in st["combos"])
    full, rw = run.eigensystems(t["dyn_n_atom"], t["dyn_n_fock"], rw=need_rw)
    combos = tuple((("rw" if v != "full" else "full"), port) for v, port in st["combos"])
    rows = sweep_T(full, rw, st["t_values"], omega0=st["omega0"], tau=st["tau"], combos=combos, dt=st["dt"], workers=run.cfg["run"]["workers"])
    for r in rows:
        if r.variant == "rw":
            r.variant = t["rw_variant"]
    write_sweep_T_csv(rows, run.path("sweepT.csv"))
    run.headline["sweep_T"] = [vars(r) for r in rows]
    if run.cfg["output"]["plots"]:
        _plot(run, "sweepT.csv", "sweepT")


def cmd_measurement(run: Run) -> None:
    c, m = run.cfg["circuit"], run.cfg["measurement"]
    inv = run.inversion()
    phys = to_physical(inv.design, c["ej_ghz"], c["cg_ff"])
    kw = dict(theta_mk=m["theta_mk"], t_noise_k=m["t_noise_k"], T_ej=m["t_ej"], tau_over_T=m["tau_over_T"], t_m_ej=m["t_m_ej"], kappa=m["kappa"])
    f = phys.wc_ghz
    f_tab = tabulated_frequency(f, m["freq_resolution_ghz"]) if m["freq_resolution_ghz"] > 0 else f
    est = measurement_budget(f_tab, c["ej_ghz"], **kw)
    exact = measurement_budget(f, c["ej_ghz"], **kw)
    row = table_row("design", phys, est, exact)
    write_measurement_csv([row], run.path("measurement.csv"))
    run.headline["measurement"] = {
        "physical": {k: getattr(phys, k) for k in ("ej_ghz", "c1_ff", "c2_ff", "l_nh", "l1_nh", "l2_nh", "lj_nh", "ic_na", "z2_kohm", "wc_ghz")},
        "table": row,
    }


def cmd_full_pipeline(run: Run) -> None:
    cmd_spectrum(run)
    cmd_merit(run)
    cmd_dynamics(run)
    cmd_sweep_t(run)
    cmd_measurement(run)
    if run.cfg["output"]["plots"] and run.cfg["output"]["wavefunctions"]:
        _plot(run, "wavefunctions.csv", "wavefunctions")


COMMAND_TABLE = {
    "spectrum": cmd_spectrum,
    "merit": cmd_merit,
    "sweep": cmd_sweep,
    "dynamics": cmd_dynamics,
    "sweep-T": cmd_sweep_t,
    "measurement": cmd_measurement,
    "full-pipeline": cmd_full_pipeline,
}


def _plot(run: Run, csv_name: str, spec: str) -> None:
    from .plots import emit_plot

    s = run.cfg["sweep"]
    name = f"{os.path.splitext(csv_name)[0]}_{spec}.svg"
    path = emit_plot(os.path.join(run.out, csv_name), spec, os.path.join(run.out, name), guides=(s["eps_eg_guide"], s["eps_ratio_guide"]))
    if path is not None:
        run.outputs.append(name)


def run_config(cfg: dict, eigen_csv: bool = True) -> str:
    """Execute the configured command; returns the summary.json path."""
    run = Run(cfg)
    command = cfg["run"]["command"]
    COMMAND_TABLE[command](run)
    if eigen_csv and command in ("spectrum", "full-pipeline"):
        t = cfg["truncation"]
        full, _ = run.eigensystems(t["n_atom"], t["n_fock"], rw=False)
        write_eigen_csv(full, run.path("eqr_levels.csv"), n_states=40)
    return run.summary(command)


# ---------------------------------------------------------------------------
# entry point


def _error_report(exc: BaseException) -> int:
    if isinstance(exc, VPDetectError):
        rep, code = exc.to_dict(), exc.exit_code
    else:
        rep, code = {"type": type(exc).__name__, "message": str(exc), "module": _MOD, "operation": "run"}, 5
    rep["exit_code"] = code
    print(json.dumps({"error": rep}, sort_keys=True), file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vpdetect", description="Virtual-photon detection design and simulation toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="action", required=True)
    r = sub.add_parser("run", help="run the command named in a config file")
    r.add_argument("config")
    v = sub.add_parser("validate", help="validate a config file and print the resolved values")
    v.add_argument("config")
    p = sub.add_parser("plot", help="render a CSV artifact as SVG")
    p.add_argument("csv")
    p.add_argument("plotspec", help="built-in name (populations, photons, region, sweepT, wavefunctions, merit) or INI file")
    p.add_argument("-o", "--output", default=None, help="SVG path (default: next to the CSV)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.action == "validate":
            cfg = load_config(args.config)
            print(json.dumps(_clean({"config": cfg, "config_hash": config_hash(cfg)}), indent=2, sort_keys=True))
        elif args.action == "run":
            print(run_config(load_config(args.config)))
        else:
            from .plots import emit_plot

            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                path = emit_plot(args.csv, args.plotspec, args.output)
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
            if path is not None:
                print(path)
    except Exception as exc:  # noqa: BLE001 - every failure becomes a structured report
        return _error_report(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
