"""Faithfulness figures of merit for virtual-photon conversion.

The Stokes bridge <Psi_2u| o |Psi_0> (o = q or gamma acting on the atom) is
compared with

* the RW amplitude: the two terms of the bridge that survive when the
  dressed states are expanded only to first order in the co-rotating
  couplings, evaluated on the full-model eigenstates;
* the JC amplitude: the same bridge evaluated on the rotating-wave model.

Large ratios mean the photons released by the Stokes transition are
converted ground-state virtual photons rather than real ones.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .atom import AASpectrum, BasisConfig, solve_aa
from .circuit import CircuitDesign, hamiltonian_scales, inductances_from_energies
from .eqr import LabeledEigensystem, build_eqr, diagonalize_and_label
from .errors import DomainError, LabelingError, VPDetectError

_MOD = "merit"
INF = math.inf
# amplitudes below this are treated as exactly zero
AMPLITUDE_FLOOR = 1e-14


def simple_criterion(spec: AASpectrum) -> float:
    """A = (e_gu - e_eg) / (2 e_eg) * gamma_ge^2 / gamma_ug^2 (inf if gamma_ug = 0)."""
    if spec.n_levels < 3:
        raise DomainError("need at least three atomic levels", module=_MOD, operation="simple_criterion")
    gug = spec.gamma_ug
    if abs(gug) < AMPLITUDE_FLOOR:
        return INF
    return (spec.eps_gu - spec.eps_eg) / (2 * spec.eps_eg) * spec.gamma_ge**2 / gug**2


def _ratio(num: complex, den: complex) -> float:
    if abs(den) < AMPLITUDE_FLOOR:
        return INF
    return abs(num) / abs(den)


@dataclass
class PortAmplitudes:
    full: complex
    full_direct: complex
    rw: complex
    jc: complex

    @property
    def A(self) -> float:
        return _ratio(self.full, self.rw)

    @property
    def A_prime(self) -> float:
        return _ratio(self.full, self.jc)

    @property
    def relative_phase_rw(self) -> float:
        return float(np.angle(self.full / self.rw)) if abs(self.rw) > AMPLITUDE_FLOOR else 0.0


@dataclass
class MeritReport:
    simple_A: float
    q: PortAmplitudes
    gamma: PortAmplitudes
    g_ef_over_eps_fe: float
    design: CircuitDesign | None = None
    eps_eg: float = float("nan")
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    @property
    def stokes_full(self) -> complex:
        return self.q.full

    @property
    def stokes_rw(self) -> complex:
        return self.q.rw

    @property
    def stokes_jc(self) -> complex:
        return self.q.jc

    @property
    def A_q(self) -> float:
        return self.q.A

    @property
    def A_prime_q(self) -> float:
        return self.q.A_prime

    @property
    def A_gamma(self) -> float:
        return self.gamma.A

    @property
    def A_prime_gamma(self) -> float:
        return self.gamma.A_prime

    @property
    def gamma_status(self) -> str:
        """Numerical status of the gamma-port ratio ('ok', 'inf' or 'nan')."""
        a = self.A_gamma
        return "nan" if math.isnan(a) else ("inf" if math.isinf(a) else "ok")


def _restricted_bridge(eig: LabeledEigensystem, op: np.ndarray) -> complex:
    """sum' <Psi_2u|n,i> o_ij <n,j|Psi_0> over even n+i and odd n+j."""
    m = eig.model
    p2, p0 = eig.state("Psi_2u"), eig.state("Psi_0")
    par = (m.fock_numbers + m.atom_levels) % 2
    O = np.kron(np.eye(m.n_fock), op)
    rows, cols = par == 0, par == 1
    return complex(p2[rows].conj() @ O[np.ix_(rows, cols)] @ p0[cols])


def _direct_bridge(eig: LabeledEigensystem, op: np.ndarray) -> complex:
    m = eig.model
    return complex(eig.state("Psi_2u").conj() @ np.kron(np.eye(m.n_fock), op) @ eig.state("Psi_0"))


def _rw_bridge(eig: LabeledEigensystem, op: np.ndarray) -> complex:
    m = eig.model
    p2, p0 = eig.state("Psi_2u"), eig.state("Psi_0")
    u, g, e = 0, 1, 2
    return complex(
        op[g, u] * np.conj(p2[m.index(1, g)]) * p0[m.index(1, u)]
        + op[e, g] * np.conj(p2[m.index(0, e)]) * p0[m.index(0, g)]
    )


def port_amplitudes(eig_full: LabeledEigensystem, eig_rw: LabeledEigensystem, op_full, op_rw=None) -> PortAmplitudes:
    op_rw = op_full if op_rw is None else op_rw
    for eig in (eig_full, eig_rw):
        for tag in ("Psi_2u", "Psi_0"):
            if tag not in eig.labels:
                raise LabelingError(f"missing label {tag}", module=_MOD, operation="stokes_amplitudes")
    return PortAmplitudes(
        full=_restricted_bridge(eig_full, op_full),
        full_direct=_direct_bridge(eig_full, op_full),
        rw=_rw_bridge(eig_full, op_full),
        jc=_direct_bridge(eig_rw, op_rw),
    )


def stokes_amplitudes(
    eig_full: LabeledEigensystem,
    eig_rw: LabeledEigensystem,
    q_elems: np.ndarray | None = None,
    gamma_elems: np.ndarray | None = None,
    spec: AASpectrum | None = None,
) -> MeritReport:
    """Bridge amplitudes through both ports and the ratios A, A'.

    The atom matrices default to the truncated ones stored on the models.
    """
    mf, mr = eig_full.model, eig_rw.model
    n = mf.n_atom
    q_f = mf.q if q_elems is None else np.asarray(q_elems)[:n, :n]
    g_f = mf.gamma if gamma_elems is None else np.asarray(gamma_elems)[:n, :n]
    q_r = mr.q if q_elems is None else np.asarray(q_elems)[: mr.n_atom, : mr.n_atom]
    g_r = mr.gamma if gamma_elems is None else np.asarray(gamma_elems)[: mr.n_atom, : mr.n_atom]
    amp_q = port_amplitudes(eig_full, eig_rw, q_f, q_r)
    amp_g = port_amplitudes(eig_full, eig_rw, g_f, g_r)
    if spec is not None:
        A = simple_criterion(spec)
        gef = mf.g_prefactor * spec.gamma[2, 3] / (spec.eigenvalues[3] - spec.eigenvalues[2])
        eps_eg = spec.eps_eg
    else:
        A = float("nan")
        gef = mf.g_prefactor * mf.gamma[2, 3] / (mf.energies[3] - mf.energies[2]) if n > 3 else float("nan")
        eps_eg = float(mf.energies[2] - mf.energies[1])
    return MeritReport(simple_A=A, q=amp_q, gamma=amp_g, g_ef_over_eps_fe=float(abs(gef)), eps_eg=eps_eg)


@dataclass
class DesignAnalysis:
    design: CircuitDesign
    spectrum: AASpectrum
    full: LabeledEigensystem
    rw: LabeledEigensystem
    report: MeritReport


def analyze_design(
    design: CircuitDesign,
    *,
    n_atom: int = 8,
    n_fock: int = 12,
    basis: BasisConfig | None = None,
    spectrum: AASpectrum | None = None,
    rw_variant: str = "rw",
    vacuum_rule: str = "lowest-non-probe",
    on_truncation: str = "ignore",
) -> DesignAnalysis:
    """Spectrum, both eigensystems and the merit report of one design."""
    spec = spectrum if spectrum is not None else solve_aa(design.ec1_over_ej, design.u11_over_ej, 1.0, basis)
    sc = hamiltonian_scales(design)
    kw = dict(vacuum_rule=vacuum_rule, on_truncation=on_truncation)
    full = diagonalize_and_label(build_eqr(spec, sc.omega_c, sc.g_prefactor, n_atom, n_fock, "full"), **kw)
    rw = diagonalize_and_label(build_eqr(spec, sc.omega_c, sc.g_prefactor, n_atom, n_fock, rw_variant), **kw)
    rep = stokes_amplitudes(full, rw, spec=spec)
    rep.design = design
    return DesignAnalysis(design, spec, full, rw, rep)


def merit_slice(designs, **kwargs) -> list[MeritReport]:
    """One report per design, sorted by U11/E_J; failures become row statuses."""
    rows = []
    for d in designs:
        try:
            rep = analyze_design(d, **kwargs).report
        except VPDetectError as exc:
            nanamp = PortAmplitudes(*(4 * [complex("nan")]))
            rep = MeritReport(float("nan"), nanamp, nanamp, float("nan"), design=d, status=f"error:{type(exc).__name__}")
        rows.append(rep)
    return sorted(rows, key=lambda r: r.design.u11_over_ej)


MERIT_COLUMNS = [
    "ej_over_ec1",
    "u11_over_ej",
    "g_over_wc",
    "eps_eg_over_ej",
    "ej_over_ec2",
    "l_over_lj",
    "l2_over_lj",
    "simple_A",
    "A_q",
    "A_prime_q",
    "A_gamma",
    "A_prime_gamma",
    "g_ef_over_eps_fe",
    "stokes_full_abs",
    "stokes_rw_abs",
    "stokes_jc_abs",
    "phase_full_vs_rw",
    "gamma_status",
    "status",
]


def _f(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf"
    return f"{v:.10g}"


def merit_row(rep: MeritReport) -> list:
    d = rep.design
    if d is not None and d.has_derived:
        L, _, L2 = inductances_from_energies(d.u11_over_ej, d.u12_over_ej, d.u22_over_ej)
        head = [d.ej_over_ec1, d.u11_over_ej, d.g_over_wc, rep.eps_eg, d.ej_over_ec2, L, L2]
    elif d is not None:
        head = [d.ej_over_ec1, d.u11_over_ej, d.g_over_wc, rep.eps_eg] + [float("nan")] * 3
    else:
        head = [float("nan")] * 7
    ok = rep.status == "ok"
    return head + [
        rep.simple_A,
        rep.A_q,
        rep.A_prime_q,
        rep.A_gamma,
        rep.A_prime_gamma,
        rep.g_ef_over_eps_fe,
        abs(rep.q.full),
        abs(rep.q.rw),
        abs(rep.q.jc),
        rep.q.relative_phase_rw if ok else float("nan"),
        rep.gamma_status if ok else "n/a",
        rep.status,
    ]


def write_merit_csv(reports: list[MeritReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MERIT_COLUMNS)
        for rep in reports:
            w.writerow([_f(v) for v in merit_row(rep)])
