"""Driven dynamics: calibrated two-tone STIRAP/Raman protocols.

The lab-frame Hamiltonian H(t) = H0 + W(t) O, with O = q or gamma on the
atom, is propagated with a Strang splitting in the eigenbasis of H0:

    psi <- exp(-i H0 dt/2) exp(-i W(t_mid) dt O) exp(-i H0 dt/2) psi

H0 is diagonal there, and O only connects the two excitation-parity sectors,
O = [[0, B], [B^dag, 0]].  With the singular value decomposition B = U S V^dag
the drive exponential is applied exactly at the cost of four half-size
matrix-vector products, so each step is unitary to rounding.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.integrate import solve_ivp

from .eqr import LabeledEigensystem
from .errors import ConvergenceError, DomainError, IntegratorError, ProtocolImpossibleError

_MOD = "dynamics"

BRIDGE_FLOOR = 1e-12


@dataclass(frozen=True)
class DriveProtocol:
    """Two-tone Gaussian drive.

    Envelopes: W_p(t) = wp_max exp(-((t - tau T)/T)^2) (pump, late) and
    W_s(t) = ws_max exp(-((t + tau T)/T)^2) (Stokes, early); ``tau`` is in
    units of T.  Carriers are omega_p = (E_Psi0 - E_Psi0u) - delta_p and
    omega_s = (E_Psi0 - E_Psi2u) - delta_s.
    """

    kind: str
    port: str
    omega0: float
    t_width: float
    tau: float
    delta_p: float
    delta_s: float
    wp_max: float
    ws_max: float
    omega_p: float
    omega_s: float

    def __post_init__(self):
        if self.kind not in ("stirap", "raman"):
            raise DomainError(f"unknown protocol kind {self.kind!r}", module=_MOD, operation="DriveProtocol")
        if self.port not in ("q", "gamma"):
            raise DomainError(f"unknown port {self.port!r}", module=_MOD, operation="DriveProtocol")
        if self.kind == "stirap" and not self.tau > 0:
            raise DomainError("STIRAP needs tau > 0 (Stokes before pump)", module=_MOD, operation="DriveProtocol")
        if self.kind == "raman" and self.tau != 0:
            raise DomainError("Raman protocol uses tau = 0", module=_MOD, operation="DriveProtocol")
        if not self.t_width > 0 or self.omega0 < 0:
            raise DomainError("pulse width must be positive and omega0 non-negative", module=_MOD, operation="DriveProtocol")

    @property
    def delay(self) -> float:
        return self.tau * self.t_width

    def envelopes(self, t):
        t = np.asarray(t, dtype=float)
        T, d = self.t_width, self.delay
        return self.wp_max * np.exp(-(((t - d) / T) ** 2)), self.ws_max * np.exp(-(((t + d) / T) ** 2))

    def field(self, t):
        p, s = self.envelopes(t)
        return p * np.cos(self.omega_p * t) + s * np.cos(self.omega_s * t)

    def time_window(self) -> tuple[float, float]:
        return -3 * self.t_width, 3 * self.t_width


def bridge_elements(eig: LabeledEigensystem, port: str) -> tuple[complex, complex]:
    """(<Psi_0u|O|Psi_0>, <Psi_2u|O|Psi_0>) for the chosen port."""
    O = eig.model.drive_operator(port)
    p0 = eig.state("Psi_0")
    return complex(eig.state("Psi_0u").conj() @ O @ p0), complex(eig.state("Psi_2u").conj() @ O @ p0)


def calibrate_protocol(
    eig: LabeledEigensystem,
    kind: str = "stirap",
    port: str = "q",
    omega0: float = 0.005,
    t_width: float = 3000.0,
    tau: float = 0.7,
    delta_p: float = 0.0,
    delta_s: float = 0.0,
    *,
    amplitudes: tuple[float, float] | None = None,
    amplitude_cap: float = math.inf,
) -> DriveProtocol:
    """Pulse amplitudes giving peak pump and Stokes Rabi frequencies omega0.

    The pump bridges Psi_0u <-> Psi_0 and the Stokes pulse Psi_2u <-> Psi_0.
    With ``amplitudes`` the envelope maxima are imposed instead (only the
    carriers are tuned to ``eig``), which is how the rotating-wave model is
    driven with the pulses calibrated on the full model.
    """
    if kind == "raman":
        tau = 0.0
    if amplitudes is None:
        bp, bs = bridge_elements(eig, port)
        if abs(bs) < BRIDGE_FLOOR or abs(bp) < BRIDGE_FLOOR:
            raise ProtocolImpossibleError(
                f"vanishing bridge element (|pump| = {abs(bp):.2e}, |Stokes| = {abs(bs):.2e})",
                module=_MOD,
                operation="calibrate_protocol",
            )
        wp, ws = omega0 / abs(bp), omega0 / abs(bs)
        if max(wp, ws) > amplitude_cap:
            raise ProtocolImpossibleError(
                f"required drive amplitude {max(wp, ws):.3g} exceeds cap {amplitude_cap:.3g}",
                module=_MOD,
                operation="calibrate_protocol",
            )
    else:
        wp, ws = amplitudes
    e0 = eig.energy("Psi_0")
    return DriveProtocol(
        kind=kind,
        port=port,
        omega0=omega0,
        t_width=t_width,
        tau=tau,
        delta_p=delta_p,
        delta_s=delta_s,
        wp_max=float(wp),
        ws_max=float(ws),
        omega_p=e0 - eig.energy("Psi_0u") - delta_p,
        omega_s=e0 - eig.energy("Psi_2u") - delta_s,
    )


@numba.njit(cache=True)
def _propagate(x, y, E_even, E_odd, U, S, V, kr, ki, t0, dt, n_steps, stride,
               wp, ws, op, os_, T, delay, out_x, out_y):  # fmt: skip
    """Strang steps on (x, y) = even/odd amplitudes stored as (n, 2) real arrays.

    Drive block B = c U S V^T with real U, V; (kr, ki) = -i c.
    """
    ce = np.cos(0.5 * dt * E_even)
    se = -np.sin(0.5 * dt * E_even)
    co = np.cos(0.5 * dt * E_odd)
    so = -np.sin(0.5 * dt * E_odd)
    UT = np.ascontiguousarray(U.T)
    VT = np.ascontiguousarray(V.T)
    r = S.shape[0]
    ga = np.empty((r, 2))
    gb = np.empty((r, 2))
    k = 0
    for s in range(n_steps):
        if s % stride == 0:
            out_x[k] = x
            out_y[k] = y
            k += 1
        t = t0 + (s + 0.5) * dt
        a1 = (t - delay) / T
        a2 = (t + delay) / T
        W = wp * math.exp(-a1 * a1) * math.cos(op * t) + ws * math.exp(-a2 * a2) * math.cos(os_ * t)
        # half free step
        for j in range(x.shape[0]):
            re = x[j, 0] * ce[j] - x[j, 1] * se[j]
            x[j, 1] = x[j, 0] * se[j] + x[j, 1] * ce[j]
            x[j, 0] = re
        for j in range(y.shape[0]):
            re = y[j, 0] * co[j] - y[j, 1] * so[j]
            y[j, 1] = y[j, 0] * so[j] + y[j, 1] * co[j]
            y[j, 0] = re
        # exact drive step
        a = UT @ x
        b = VT @ y
        th = W * dt
        for j in range(r):
            c = math.cos(th * S[j]) - 1.0
            sn = math.sin(th * S[j])
            # x gets (cos-1) a + kappa sin b ; y gets (cos-1) b - conj(kappa) sin a
            ga[j, 0] = c * a[j, 0] + sn * (kr * b[j, 0] - ki * b[j, 1])
            ga[j, 1] = c * a[j, 1] + sn * (kr * b[j, 1] + ki * b[j, 0])
            gb[j, 0] = c * b[j, 0] - sn * (kr * a[j, 0] + ki * a[j, 1])
            gb[j, 1] = c * b[j, 1] - sn * (kr * a[j, 1] - ki * a[j, 0])
        x += U @ ga
        y += V @ gb
        for j in range(x.shape[0]):
            re = x[j, 0] * ce[j] - x[j, 1] * se[j]
            x[j, 1] = x[j, 0] * se[j] + x[j, 1] * ce[j]
            x[j, 0] = re
        for j in range(y.shape[0]):
            re = y[j, 0] * co[j] - y[j, 1] * so[j]
            y[j, 1] = y[j, 0] * so[j] + y[j, 1] * co[j]
            y[j, 0] = re
    out_x[k] = x
    out_y[k] = y
    return k + 1


@dataclass
class _DriveBlocks:
    even: np.ndarray
    odd: np.ndarray
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    kappa: complex


def _drive_blocks(eig: LabeledEigensystem, port: str) -> _DriveBlocks:
    model = eig.model
    O = eig.operator(model.drive_operator(port))
    par = np.sign(np.real(np.sum(eig.overlaps * model.parity()[:, None], axis=0))).astype(int)
    even = np.flatnonzero(par > 0)
    odd = np.flatnonzero(par < 0)
    if len(even) + len(odd) != len(par):
        raise IntegratorError("eigenstates without definite parity", module=_MOD, operation="evolve")
    leak = max(np.abs(O[np.ix_(even, even)]).max(initial=0), np.abs(O[np.ix_(odd, odd)]).max(initial=0))
    if leak > 1e-9 * max(np.abs(O).max(), 1.0):
        raise IntegratorError(f"drive operator does not flip parity (leak {leak:.1e})", module=_MOD, operation="evolve")
    B = O[np.ix_(even, odd)]
    scale = np.abs(B).max()
    if np.abs(B.imag).max() <= 1e-12 * scale:
        Br, c = B.real, 1.0 + 0j
    elif np.abs(B.real).max() <= 1e-12 * scale:
        Br, c = B.imag, 1j
    else:
        raise IntegratorError("drive block is neither real nor imaginary", module=_MOD, operation="evolve")
    U, S, Vt = np.linalg.svd(Br, full_matrices=False)
    return _DriveBlocks(even, odd, np.ascontiguousarray(U), S, np.ascontiguousarray(Vt.T), -1j * c)


@dataclass
class TrajectoryResult:
    t: np.ndarray
    populations: dict
    eta: np.ndarray
    n_u: np.ndarray
    n_total: np.ndarray
    norm: np.ndarray
    final_state: np.ndarray
    protocol: DriveProtocol
    dt: float
    variant: str = "full"
    meta: dict = field(default_factory=dict)

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))

    def final(self) -> dict:
        out = {f"p_{k}": float(v[-1]) for k, v in self.populations.items()}
        out.update(
            eta=float(self.eta[-1]),
            n_u=float(self.n_u[-1]),
            n_total=float(self.n_total[-1]),
            norm_drift=self.norm_drift,
        )
        return out


def photon_measures(eig: LabeledEigensystem, amps: np.ndarray):
    """eta, n_u and <a^dag a> for eigenbasis amplitudes (rows = samples)."""
    m = eig.model
    phi = amps @ eig.vectors.T
    P = np.abs(phi) ** 2
    ns = m.fock_numbers
    u = m.atom_levels == 0
    eta = P[:, u & (ns > 0)].sum(axis=1)
    n_u = (P[:, u] * ns[u]).sum(axis=1)
    n_tot = (P * ns).sum(axis=1)
    return eta, n_u, n_tot


def evolve(
    eig: LabeledEigensystem,
    protocol: DriveProtocol,
    dt: float = 0.02,
    *,
    n_samples: int = 601,
    norm_tol: float = 1e-9,
    verify_dt: bool = False,
    dt_tol: float = 1e-3,
    initial: np.ndarray | None = None,
) -> TrajectoryResult:
    """Integrate the driven model over [-3T, 3T] starting from its ground state."""
    if not dt > 0:
        raise DomainError("dt must be positive", module=_MOD, operation="evolve")
    blocks = _drive_blocks(eig, protocol.port)
    t0, t1 = protocol.time_window()
    n_steps = int(round((t1 - t0) / dt))
    dt_eff = (t1 - t0) / n_steps
    stride = max(1, n_steps // max(n_samples - 1, 1))
    n_out = n_steps // stride + 2

    D = len(eig.energies)
    psi0 = np.zeros(D, complex)
    if initial is None:
        psi0[0] = 1.0
    else:
        psi0[:] = initial
    x = np.ascontiguousarray(np.stack([psi0[blocks.even].real, psi0[blocks.even].imag], axis=1))
    y = np.ascontiguousarray(np.stack([psi0[blocks.odd].real, psi0[blocks.odd].imag], axis=1))
    out_x = np.zeros((n_out, len(blocks.even), 2))
    out_y = np.zeros((n_out, len(blocks.odd), 2))
    k = _propagate(
        x, y, eig.energies[blocks.even].copy(), eig.energies[blocks.odd].copy(),
        blocks.U, blocks.S, blocks.V, blocks.kappa.real, blocks.kappa.imag,
        t0, dt_eff, n_steps, stride,
        protocol.wp_max, protocol.ws_max, protocol.omega_p, protocol.omega_s,
        protocol.t_width, protocol.delay, out_x, out_y,
    )  # fmt: skip
    amps = np.zeros((k, D), complex)
    amps[:, blocks.even] = out_x[:k, :, 0] + 1j * out_x[:k, :, 1]
    amps[:, blocks.odd] = out_y[:k, :, 0] + 1j * out_y[:k, :, 1]
    times = t0 + dt_eff * np.minimum(np.arange(k) * stride, n_steps)
    times[-1] = t0 + n_steps * dt_eff

    norm = np.linalg.norm(amps, axis=1)
    drift = float(np.max(np.abs(norm - 1)))
    if drift > norm_tol:
        raise IntegratorError(f"norm drift {drift:.2e} exceeds {norm_tol:.0e}", module=_MOD, operation="evolve")
    P = np.abs(amps) ** 2
    pops = {tag: P[:, eig.index(tag)] for tag in ("Psi_0u", "Psi_0", "Psi_2u")}
    eta, n_u, n_tot = photon_measures(eig, amps)
    res = TrajectoryResult(
        t=times,
        populations=pops,
        eta=eta,
        n_u=n_u,
        n_total=n_tot,
        norm=norm,
        final_state=amps[-1],
        protocol=protocol,
        dt=dt_eff,
        variant=eig.model.variant,
    )
    if verify_dt:
        half = evolve(eig, protocol, dt / 2, n_samples=2, norm_tol=norm_tol, initial=initial)
        shift = abs(half.eta[-1] - res.eta[-1])
        res.meta["dt_shift_eta"] = shift
        if shift > dt_tol:
            raise ConvergenceError(
                f"final eta shifts by {shift:.2e} when dt is halved", module=_MOD, operation="evolve"
            )
    return res


TRAJECTORY_COLUMNS = ["t", "p_Psi0u", "p_Psi0", "p_Psi2u", "eta", "n_u", "n_total", "norm"]


def write_trajectory_csv(res: TrajectoryResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        p = res.populations
        for k in range(len(res.t)):
            row = [res.t[k], p["Psi_0u"][k], p["Psi_0"][k], p["Psi_2u"][k], res.eta[k], res.n_u[k], res.n_total[k], res.norm[k]]
            w.writerow([f"{v:.10g}" for v in row])


# ---------------------------------------------------------------------------
# T sweep


@dataclass
class SweepTRow:
    variant: str
    port: str
    T: float
    omega_s_T: float
    eta_final: float = float("nan")
    p_target: float = float("nan")
    n_u: float = float("nan")
    n_total: float = float("nan")
    status: str = "ok"


def _sweep_task(args) -> SweepTRow:
    eig, variant, port, T, amps, omega0, tau, dt = args
    row = SweepTRow(variant, port, T, omega0 * T)
    try:
        prot = calibrate_protocol(eig, "stirap", port, omega0, T, tau, amplitudes=amps)
        f = evolve(eig, prot, dt, n_samples=2).final()
        row.eta_final, row.p_target, row.n_u, row.n_total = f["eta"], f["p_Psi_2u"], f["n_u"], f["n_total"]
    except Exception as exc:  # noqa: BLE001 - a failed row must not stop the sweep
        row.status = f"error:{type(exc).__name__}"
    return row


def sweep_T(
    eig_full: LabeledEigensystem,
    eig_rw: LabeledEigensystem,
    T_values,
    *,
    omega0: float = 0.005,
    tau: float = 0.7,
    combos=(("full", "q"), ("rw", "q"), ("rw", "gamma")),
    dt: float = 0.02,
    workers: int = 1,
) -> list[SweepTRow]:
    """Final-time figures versus pulse width at fixed pulse amplitudes.

    For each port the amplitudes are calibrated once on the full model so the
    peak Rabi frequencies equal ``omega0``; the same amplitudes drive the
    rotating-wave model with carriers re-tuned to its own levels.  The
    adiabaticity diagnostic is Omega_s T = omega0 T.
    """
    amps = {}
    for _, port in combos:
        if port not in amps:
            p = calibrate_protocol(eig_full, "stirap", port, omega0, 1.0, tau)
            amps[port] = (p.wp_max, p.ws_max)
    eigs = {"full": eig_full, "rw": eig_rw}
    tasks = [(eigs[v], v, port, float(T), amps[port], omega0, tau, dt) for v, port in combos for T in T_values]
    if workers <= 1:
        rows = [_sweep_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_task, tasks))
    return rows


SWEEP_T_COLUMNS = ["variant", "port", "T", "omega_s_T", "eta_final", "p_target", "n_u", "n_total", "status"]


def write_sweep_T_csv(rows: list[SweepTRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_T_COLUMNS)
        for r in rows:
            w.writerow([r.variant, r.port, f"{r.T:.10g}", f"{r.omega_s_T:.10g}", f"{r.eta_final:.10g}",
                        f"{r.p_target:.10g}", f"{r.n_u:.10g}", f"{r.n_total:.10g}", r.status])  # fmt: skip


# ---------------------------------------------------------------------------
# reduced models in the frame rotating with the carriers


@dataclass
class LambdaResult:
    t: np.ndarray
    populations: np.ndarray  # (n_times, n_states)
    labels: list


def evolve_reduced_lambda(
    omega0: float,
    t_width: float,
    tau: float = 0.7,
    delta_p: float = 0.0,
    delta_s: float = 0.0,
    *,
    overlaps: tuple[float, float] | None = None,
    n_samples: int = 401,
) -> LambdaResult:
    """Three-level Lambda {|0u>, |Phi_0>, |2u>} with Gaussian pump and Stokes.

    Peak Rabi frequencies are omega0 scaled by the overlaps (<0g|Phi_0>,
    <2g|Phi_0>) normalized to the pump one, so ``overlaps=(c0, 0)`` switches
    the Stokes coupling off.  Negative ``tau`` gives intuitive ordering.
    """
    rp, rs = 1.0, 1.0
    if overlaps is not None:
        c0, c2 = overlaps
        if c0 == 0:
            raise ProtocolImpossibleError("pump overlap vanishes", module=_MOD, operation="evolve_reduced_lambda")
        rs = abs(c2) / abs(c0)
    T, d = t_width, tau * t_width

    def rhs(t, c):
        op = 0.5 * omega0 * rp * math.exp(-(((t - d) / T) ** 2))
        os_ = 0.5 * omega0 * rs * math.exp(-(((t + d) / T) ** 2))
        H = np.array([[0, op, 0], [op, delta_p, os_], [0, os_, delta_p - delta_s]], dtype=complex)
        return -1j * (H @ c)

    ts = np.linspace(-3 * T, 3 * T, n_samples)
    sol = solve_ivp(rhs, (ts[0], ts[-1]), np.array([1, 0, 0], complex), t_eval=ts, rtol=1e-10, atol=1e-12, method="DOP853")
    return LambdaResult(ts, np.abs(sol.y.T) ** 2, ["0u", "Phi_0", "2u"])


def evolve_multilambda(
    eig: LabeledEigensystem,
    protocol: DriveProtocol,
    n_rungs: int = 3,
    *,
    n_samples: int = 201,
) -> TrajectoryResult:
    """Rotating-wave (on the drive) multi-Lambda model.

    States: Psi_0 and Psi_{2m u}, m = 0..n_rungs.  Each tone couples every
    Psi_{2m u} to Psi_0 through the bridge <Psi_{2m u}|O|Psi_0> with its own
    detuning; the pump tone acts on every rung and the Stokes tone on
    m >= 1.  Populations are mapped back to the full
    eigenbasis to evaluate eta, n_u and <a^dag a>.
    """
    model = eig.model
    O = eig.operator(model.drive_operator(protocol.port))
    rungs = []
    for m in range(n_rungs + 1):
        tag = f"Psi_{2 * m}u"
        if tag in eig.labels:
            rungs.append(eig.labels[tag])
        elif 2 * m < model.n_fock:
            rungs.append(int(np.argmax(eig.overlaps[model.index(2 * m, 0)])))
    l0 = eig.index("Psi_0")
    states = [l0] + rungs
    E = eig.energies
    T, d = protocol.t_width, protocol.delay
    bridge = np.array([O[l0, m] for m in rungs])
    det = np.array([(E[l0] - E[m]) for m in rungs])

    def rhs(t, c):
        ep = 0.5 * protocol.wp_max * math.exp(-(((t - d) / T) ** 2))
        es = 0.5 * protocol.ws_max * math.exp(-(((t + d) / T) ** 2))
        h = ep * bridge * np.exp(1j * (det - protocol.omega_p) * t)
        h[1:] += es * bridge[1:] * np.exp(1j * (det[1:] - protocol.omega_s) * t)
        dc = np.empty_like(c)
        dc[0] = -1j * (h @ c[1:])
        dc[1:] = -1j * np.conj(h) * c[0]
        return dc

    t0, t1 = protocol.time_window()
    ts = np.linspace(t0, t1, n_samples)
    c0 = np.zeros(len(states), complex)
    c0[1] = 1.0
    sol = solve_ivp(rhs, (t0, t1), c0, t_eval=ts, rtol=1e-10, atol=1e-12, method="DOP853", max_step=T / 200)
    amps = np.zeros((len(ts), len(E)), complex)
    for k, m in enumerate(states):
        amps[:, m] = sol.y[k]
    P = np.abs(amps) ** 2
    eta, n_u, n_tot = photon_measures(eig, amps)
    return TrajectoryResult(
        t=ts,
        populations={"Psi_0u": P[:, rungs[0]], "Psi_0": P[:, l0], "Psi_2u": P[:, rungs[1]]},
        eta=eta,
        n_u=n_u,
        n_total=n_tot,
        norm=np.linalg.norm(amps, axis=1),
        final_state=amps[-1],
        protocol=protocol,
        dt=float("nan"),
        variant=f"multilambda-{n_rungs}",
    )
