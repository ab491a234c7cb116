"""Measurement budget: thermal background, dephasing, emission and SNR time.

Frequencies are cyclic (GHz, i.e. omega / 2 pi); rates are angular (1/s).
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass

from .circuit import PhysicalCircuit
from .constants import HBAR, K_B, PLANCK, TWO_PI
from .errors import DomainError

_MOD = "measurement"


def thermal_stats(freq_ghz: float, theta_mk: float) -> tuple[float, float]:
    """Mean thermal occupation and probability of exactly two photons."""
    if not freq_ghz > 0 or theta_mk < 0:
        raise DomainError("frequency must be positive and temperature non-negative", module=_MOD, operation="thermal_stats")
    if theta_mk == 0:
        return 0.0, 0.0
    x = PLANCK * freq_ghz * 1e9 / (K_B * theta_mk * 1e-3)
    n = 1.0 / math.expm1(x)
    return n, n * n / (1 + n) ** 3


def dephasing_penalty(kappa: float, T: float, tau: float) -> float:
    """Transfer probability 1/3 + 2/3 exp(-3 kappa_phi T^2 / (16 tau)), kappa_phi = 3 kappa / 2."""
    if kappa < 0 or not (T > 0 and tau > 0):
        raise DomainError("kappa >= 0, T > 0 and tau > 0 required", module=_MOD, operation="dephasing_penalty")
    kappa_phi = 1.5 * kappa
    return 1 / 3 + 2 / 3 * math.exp(-3 * kappa_phi * T * T / (16 * tau))


@dataclass(frozen=True)
class Emission:
    n_out: float
    P_m: float
    P_m_alt: float
    n_m: float
    Q: float

    @property
    def power_ratio(self) -> float:
        """P_m(2 hbar w/(3T + t_m)) over P_m(2 hbar w kappa / 2 pi)."""
        return self.P_m / self.P_m_alt


def emission_estimates(p2_transfer: float, kappa: float, freq_ghz: float, t_m: float, T: float) -> Emission:
    """Photons emitted by the double decay and the corresponding power."""
    if not (kappa > 0 and freq_ghz > 0 and t_m >= 0 and T > 0) or not 0 <= p2_transfer <= 1:
        raise DomainError("emission inputs out of domain", module=_MOD, operation="emission_estimates")
    w = TWO_PI * freq_ghz * 1e9
    n_out = 2 * p2_transfer * -math.expm1(-kappa * t_m)
    P_m = 2 * HBAR * w / (3 * T + t_m)
    P_alt = 2 * HBAR * w * kappa / TWO_PI
    return Emission(n_out=n_out, P_m=P_m, P_m_alt=P_alt, n_m=P_m / (kappa * HBAR * w), Q=w / kappa)


def snr_time(P_m: float, t_noise_k: float, kappa: float) -> float:
    """Averaging time for unit SNR against amplifier noise k_B T_N per unit bandwidth."""
    if not (P_m > 0 and t_noise_k > 0 and kappa > 0):
        raise DomainError("snr inputs must be positive", module=_MOD, operation="snr_time")
    r = P_m / (K_B * t_noise_k * kappa)
    return 1.0 / (kappa * r * r)


@dataclass(frozen=True)
class MeasurementEstimate:
    freq_ghz: float
    theta_eff_mk: float
    T_s: float
    tau_s: float
    t_m_s: float
    kappa: float
    kappa_phi: float
    n_th: float
    p2_th: float
    p2_transfer: float
    n_out: float
    P_m: float
    P_m_alt: float
    n_m: float
    Q: float
    t_noise_k: float
    tau_m: float

    @property
    def n_m_over_n_th(self) -> float:
        return self.n_m / self.n_th if self.n_th > 0 else math.inf


def measurement_budget(
    freq_ghz: float,
    ej_ghz: float = 10.0,
    *,
    theta_mk: float = 50.0,
    t_noise_k: float = 2.0,
    T_ej: float = 3000.0,
    tau_over_T: float = 0.7,
    t_m_ej: float = 4.0e4,
    kappa: float | None = None,
) -> MeasurementEstimate:
    """Evaluate the full budget for a mode at ``freq_ghz``.

    Times given in units of 1/E_J are converted with E_J/hbar = 2 pi ej_ghz;
    the decay rate defaults to kappa = 1/(3T).
    """
    if not ej_ghz > 0:
        raise DomainError("ej_ghz must be positive", module=_MOD, operation="measurement_budget")
    ej_rate = TWO_PI * ej_ghz * 1e9
    T = T_ej / ej_rate
    t_m = t_m_ej / ej_rate
    tau = tau_over_T * T
    kappa = 1 / (3 * T) if kappa is None else kappa
    n_th, p2_th = thermal_stats(freq_ghz, theta_mk)
    p2 = dephasing_penalty(kappa, T, tau)
    em = emission_estimates(p2, kappa, freq_ghz, t_m, T)
    return MeasurementEstimate(
        freq_ghz=freq_ghz,
        theta_eff_mk=theta_mk,
        T_s=T,
        tau_s=tau,
        t_m_s=t_m,
        kappa=kappa,
        kappa_phi=1.5 * kappa,
        n_th=n_th,
        p2_th=p2_th,
        p2_transfer=p2,
        n_out=em.n_out,
        P_m=em.P_m,
        P_m_alt=em.P_m_alt,
        n_m=em.n_m,
        Q=em.Q,
        t_noise_k=t_noise_k,
        tau_m=snr_time(em.P_m, t_noise_k, kappa),
    )


def tabulated_frequency(freq_ghz: float, resolution_ghz: float = 0.1) -> float:
    """Mode frequency rounded to the precision at which it is tabulated."""
    return round(freq_ghz / resolution_ghz) * resolution_ghz


TABLE_COLUMNS = [
    "label",
    "L_nH",
    "L2_nH",
    "C2_fF",
    "Z2_kOhm",
    "eps_eg_GHz",
    "freq_used_GHz",
    "n_th",
    "p2_th",
    "n_th_exact_freq",
    "n_m",
    "n_m_over_n_th",
    "Q",
    "P_m_W",
    "P_m_alt_W",
    "p2_transfer",
    "t_m_s",
    "tau_m_s",
]


def table_row(label: str, phys: PhysicalCircuit, est: MeasurementEstimate, exact: MeasurementEstimate) -> dict:
    """One row of the physical-characterization table.

    ``est`` is evaluated at the tabulated (rounded) mode frequency and
    ``exact`` at the computed one; both are reported.
    """
    return {
        "label": label,
        "L_nH": phys.l_nh,
        "L2_nH": phys.l2_nh,
        "C2_fF": phys.c2_ff,
        "Z2_kOhm": phys.z2_kohm,
        "eps_eg_GHz": phys.wc_ghz,
        "freq_used_GHz": est.freq_ghz,
        "n_th": est.n_th,
        "p2_th": est.p2_th,
        "n_th_exact_freq": exact.n_th,
        "n_m": est.n_m,
        "n_m_over_n_th": est.n_m_over_n_th,
        "Q": est.Q,
        "P_m_W": est.P_m,
        "P_m_alt_W": est.P_m_alt,
        "p2_transfer": est.p2_transfer,
        "t_m_s": est.t_m_s,
        "tau_m_s": est.tau_m,
    }


def write_measurement_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for r in rows:
            w.writerow([r[c] if isinstance(r[c], str) else f"{r[c]:.10g}" for c in TABLE_COLUMNS])


def estimate_dict(est: MeasurementEstimate) -> dict:
    d = asdict(est)
    d["n_m_over_n_th"] = est.n_m_over_n_th
    return d
