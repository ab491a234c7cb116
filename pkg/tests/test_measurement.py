import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vpdetect.constants import HBAR, K_B, PLANCK
from vpdetect.errors import DomainError
from vpdetect.measurement import (
    TABLE_COLUMNS,
    dephasing_penalty,
    emission_estimates,
    measurement_budget,
    snr_time,
    tabulated_frequency,
    thermal_stats,
    write_measurement_csv,
)


@given(f=st.floats(1.0, 20.0), theta=st.floats(5.0, 100.0))
def test_thermal_stats_brute_force(f, theta):
    """Against an explicit 200-term Bose-Einstein sum (n_bar <= ~1.6 here, so the
    truncated tail is below machine precision)."""
    x = math.exp(-PLANCK * f * 1e9 / (K_B * theta * 1e-3))
    n = np.arange(200)
    p = (1 - x) * x**n
    n_bar, p2 = thermal_stats(f, theta)
    assert n_bar == pytest.approx(float(n @ p), rel=1e-10, abs=1e-14)
    assert p2 == pytest.approx(float(p[2]), rel=1e-10, abs=1e-14)


def test_thermal_zero_temperature():
    assert thermal_stats(5.0, 0.0) == (0.0, 0.0)


def test_dephasing_limits():
    assert dephasing_penalty(0.0, 1.0, 0.7) == pytest.approx(1.0)
    assert dephasing_penalty(1e6, 1.0, 0.7) == pytest.approx(1 / 3)
    k, T, tau = 2e5, 4.77e-8, 0.7 * 4.77e-8
    assert dephasing_penalty(k, T, tau) == pytest.approx(1 / 3 + 2 / 3 * math.exp(-3 * 1.5 * k * T * T / (16 * tau)))


def test_emission_and_snr_oracles():
    f, kappa, t_m, T, p2 = 2.0, 1e6, 6e-7, 5e-8, 0.9
    em = emission_estimates(p2, kappa, f, t_m, T)
    w = 2 * math.pi * f * 1e9
    assert em.n_out == pytest.approx(2 * p2 * (1 - math.exp(-kappa * t_m)))
    assert em.P_m == pytest.approx(2 * HBAR * w / (3 * T + t_m))
    assert em.P_m_alt == pytest.approx(2 * HBAR * w * kappa / (2 * math.pi))
    assert em.n_m == pytest.approx(em.P_m / (kappa * HBAR * w))
    assert em.Q == pytest.approx(w / kappa)
    r = em.P_m / (K_B * 2.0 * kappa)
    assert snr_time(em.P_m, 2.0, kappa) == pytest.approx(1 / (kappa * r * r))


def test_budget_defaults_use_kappa_one_over_3T():
    est = measurement_budget(2.0, 10.0)
    T = 3000 / (2 * math.pi * 10e9)
    assert est.T_s == pytest.approx(T)
    assert est.kappa == pytest.approx(1 / (3 * T))
    assert est.kappa_phi == pytest.approx(1.5 * est.kappa)
    assert est.n_m_over_n_th == pytest.approx(est.n_m / est.n_th)


@pytest.mark.parametrize(
    "call",
    [
        lambda: thermal_stats(0.0, 50),
        lambda: thermal_stats(1.0, -1),
        lambda: dephasing_penalty(-1, 1, 1),
        lambda: emission_estimates(1.5, 1, 1, 1, 1),
        lambda: snr_time(0, 1, 1),
        lambda: measurement_budget(2.0, 0.0),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_tabulated_frequency():
    assert tabulated_frequency(2.0043, 0.1) == pytest.approx(2.0)
    assert tabulated_frequency(2.2250, 0.1) == pytest.approx(2.2)


def test_csv(tmp_path):
    row = {c: 1.0 for c in TABLE_COLUMNS}
    row["label"] = "x"
    write_measurement_csv([row], tmp_path / "m.csv")
    rows = list(csv.reader(open(tmp_path / "m.csv")))
    assert rows[0] == TABLE_COLUMNS and rows[1][0] == "x"
