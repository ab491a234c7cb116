import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpdetect.circuit import (
    CircuitDesign,
    from_physical,
    hamiltonian_scales,
    inductance_matrix,
    inductances_from_energies,
    invert_inductance,
    to_physical,
)
from vpdetect.constants import E_CHARGE, PHI0_RED, PLANCK
from vpdetect.errors import ConfigurationError, DomainError, InfeasibleDesignError

pos = st.floats(min_value=0.05, max_value=200.0)


@given(L=pos, L1=st.floats(min_value=0.0, max_value=200.0), L2=pos)
def test_closed_form_inverse_matches_numeric_inverse(L, L1, L2):
    M = inductance_matrix(L, L1, L2)
    inv = invert_inductance(L, L1, L2)
    assert M.symmetric and inv.symmetric
    # the inductive energy matrix (units of E_J) is the numeric inverse
    np.testing.assert_allclose(inv.array(), np.linalg.inv(M.array()), rtol=1e-10, atol=1e-14)
    assert inv.is_positive_definite()


@given(L=pos, L1=st.floats(min_value=0.0, max_value=200.0), L2=pos)
def test_inductances_round_trip(L, L1, L2):
    inv = invert_inductance(L, L1, L2)
    back = inductances_from_energies(inv.l11, inv.l12, inv.l22)
    np.testing.assert_allclose(back, (L, L1, L2), rtol=1e-8, atol=1e-9 * max(L, L1, L2))


@pytest.mark.parametrize("args", [(0.0, 0.0, 1.0), (1.0, -0.1, 1.0), (1.0, 0.0, -2.0)])
def test_invert_inductance_rejects_non_physical(args):
    with pytest.raises(InfeasibleDesignError):
        invert_inductance(*args)


def test_design_rejects_bias_and_bad_inputs():
    with pytest.raises(DomainError):
        CircuitDesign(0.9, 0.081, 0.5, bias_qx=0.1)
    with pytest.raises(DomainError):
        CircuitDesign(-0.9, 0.081, 0.5)
    with pytest.raises(ConfigurationError):
        CircuitDesign(0.9, 0.081, 0.5, ej_over_ec2=1.0)
    # U12 = U22 > U11 with L1 = 0 gives a negative L1 -> infeasible
    with pytest.raises(InfeasibleDesignError):
        CircuitDesign(0.9, 0.081, 0.5, ej_over_ec2=0.8, u22_over_ej=0.1, u12_over_ej=0.1)


def test_scales_require_derived_fields():
    with pytest.raises(ConfigurationError):
        hamiltonian_scales(CircuitDesign(0.9, 0.081, 0.5))


def test_scales_oracle():
    d = CircuitDesign(0.9, 0.081, 0.5, ej_over_ec2=0.8, u22_over_ej=0.02, u12_over_ej=0.02)
    sc = hamiltonian_scales(d)
    ec2 = 1 / 0.8
    assert sc.omega_c == pytest.approx(math.sqrt(2 * ec2 * 0.02), rel=1e-14)
    assert sc.g_prefactor == pytest.approx(0.02 * (ec2 / (2 * 0.02)) ** 0.25, rel=1e-14)
    assert sc.ec1 == pytest.approx(1 / 0.9)


def test_physical_units_oracle():
    """At E_J/h = 10 GHz: L_J = (hbar/2e)^2/E_J, I_C = E_J/(hbar/2e), C = 2e^2/E_C."""
    d = CircuitDesign(0.9, 0.081, 0.5, ej_over_ec2=0.8, u22_over_ej=0.02, u12_over_ej=0.02)
    p = to_physical(d, 10.0)
    ej = PLANCK * 10e9
    assert p.lj_nh == pytest.approx(PHI0_RED**2 / ej * 1e9, rel=1e-12)
    assert p.ic_na == pytest.approx(ej / PHI0_RED * 1e9, rel=1e-12)
    assert p.c1_ff == pytest.approx(2 * E_CHARGE**2 * 0.9 / ej * 1e15, rel=1e-12)
    assert p.lj_nh == pytest.approx(16.35, abs=0.01)
    assert p.c1_ff == pytest.approx(6.97, abs=0.01)


@settings(max_examples=50, deadline=None)
@given(
    ej_over_ec1=st.floats(0.3, 3.0),
    u11=st.floats(0.03, 0.5),
    frac=st.floats(0.05, 0.95),
    r=st.floats(0.0, 2.0),
    ej_over_ec2=st.floats(0.2, 5.0),
    ej_ghz=st.floats(1.0, 50.0),
)
def test_physical_round_trip(ej_over_ec1, u11, frac, r, ej_over_ec2, ej_ghz):
    s = 1 / (1 + r)
    u22 = frac * u11 / s  # keeps U11 U22 - U12^2 > 0 and L1 = r L >= 0
    u12 = s * u22
    try:
        d = CircuitDesign(ej_over_ec1, u11, 0.5, l1_over_l=r, ej_over_ec2=ej_over_ec2, u22_over_ej=u22, u12_over_ej=u12)
    except InfeasibleDesignError:
        return
    back = from_physical(to_physical(d, ej_ghz), 0.5)
    for k in ("ej_over_ec1", "u11_over_ej", "ej_over_ec2", "u22_over_ej", "u12_over_ej"):
        assert getattr(back, k) == pytest.approx(getattr(d, k), rel=1e-6)


def test_to_physical_infeasible():
    # L1 = 0 with U22 close to U11 is still fine, but once the derived design is
    # replaced by one with U11 <= U22 the conversion refuses it
    d = CircuitDesign(0.9, 0.081, 0.5, ej_over_ec2=0.8, u22_over_ej=0.02, u12_over_ej=0.02)
    object.__setattr__(d, "u22_over_ej", 0.1)
    object.__setattr__(d, "u12_over_ej", 0.1)
    with pytest.raises(InfeasibleDesignError):
        to_physical(d, 10.0)
