import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpdetect.atom import BasisConfig
from vpdetect.circuit import hamiltonian_scales
from vpdetect.design import SweepGrid, boundary_points, invert_design, region_arrays, sweep, write_sweep_csv
from vpdetect.errors import DomainError

FAST = BasisConfig(n_points=512, n_levels=4)


@settings(max_examples=25, deadline=None)
@given(
    ej_over_ec1=st.floats(0.7, 1.4),
    u11=st.floats(0.05, 0.2),
    g_over_wc=st.floats(0.05, 0.6),
    wc_over=st.floats(0.8, 1.2),
    r=st.floats(0.0, 1.0),
)
def test_inversion_round_trip(ej_over_ec1, u11, g_over_wc, wc_over, r):
    """The derived circuit reproduces omega_c = wc_over * eps_eg and g/omega_c."""
    res = invert_design(ej_over_ec1, u11, g_over_wc, wc_over, r, basis=FAST)
    if not res.feasible:
        assert res.status == "infeasible" and res.design is None
        return
    sc = hamiltonian_scales(res.design)
    spec = res.spectrum
    assert sc.omega_c == pytest.approx(wc_over * spec.eps_eg, rel=1e-6)
    assert sc.g_prefactor * abs(spec.gamma_ge) / sc.omega_c == pytest.approx(g_over_wc, rel=1e-6)
    assert res.design.u12_over_ej == pytest.approx(res.design.u22_over_ej / (1 + r), rel=1e-12)


def test_reference_inversion(ref_inversion):
    r = ref_inversion
    assert r.feasible and r.status == "ok"
    assert r.u22_over_ej < 0.081
    assert r.l1_over_lj == pytest.approx(0.0, abs=1e-12)


def test_zero_coupling_is_degenerate():
    res = invert_design(0.9, 0.081, 0.0, basis=FAST)
    assert not res.feasible and res.status == "degenerate-coupling"


def test_infeasible_is_reported_not_raised():
    res = invert_design(0.9, 0.2, 0.5, basis=FAST)
    assert not res.feasible and res.status == "infeasible"
    assert res.u22_over_ej >= 0.2


def test_domain_errors():
    with pytest.raises(DomainError):
        invert_design(-1, 0.1, 0.5, basis=FAST)
    with pytest.raises(DomainError):
        SweepGrid(u11_over_ej=(0.3, 0.1))
    with pytest.raises(DomainError):
        SweepGrid(n_ec1=0)


GRID = SweepGrid(n_ec1=6, n_u11=8)


@pytest.fixture(scope="module")
def coarse():
    return sweep(GRID, workers=1)


def test_sweep_order_independent_of_workers(coarse):
    par = sweep(GRID, workers=2)
    assert [(r.x, r.y, r.feasible, r.simple_A) for r in par] == [(r.x, r.y, r.feasible, r.simple_A) for r in coarse]


def test_region_qualitative(coarse):
    """Feasible at small U11 for every E_C1; infeasible at small E_C1 and large U11;
    the lower feasibility boundary moves to larger U11 as E_C1 grows."""
    F = region_arrays(coarse, GRID)
    assert F["feasible"][:, 0].all()
    assert not F["feasible"][0, -1]
    lower = {}
    for x, y in boundary_points(coarse, GRID):
        lower.setdefault(x, y)
    ys = [lower[x] for x in sorted(lower)]
    assert len(ys) >= 4 and all(b > a for a, b in zip(ys, ys[1:]))
    # where feasible, the margin U11 - U22 is positive
    assert np.all(F["margin"][F["feasible"] == 1] > 0)
    # the simple criterion exceeds 1 in part of the feasible region
    assert np.any((F["feasible"] == 1) & (F["A"] > 1))


def test_sweep_csv(tmp_path, coarse):
    p = tmp_path / "sweep.csv"
    write_sweep_csv(coarse, p)
    rows = list(csv.DictReader(open(p)))
    assert len(rows) == GRID.n_ec1 * GRID.n_u11
    assert rows[0]["feasible"] in ("0", "1")
    infeas = [r for r in rows if r["feasible"] == "0"]
    assert infeas and all(math.isnan(float(r["l_over_lj"])) for r in infeas)
