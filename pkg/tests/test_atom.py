import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpdetect.atom import BasisConfig, check_q_gamma_identity, solve_aa, write_wavefunction_csv
from vpdetect.errors import ConvergenceError, DomainError

SMALL = BasisConfig(n_points=512, n_levels=8)


def test_harmonic_limit_oracle():
    """E_J = 0: oscillator with omega = sqrt(2 E_C1 U11), gamma_01 = sqrt(E_C1/omega)."""
    ec1, u11 = 1.2, 0.3
    spec = solve_aa(ec1, u11, 0.0, SMALL)
    w = math.sqrt(2 * ec1 * u11)
    np.testing.assert_allclose(spec.eigenvalues, w * (np.arange(8) + 0.5), rtol=1e-10)
    assert abs(spec.gamma[0, 1]) == pytest.approx(math.sqrt(ec1 / w), rel=1e-9)
    assert abs(spec.gamma[1, 2]) == pytest.approx(math.sqrt(2 * ec1 / w), rel=1e-9)
    assert abs(spec.gamma[0, 3]) < 1e-9  # only nearest neighbours couple


def test_selection_rules_and_symmetry(ref_spectrum):
    s = ref_spectrum
    assert list(s.parity[:4]) == [1, -1, 1, -1]
    same = s.parity[:, None] == s.parity[None, :]
    off = ~np.eye(s.n_levels, dtype=bool)
    assert np.max(np.abs(s.gamma[same & off])) < 1e-12
    assert np.max(np.abs(s.q[same])) < 1e-12
    np.testing.assert_allclose(s.gamma, s.gamma.T, atol=1e-13)
    np.testing.assert_allclose(s.q, -s.q.T, atol=1e-12)
    assert np.max(np.abs(s.q.real)) < 1e-12


def test_normalization_and_phase(ref_spectrum):
    s = ref_spectrum
    h = s.grid[1] - s.grid[0]
    np.testing.assert_allclose((s.wavefunctions**2).sum(axis=0) * h, 1.0, rtol=1e-12)
    pos = s.grid >= 0
    for i in range(s.n_levels):
        col = s.wavefunctions[:, i] * pos
        assert col[np.argmax(np.abs(col))] > 0


def test_identity_reference(ref_spectrum):
    assert check_q_gamma_identity(ref_spectrum) < 1e-6


@settings(max_examples=15, deadline=None)
@given(ec1=st.floats(0.7, 1.4), u11=st.floats(0.05, 0.35))
def test_identity_property(ec1, u11):
    spec = solve_aa(ec1, u11, 1.0, BasisConfig(n_points=1024, n_levels=8))
    assert check_q_gamma_identity(spec) < 1e-6


def test_refinement_converged(ref_spectrum):
    assert ref_spectrum.convergence < 1e-9
    coarse = solve_aa(ref_spectrum.ec1, ref_spectrum.u11, 1.0, BasisConfig(n_points=1024, n_levels=16))
    np.testing.assert_allclose(coarse.eigenvalues, ref_spectrum.eigenvalues, atol=1e-9)


def test_unconverged_grid_raises():
    with pytest.raises(ConvergenceError):
        solve_aa(1.1, 0.081, 1.0, BasisConfig(n_points=64, n_levels=8, tol=1e-10))


@pytest.mark.parametrize("args", [(0.0, 0.1, 1.0), (1.0, -0.1, 1.0), (1.0, 0.1, -1.0), (1.0, float("nan"), 1.0)])
def test_domain_errors(args):
    with pytest.raises(DomainError):
        solve_aa(*args, SMALL)


def test_basis_validation():
    with pytest.raises(DomainError):
        BasisConfig(n_points=102)
    with pytest.raises(DomainError):
        BasisConfig(n_points=64, n_levels=20)


def test_wavefunction_csv(tmp_path, ref_spectrum):
    p = tmp_path / "wf.csv"
    write_wavefunction_csv(ref_spectrum, p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["gamma", "V(gamma)", "psi_u", "psi_g", "psi_e", "psi_f"]
    assert len(rows) == len(ref_spectrum.grid) + 1
