"""Shared fixtures: the reference design (E_J/E_C1 = 0.9, U11/E_J = 0.081,
g/omega_c = 0.5, omega_c = eps_eg) solved once per session."""

import time

import pytest

from vpdetect.atom import BasisConfig, solve_aa
from vpdetect.circuit import hamiltonian_scales
from vpdetect.design import invert_design
from vpdetect.dynamics import calibrate_protocol, evolve
from vpdetect.eqr import build_eqr, diagonalize_and_label

REF = dict(ej_over_ec1=0.9, u11_over_ej=0.081, g_over_wc=0.5)


@pytest.fixture(scope="session")
def ref_spectrum():
    return solve_aa(1 / REF["ej_over_ec1"], REF["u11_over_ej"], 1.0, BasisConfig(n_levels=16))


@pytest.fixture(scope="session")
def ref_inversion(ref_spectrum):
    return invert_design(REF["ej_over_ec1"], REF["u11_over_ej"], REF["g_over_wc"], spectrum=ref_spectrum)


@pytest.fixture(scope="session")
def ref_scales(ref_inversion):
    return hamiltonian_scales(ref_inversion.design)


def _eig(spec, sc, n_atom, n_fock, variant):
    return diagonalize_and_label(build_eqr(spec, sc.omega_c, sc.g_prefactor, n_atom, n_fock, variant), on_truncation="ignore")


@pytest.fixture(scope="session")
def ref_eig_small(ref_spectrum, ref_scales):
    """(full, rw) eigensystems at the merit truncation 8 x 12."""
    return _eig(ref_spectrum, ref_scales, 8, 12, "full"), _eig(ref_spectrum, ref_scales, 8, 12, "rw")


@pytest.fixture(scope="session")
def ref_eig_dyn(ref_spectrum, ref_scales):
    """(full, rw) eigensystems at the dynamics truncation 12 x 16."""
    return _eig(ref_spectrum, ref_scales, 12, 16, "full"), _eig(ref_spectrum, ref_scales, 12, 16, "rw")


@pytest.fixture(scope="session")
def ref_trajectories(ref_eig_dyn):
    """STIRAP through the charge port, Omega0 T = 15, T = 3000, tau = 0.7 T.

    The rotating-wave run reuses the pulse amplitudes calibrated on the full
    model.
    """
    full, rw = ref_eig_dyn
    prot = calibrate_protocol(full, "stirap", "q", 15 / 3000, 3000.0, 0.7)
    t0 = time.perf_counter()
    res_full = evolve(full, prot, 0.02)
    res_full.meta["elapsed_s"] = time.perf_counter() - t0
    prot_rw = calibrate_protocol(rw, "stirap", "q", 15 / 3000, 3000.0, 0.7, amplitudes=(prot.wp_max, prot.ws_max))
    t0 = time.perf_counter()
    res_rw = evolve(rw, prot_rw, 0.02)
    res_rw.meta["elapsed_s"] = time.perf_counter() - t0
    return res_full, res_rw
