import numpy as np
import pytest

from vpdetect.eqr import (
    build_eqr,
    decompose_state,
    diagonalize_and_label,
    number_commutator,
    parity_commutator,
    two_level_rabi,
    write_decomposition_csv,
    write_eigen_csv,
)
from vpdetect.errors import DomainError, LabelingError, ResourceError, TruncationError


def _jc_reference(eps_g, eps_e, omega, g, n_fock):
    """Analytic JC spectrum of {g, e} x Fock(n_fock): vacuum plus doublets."""
    d = eps_e - eps_g - omega
    E = [eps_g]
    for n in range(1, n_fock):
        mid = eps_g + n * omega + d / 2
        r = np.sqrt(d * d / 4 + g * g * n)
        E += [mid - r, mid + r]
    E.append(eps_e + (n_fock - 1) * omega)  # |n_max, e> has no partner in the box
    return np.sort(E)


@pytest.mark.parametrize("variant", ["rw", "ladder"])
def test_jc_doublets_two_level(ref_spectrum, ref_scales, variant):
    m = build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, n_fock=10, variant=variant, levels=[1, 2])
    E = np.linalg.eigvalsh(m.hamiltonian)
    g = m.couplings[0, 1]
    ref = _jc_reference(m.energies[0], m.energies[1], m.omega_c, g, 10)
    np.testing.assert_allclose(E, ref, atol=1e-10)


def test_full_two_level_is_rabi(ref_spectrum, ref_scales):
    m = build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, n_fock=30, variant="full", levels=[1, 2])
    E = np.linalg.eigvalsh(m.hamiltonian) - m.energies[0]
    w, s, g = m.omega_c, m.energies[1] - m.energies[0], m.couplings[0, 1]
    # element-by-element construction, basis (n, sigma) -> 2 n + sigma
    H = np.zeros((60, 60))
    for n in range(30):
        for sg in range(2):
            H[2 * n + sg, 2 * n + sg] = n * w + sg * s
            if n + 1 < 30:
                H[2 * (n + 1) + (1 - sg), 2 * n + sg] = H[2 * n + sg, 2 * (n + 1) + (1 - sg)] = g * np.sqrt(n + 1)
    np.testing.assert_allclose(E, np.linalg.eigvalsh(H), atol=1e-10)
    np.testing.assert_allclose(two_level_rabi(w, s, g, n_fock=30), np.linalg.eigvalsh(H), atol=1e-10)


def test_hamiltonian_oracle_small():
    """Element-wise check of the 3-level x 3-photon matrix."""

    class Spec:
        eigenvalues = np.array([0.0, 1.0, 1.3])
        gamma = np.array([[0, 0.2, 0], [0.2, 0, 0.9], [0, 0.9, 0]])
        q = np.zeros((3, 3), complex)
        n_levels = 3

    m = build_eqr(Spec, 0.3, 0.5, n_atom=3, n_fock=3, variant="full")
    H = m.hamiltonian
    assert H[m.index(0, 1), m.index(0, 1)] == pytest.approx(1.0)
    assert H[m.index(2, 2), m.index(2, 2)] == pytest.approx(1.3 + 0.6)
    assert H[m.index(1, 0), m.index(0, 1)] == pytest.approx(0.5 * 0.2)
    assert H[m.index(2, 1), m.index(1, 2)] == pytest.approx(0.5 * 0.9 * np.sqrt(2))
    assert H[m.index(1, 2), m.index(0, 1)] == pytest.approx(0.5 * 0.9)  # counter-rotating a^dag |e><g|
    rw = build_eqr(Spec, 0.3, 0.5, n_atom=3, n_fock=3, variant="rw").hamiltonian
    assert rw[m.index(1, 2), m.index(0, 1)] == 0.0
    assert rw[m.index(1, 1), m.index(0, 2)] == pytest.approx(0.45)  # co-rotating a^dag |g><e|
    assert rw[m.index(1, 1), m.index(0, 0)] == 0.0  # a^dag |g><u| raises the atom: dropped
    assert rw[m.index(1, 0), m.index(0, 1)] == pytest.approx(0.1)
    np.testing.assert_allclose(H, H.T)


def test_parity_conserved(ref_spectrum, ref_scales):
    for v in ("full", "rw", "ladder"):
        m = build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, 8, 12, v)
        assert parity_commutator(m) < 1e-10


def test_excitation_number_conserved_only_by_ladder(ref_spectrum, ref_scales):
    lad = build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, 8, 12, "ladder")
    assert number_commutator(lad) < 1e-10
    # energy-ordered RW keeps a^dag |u><f| (gamma_uf != 0), which changes N by 2
    rw = build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, 8, 12, "rw")
    assert number_commutator(rw) > 0.1


def test_counter_rotating_scale_interpolates(ref_spectrum, ref_scales):
    args = (ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, 6, 8)
    full = build_eqr(*args, "full").hamiltonian
    rw = build_eqr(*args, "rw").hamiltonian
    half = build_eqr(*args, "rw", counter_rotating_scale=0.5).hamiltonian
    np.testing.assert_allclose(half, 0.5 * (full + rw), atol=1e-14)
    np.testing.assert_allclose(build_eqr(*args, "rw", counter_rotating_scale=1.0).hamiltonian, full, atol=1e-14)


def test_labels_reference(ref_eig_small):
    full, rw = ref_eig_small
    assert full.labels["Psi_0u"] == 0
    for e in (full, rw):
        assert set(e.labels) == {"Psi_0", "Psi_0u", "Psi_1u", "Psi_2u", "Psi_3u"}
        par = e.model.parity()
        p0 = e.state("Psi_0")
        assert np.sum(np.abs(p0[par == par[e.model.index(0, 1)]]) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_rw_vacuum_without_probe_coupling(ref_spectrum, ref_scales):
    """With the u row switched off, the RW false vacuum is |0,g> exactly (no photons),
    while the full model's one carries virtual photons."""
    G = ref_scales.g_prefactor * ref_spectrum.gamma[:8, :8].copy()
    G[0, :] = G[:, 0] = 0
    out = {}
    for v in ("rw", "full"):
        e = diagonalize_and_label(
            build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, 8, 12, v, couplings=G), on_truncation="ignore"
        )
        p = np.abs(e.state("Psi_0")) ** 2
        out[v] = float(p @ e.model.fock_numbers)
    assert out["rw"] < 1e-20
    assert out["full"] > 0.05


def test_truncation_convergence(ref_spectrum, ref_scales):
    E = []
    for na, nf in ((10, 16), (12, 16), (14, 20)):
        e = diagonalize_and_label(build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, na, nf))
        E.append((e.energy("Psi_0"), e.energy("Psi_2u")))
    assert np.max(np.abs(np.diff(E, axis=0))) < 1e-6


def test_truncation_guard(ref_spectrum, ref_scales):
    m = build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, 4, 4)
    with pytest.warns(RuntimeWarning):
        diagonalize_and_label(m)
    with pytest.raises(TruncationError):
        diagonalize_and_label(m, on_truncation="error")


def test_label_conflict_reported(ref_spectrum, ref_scales):
    C = ref_scales.g_prefactor * ref_spectrum.gamma[:3, :3].copy()
    C[0, 1] = C[1, 0] = 0.65
    m = build_eqr(ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor, 3, 8, couplings=C)
    with pytest.raises(LabelingError, match="conflict"):
        diagonalize_and_label(m, on_truncation="ignore")


def test_domain_and_resource_errors(ref_spectrum, ref_scales):
    args = (ref_spectrum, ref_scales.omega_c, ref_scales.g_prefactor)
    with pytest.raises(DomainError):
        build_eqr(*args, 8, 12, "bogus")
    with pytest.raises(DomainError):
        build_eqr(*args, 40, 12)
    with pytest.raises(ResourceError):
        build_eqr(*args, 16, 300, max_dim=4096)


def test_decomposition_and_csv(tmp_path, ref_eig_small):
    full, _ = ref_eig_small
    parts = decompose_state(full, "Psi_0")
    assert sum(abs(a) ** 2 for _, _, a in parts) == pytest.approx(1.0, abs=1e-12)
    # parity: every component has N = n + i - 1 of one parity
    assert len({(n + i - 1) % 2 for n, i, a in parts if abs(a) > 1e-12}) == 1
    write_decomposition_csv(full, "Psi_0", tmp_path / "d.csv")
    write_eigen_csv(full, tmp_path / "e.csv", n_states=10)
    assert (tmp_path / "d.csv").read_text().startswith("n,atomic_level,amplitude_re,amplitude_im,probability")
    assert len((tmp_path / "e.csv").read_text().splitlines()) == 11


def test_zero_coupling_labels_exact(ref_spectrum, ref_scales):
    e = diagonalize_and_label(build_eqr(ref_spectrum, ref_scales.omega_c, 0.0, 6, 8))
    P = e.overlaps
    m = e.model
    for n in range(4):
        assert P[m.index(n, 0), e.index(f"Psi_{n}u")] == pytest.approx(1.0, abs=1e-14)
    assert decompose_state(e, "Psi_0", 1e-12) == [(0, 1, pytest.approx(1.0))]
