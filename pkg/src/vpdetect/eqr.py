"""Truncated atom (x) mode Hamiltonian, its eigensystem and state labels.

Product basis ordering: index = n * n_atom + i for Fock number n and atomic
level i (0 = u, 1 = g, 2 = e, ...).  Atomic energies are measured from the
atomic ground level, so |0,u> has energy zero in the decoupled limit.

Interaction variants
--------------------
``full``     all couplings g_ij (a + a^dag) |i><j|
``rw``       energy-ordered rotating wave: keep a^dag |i><j| with e_j > e_i
             (photon emission paired with an atomic de-excitation) + h.c.
``ladder``   nearest-neighbour rotating wave: as ``rw`` but only j = i + 1;
             this is the variant that commutes with the excitation number N.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .atom import LEVEL_NAMES, AASpectrum
from .errors import DomainError, LabelingError, ResourceError, TruncationError

_MOD = "eqr-builder"

VARIANTS = ("full", "rw", "ladder")


@dataclass
class EQRModel:
    n_atom: int
    n_fock: int
    omega_c: float
    g_prefactor: float
    levels: np.ndarray
    energies: np.ndarray
    couplings: np.ndarray
    variant: str
    hamiltonian: np.ndarray
    gamma: np.ndarray
    q: np.ndarray
    counter_rotating_scale: float = 1.0

    @property
    def dim(self) -> int:
        return self.n_atom * self.n_fock

    def index(self, n: int, i: int) -> int:
        """Basis index of |n, level i>; ``i`` is a level of the atom spectrum."""
        pos = np.flatnonzero(self.levels == i)
        if not (0 <= n < self.n_fock) or len(pos) == 0:
            raise LabelingError(f"|{n},{i}> outside truncated basis", module=_MOD, operation="index")
        return n * self.n_atom + int(pos[0])

    @property
    def fock_numbers(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_fock), self.n_atom)

    @property
    def atom_levels(self) -> np.ndarray:
        return np.tile(self.levels, self.n_fock)

    def excitation_number(self) -> np.ndarray:
        """Diagonal of N = a^dag a + sum_i (i - 1)|i><i|."""
        return self.fock_numbers + self.atom_levels - 1

    def parity(self) -> np.ndarray:
        """Diagonal of exp(i pi N)."""
        return np.where(self.excitation_number() % 2 == 0, 1, -1)

    def drive_operator(self, port: str) -> np.ndarray:
        """Atomic operator (q or gamma) lifted to the product space."""
        if port == "q":
            op = self.q
        elif port == "gamma":
            op = self.gamma
        else:
            raise DomainError(f"unknown port {port!r}", module=_MOD, operation="drive_operator")
        return np.kron(np.eye(self.n_fock), op)


def _annihilation(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1)


def build_eqr(
    spec: AASpectrum,
    omega_c: float,
    g_prefactor: float,
    n_atom: int = 8,
    n_fock: int = 12,
    variant: str = "full",
    *,
    levels=None,
    couplings: np.ndarray | None = None,
    counter_rotating_scale: float | None = None,
    max_dim: int = 4096,
) -> EQRModel:
    """Assemble H = sum e_i |i><i| + omega_c a^dag a + interaction.

    ``levels`` selects a subset of atomic levels (default: the lowest
    ``n_atom``).  ``couplings`` overrides g_ij = g_prefactor * gamma_ij, e.g.
    to switch off the probe-level row.  ``counter_rotating_scale`` multiplies
    the terms dropped by the ``rw`` variant, interpolating between ``rw`` (0)
    and ``full`` (1).
    """
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {VARIANTS}", module=_MOD, operation="build_eqr")
    if levels is None:
        levels = np.arange(n_atom)
    levels = np.asarray(levels, dtype=int)
    n_atom = len(levels)
    if n_atom < 2 or levels.max() >= spec.n_levels or np.any(np.diff(levels) <= 0):
        raise DomainError(
            f"atomic levels {levels.tolist()} not available (spectrum has {spec.n_levels})",
            module=_MOD,
            operation="build_eqr",
        )
    if n_fock < 2:
        raise DomainError("n_fock must be >= 2", module=_MOD, operation="build_eqr")
    if n_atom * n_fock > max_dim:
        raise ResourceError(
            f"dimension {n_atom * n_fock} exceeds cap {max_dim}", module=_MOD, operation="build_eqr"
        )
    if not omega_c > 0:
        raise DomainError("omega_c must be positive", module=_MOD, operation="build_eqr")

    sel = np.ix_(levels, levels)
    gam = spec.gamma[sel].real.copy()
    qq = spec.q[sel].copy()
    G = g_prefactor * gam if couplings is None else np.asarray(couplings, dtype=float)
    if G.shape != (n_atom, n_atom):
        raise DomainError("coupling matrix has wrong shape", module=_MOD, operation="build_eqr")
    eps = spec.eigenvalues[levels] - spec.eigenvalues[0]

    a = _annihilation(n_fock)
    ad = a.T
    H = np.kron(np.eye(n_fock), np.diag(eps)) + np.kron(omega_c * np.diag(np.arange(n_fock)), np.eye(n_atom))

    # split the interaction into co-rotating and counter-rotating pieces
    upper = np.triu(G, 1)  # |i><j| with i < j lowers the atom
    if variant == "ladder":
        co_atom = np.diag(np.diag(G, 1), 1)
    else:
        co_atom = upper
    H_co = np.kron(ad, co_atom) + np.kron(a, co_atom.T)
    H_full = np.kron(a + ad, G)
    if variant == "full":
        lam = 1.0 if counter_rotating_scale is None else counter_rotating_scale
    else:
        lam = 0.0 if counter_rotating_scale is None else counter_rotating_scale
    H = H + H_co + lam * (H_full - H_co)

    return EQRModel(
        n_atom=n_atom,
        n_fock=n_fock,
        omega_c=float(omega_c),
        g_prefactor=float(g_prefactor),
        levels=levels,
        energies=eps,
        couplings=G,
        variant=variant,
        hamiltonian=H,
        gamma=gam,
        q=qq,
        counter_rotating_scale=float(lam),
    )


def commutator_norm(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.linalg.norm(A @ B - B @ A, 2))


def parity_commutator(model: EQRModel) -> float:
    return commutator_norm(model.hamiltonian, np.diag(model.parity().astype(float)))


def number_commutator(model: EQRModel) -> float:
    return commutator_norm(model.hamiltonian, np.diag(model.excitation_number().astype(float)))


def _eigh_by_parity(H: np.ndarray, parity: np.ndarray):
    """Diagonalize within each parity sector when H respects the symmetry.

    This keeps eigenvectors parity-definite even across accidental
    degeneracies.  Falls back to a plain solve otherwise.
    """
    D = H.shape[0]
    mask = parity[:, None] != parity[None, :]
    if np.max(np.abs(H[mask]), initial=0.0) > 1e-13:
        E, V = np.linalg.eigh(H)
        return E, V
    E = np.empty(D)
    V = np.zeros((D, D), dtype=H.dtype)
    col = 0
    blocks = []
    for p in (1, -1):
        idx = np.flatnonzero(parity == p)
        if len(idx) == 0:
            continue
        e, v = np.linalg.eigh(H[np.ix_(idx, idx)])
        blocks.append((idx, e, v))
    for idx, e, v in blocks:
        E[col : col + len(e)] = e
        V[idx, col : col + len(e)] = v
        col += len(e)
    order = np.argsort(E, kind="stable")
    return E[order], V[:, order]


@dataclass
class LabeledEigensystem:
    """Eigenpairs of an EQR model with dressed-state tags.

    Tags: ``Psi_<n>u`` (the dressed |n,u>) and ``Psi_0`` (the interacting
    vacuum of the g-e-mode subsystem, i.e. the "false vacuum").
    """

    model: EQRModel
    energies: np.ndarray
    vectors: np.ndarray
    labels: dict
    rule: str
    conflicts: list = field(default_factory=list)
    boundary_weight: dict = field(default_factory=dict)

    @property
    def overlaps(self) -> np.ndarray:
        """|<n,i|Psi_m>|^2 with rows = product basis, columns = eigenindex."""
        return np.abs(self.vectors) ** 2

    def index(self, tag: str) -> int:
        try:
            return self.labels[tag]
        except KeyError:
            raise LabelingError(f"tag {tag!r} not assigned", module=_MOD, operation="lookup") from None

    def state(self, tag: str) -> np.ndarray:
        return self.vectors[:, self.index(tag)]

    def energy(self, tag: str) -> float:
        return float(self.energies[self.index(tag)])

    def label_of(self, m: int) -> str:
        for k, v in self.labels.items():
            if v == m:
                return k
        return "unlabeled"

    def operator(self, op: np.ndarray) -> np.ndarray:
        """Matrix of a product-space operator in the eigenbasis."""
        return self.vectors.conj().T @ op @ self.vectors


def _probe_weight(model: EQRModel, V: np.ndarray) -> np.ndarray:
    u_rows = model.atom_levels == 0
    return (np.abs(V[u_rows]) ** 2).sum(axis=0)


def diagonalize_and_label(
    model: EQRModel,
    *,
    n_photon_labels: int = 4,
    vacuum_rule: str = "lowest-non-probe",
    truncation_tol: float = 1e-3,
    on_truncation: str = "warn",
    max_dim: int = 4096,
) -> LabeledEigensystem:
    """Dense eigensolve plus labeling.

    Psi_nu is the eigenstate with the largest weight on |n,u>.  For the false
    vacuum two rules are available:

    ``lowest-non-probe``  the lowest eigenstate in the parity sector of |0,g>
                          whose total weight on the probe level u is below 1/2
                          (i.e. the ground state of the coupled g-e-mode system
                          once the near-factorized Psi_nu are set aside);
    ``max-overlap``       the eigenstate with the largest |<0,g|Psi>|^2.

    The two agree at weak coupling; deep in the ultrastrong regime |0,g>
    spreads over many dressed states and only the first rule picks the
    interacting vacuum.
    """
    if model.dim > max_dim:
        raise ResourceError(f"dimension {model.dim} exceeds cap {max_dim}", module=_MOD, operation="diagonalize_and_label")
    if vacuum_rule not in ("lowest-non-probe", "max-overlap"):
        raise DomainError(f"unknown vacuum rule {vacuum_rule!r}", module=_MOD, operation="diagonalize_and_label")
    parity = model.parity()
    E, V = _eigh_by_parity(model.hamiltonian, parity)
    P = np.abs(V) ** 2

    claims = []  # (tag, index, overlap)
    if 0 in model.levels:
        for n in range(min(n_photon_labels, model.n_fock)):
            r = model.index(n, 0)
            m = int(np.argmax(P[r]))
            claims.append((f"Psi_{n}u", m, float(P[r, m])))
    if 1 in model.levels:
        r0g = model.index(0, 1)
        if vacuum_rule == "max-overlap" or 0 not in model.levels:
            m = int(np.argmax(P[r0g]))
        else:
            sector = (P[parity == parity[r0g]].sum(axis=0)) > 0.5
            cand = np.flatnonzero(sector & (_probe_weight(model, V) < 0.5))
            if len(cand) == 0:
                raise LabelingError("no candidate for the false vacuum", module=_MOD, operation="diagonalize_and_label")
            m = int(cand[0])
        claims.append(("Psi_0", m, float(P[r0g, m])))

    labels: dict = {}
    taken: dict = {}
    conflicts = []
    for tag, m, ov in sorted(claims, key=lambda c: -c[2]):
        if m in taken:
            conflicts.append((tag, taken[m], m))
            continue
        labels[tag] = m
        taken[m] = tag
    if conflicts:
        desc = ", ".join(f"{a} vs {b} on eigenstate {m}" for a, b, m in conflicts)
        raise LabelingError(f"label conflict: {desc}", module=_MOD, operation="diagonalize_and_label")
    labels = dict(sorted(labels.items()))

    # weight of labeled states on the truncation edges (top Fock state, top level)
    edge = (model.fock_numbers == model.n_fock - 1) | (model.atom_levels == model.levels[-1])
    bw = {tag: float(P[edge, m].sum()) for tag, m in labels.items()}
    worst = max(bw.values(), default=0.0)
    if worst > truncation_tol and on_truncation != "ignore":
        msg = f"labeled states carry weight {worst:.2e} on the truncation boundary (tol {truncation_tol:.0e})"
        if on_truncation == "error":
            raise TruncationError(msg, module=_MOD, operation="diagonalize_and_label")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    return LabeledEigensystem(
        model=model, energies=E, vectors=V, labels=labels, rule=vacuum_rule, conflicts=conflicts, boundary_weight=bw
    )


def decompose_state(eig: LabeledEigensystem, tag: str, threshold: float = 0.0) -> list[tuple[int, int, complex]]:
    """Components <n,i|Psi_tag> sorted by decreasing magnitude."""
    psi = eig.state(tag)
    model = eig.model
    ns, ls = model.fock_numbers, model.atom_levels
    order = np.argsort(-np.abs(psi), kind="stable")
    return [(int(ns[k]), int(ls[k]), complex(psi[k])) for k in order if abs(psi[k]) > threshold]


def two_level_rabi(omega_c: float, splitting: float, g: float, n_fock: int = 40) -> np.ndarray:
    """Spectrum of the two-level quantum Rabi model (ground level at zero)."""
    a = _annihilation(n_fock)
    sz = np.diag([0.0, splitting])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    H = np.kron(omega_c * a.T @ a, np.eye(2)) + np.kron(np.eye(n_fock), sz) + g * np.kron(a + a.T, sx)
    return np.linalg.eigvalsh(H)


def level_name(i: int) -> str:
    return LEVEL_NAMES[i] if i < len(LEVEL_NAMES) else str(i)


def write_eigen_csv(eig: LabeledEigensystem, path, n_states: int | None = None) -> None:
    model = eig.model
    n_states = len(eig.energies) if n_states is None else min(n_states, len(eig.energies))
    P = eig.overlaps
    par = model.parity()
    ns, ls = model.fock_numbers, model.atom_levels
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "energy", "label", "parity", "dominant_n", "dominant_level", "dominant_probability"])
        for m in range(n_states):
            r = int(np.argmax(P[:, m]))
            p = int(np.sign(np.sum(P[:, m] * par)))
            w.writerow([m, f"{eig.energies[m]:.12g}", eig.label_of(m), p, ns[r], level_name(ls[r]), f"{P[r, m]:.10g}"])


def write_decomposition_csv(eig: LabeledEigensystem, tag: str, path, threshold: float = 1e-10) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "atomic_level", "amplitude_re", "amplitude_im", "probability"])
        for n, i, amp in decompose_state(eig, tag, threshold):
            w.writerow([n, level_name(i), f"{amp.real:.12g}", f"{amp.imag:.12g}", f"{abs(amp) ** 2:.12g}"])
