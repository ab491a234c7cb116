"""Artificial-atom spectrum: E_C1 q^2 - E_J cos(gamma) + U11 gamma^2 / 2.

The phase gamma lives on the whole real axis; the harmonic confinement keeps
the low-lying wavefunctions far from the edges of a finite box, so a uniform
Fourier (pseudo-spectral) grid is accurate.  At the symmetric bias point the
potential is even, and the grid is chosen symmetric about gamma = 0 so the
problem splits into even and odd blocks of half the size.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConvergenceError, DomainError

_MOD = "aa-solver"

LEVEL_NAMES = ("u", "g", "e", "f")


@dataclass(frozen=True)
class BasisConfig:
    n_points: int = 2048
    half_width: float = 8 * math.pi
    n_levels: int = 8
    tol: float = 1e-7
    check_convergence: bool = True

    def __post_init__(self):
        if self.n_points < 64 or self.n_points % 4:
            raise DomainError("n_points must be a multiple of 4 and >= 64", module=_MOD, operation="BasisConfig")
        if not self.half_width > 0:
            raise DomainError("half_width must be positive", module=_MOD, operation="BasisConfig")
        if self.n_levels < 3 or self.n_levels > self.n_points // 4:
            raise DomainError("n_levels out of range", module=_MOD, operation="BasisConfig")


@dataclass
class AASpectrum:
    """Eigenvalues (ascending, E_J units) and dipole matrices of the atom.

    ``gamma`` is real symmetric and ``q`` purely imaginary antisymmetric under
    the real-wavefunction phase convention.  Wavefunctions are sampled on
    ``grid`` and normalized as continuum functions (sum |psi|^2 dgamma = 1).
    """

    eigenvalues: np.ndarray
    gamma: np.ndarray
    q: np.ndarray
    parity: np.ndarray
    grid: np.ndarray
    potential: np.ndarray
    wavefunctions: np.ndarray
    ec1: float
    u11: float
    ej: float
    basis: BasisConfig
    convergence: float = float("nan")
    meta: dict = field(default_factory=dict)

    @property
    def n_levels(self) -> int:
        return len(self.eigenvalues)

    @property
    def eps_eg(self) -> float:
        return float(self.eigenvalues[2] - self.eigenvalues[1])

    @property
    def eps_gu(self) -> float:
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    @property
    def gamma_ge(self) -> float:
        return float(self.gamma[1, 2])

    @property
    def gamma_ug(self) -> float:
        return float(self.gamma[0, 1])


def _fourier_kinetic(n: int, h: float) -> np.ndarray:
    """Dense matrix of q^2 = -d^2/dgamma^2 on a periodic grid (circulant)."""
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    col = np.fft.ifft(k**2).real
    idx = np.arange(n)
    return col[(idx[:, None] - idx[None, :]) % n]


def _grid(n: int, half: float) -> tuple[np.ndarray, float]:
    h = 2 * half / n
    return -half + h * np.arange(n), h


def _parity_blocks(H: np.ndarray):
    """Project H onto the even and odd subspaces of the reflection j -> -j mod n.

    Returns (H_even, H_odd, expand_even, expand_odd) where the expand
    functions map block eigenvectors back to grid vectors.
    """
    n = H.shape[0]
    m = n // 2
    j = np.arange(1, m)
    jr = n - j
    s = 1 / math.sqrt(2)
    # even basis: e_0, e_m, (e_j + e_{n-j})/sqrt2 ; odd basis: (e_j - e_{n-j})/sqrt2
    He = np.empty((m + 1, m + 1))
    # H applied to even basis vectors
    HPe = np.empty((n, m + 1))
    HPe[:, 0] = H[:, 0]
    HPe[:, 1] = H[:, m]
    HPe[:, 2:] = (H[:, j] + H[:, jr]) * s
    He[0] = HPe[0]
    He[1] = HPe[m]
    He[2:] = (HPe[j] + HPe[jr]) * s
    HPo = (H[:, j] - H[:, jr]) * s
    Ho = (HPo[j] - HPo[jr]) * s

    def expand_even(v):
        out = np.zeros((n, v.shape[1]))
        out[0] = v[0]
        out[m] = v[1]
        out[j] = v[2:] * s
        out[jr] = v[2:] * s
        return out

    def expand_odd(v):
        out = np.zeros((n, v.shape[1]))
        out[j] = v * s
        out[jr] = -v * s
        return out

    return He, Ho, expand_even, expand_odd


def _lowest_states(ec1: float, u11: float, ej: float, n: int, half: float, k: int):
    x, h = _grid(n, half)
    V = -ej * np.cos(x) + 0.5 * u11 * x**2
    H = ec1 * _fourier_kinetic(n, h)
    H[np.diag_indices(n)] += V
    He, Ho, exp_e, exp_o = _parity_blocks(H)
    we, ve = linalg.eigh(He, subset_by_index=[0, min(k, He.shape[0]) - 1])
    wo, vo = linalg.eigh(Ho, subset_by_index=[0, min(k, Ho.shape[0]) - 1])
    w = np.concatenate((we, wo))
    vecs = np.concatenate((exp_e(ve), exp_o(vo)), axis=1)
    par = np.concatenate((np.ones(len(we), int), -np.ones(len(wo), int)))
    order = np.argsort(w, kind="stable")[:k]
    return x, h, V, w[order], vecs[:, order], par[order]


def _fix_phase(vecs: np.ndarray, x: np.ndarray) -> np.ndarray:
    # positive at the largest-magnitude sample; for odd states the two mirror
    # samples tie, and the one on gamma >= 0 is used
    mask = x >= 0
    for i in range(vecs.shape[1]):
        m = np.argmax(np.abs(vecs[:, i]) * mask)
        if vecs[m, i] < 0:
            vecs[:, i] *= -1
    return vecs


def _spectral_derivative(vecs: np.ndarray, h: float) -> np.ndarray:
    n = vecs.shape[0]
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    k[n // 2] = 0.0  # Nyquist mode has no odd-symmetric derivative
    return np.fft.ifft(1j * k[:, None] * np.fft.fft(vecs, axis=0), axis=0)


def solve_aa(ec1: float, u11: float, ej: float = 1.0, basis: BasisConfig | None = None) -> AASpectrum:
    """Diagonalize the artificial atom; energies in any consistent unit (E_J = 1 by default)."""
    basis = basis or BasisConfig()
    if not (ec1 > 0 and u11 > 0) or ej < 0 or not all(map(math.isfinite, (ec1, u11, ej))):
        raise DomainError(f"invalid atom energies ec1={ec1}, u11={u11}, ej={ej}", module=_MOD, operation="solve_aa")
    k = basis.n_levels
    x, h, V, w, vecs, par = _lowest_states(ec1, u11, ej, basis.n_points, basis.half_width, k)
    vecs = _fix_phase(vecs, x)

    gamma = vecs.T @ (x[:, None] * vecs)
    q = -1j * (vecs.T @ _spectral_derivative(vecs, h))

    conv = float("nan")
    if basis.check_convergence:
        _, _, _, w_c, _, _ = _lowest_states(ec1, u11, ej, basis.n_points // 2, basis.half_width, k)
        scale = max(abs(w[1] - w[0]), 1e-12)
        conv = float(np.max(np.abs(w - w_c) / np.maximum(np.abs(w), scale)))
        if conv > basis.tol:
            raise ConvergenceError(
                f"eigenvalues shift by {conv:.2e} (> {basis.tol:.1e}) under grid refinement",
                module=_MOD,
                operation="solve_aa",
            )
    if np.any(np.diff(w) <= 0):
        raise ConvergenceError("eigenvalues not strictly ascending (degenerate levels)", module=_MOD, operation="solve_aa")

    return AASpectrum(
        eigenvalues=w,
        gamma=gamma,
        q=q,
        parity=par,
        grid=x,
        potential=V,
        wavefunctions=vecs / math.sqrt(h),
        ec1=ec1,
        u11=u11,
        ej=ej,
        basis=basis,
        convergence=conv,
    )


def check_q_gamma_identity(spec: AASpectrum, ec1: float | None = None) -> float:
    """Max relative violation of q_ij = i (e_i - e_j) gamma_ij / (2 E_C1)."""
    ec1 = spec.ec1 if ec1 is None else ec1
    e = spec.eigenvalues
    pred = 1j * (e[:, None] - e[None, :]) * spec.gamma / (2 * ec1)
    mask = ~np.eye(spec.n_levels, dtype=bool) & (np.abs(spec.gamma) > 1e-8)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(spec.q[mask] - pred[mask]) / np.abs(spec.q[mask])))


def write_wavefunction_csv(spec: AASpectrum, path, n_states: int = 4, offset: bool = False) -> None:
    """Dump gamma, V(gamma) and the lowest wavefunctions (psi_u, psi_g, ...).

    With ``offset`` each wavefunction is shifted by its eigenvalue, the usual
    way of overlaying states on the potential.
    """
    n_states = min(n_states, spec.n_levels)
    names = [f"psi_{LEVEL_NAMES[i]}" if i < len(LEVEL_NAMES) else f"psi_{i}" for i in range(n_states)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "V(gamma)", *names])
        for r in range(len(spec.grid)):
            row = [spec.grid[r], spec.potential[r]]
            for i in range(n_states):
                val = spec.wavefunctions[r, i]
                row.append(val + spec.eigenvalues[i] if offset else val)
            w.writerow([f"{v:.10g}" for v in row])
