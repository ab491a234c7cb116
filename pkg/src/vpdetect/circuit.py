"""Two-loop circuit: inductance algebra, energy scales and unit conversion.

Energies are expressed in units of the Josephson energy E_J and inductances
in units of the Josephson inductance L_J = (hbar/2e)^2 / E_J.  With this
choice the inductive-energy matrix is simply U / E_J = L_J * inv(L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .constants import E_CHARGE, PHI0_RED, PLANCK
from .errors import ConfigurationError, DomainError, InfeasibleDesignError

_MOD = "circuit-core"


@dataclass(frozen=True)
class CircuitDesign:
    """Dimensionless circuit design.

    The first fields are the free design inputs; ``ej_over_ec2``,
    ``u22_over_ej`` and ``u12_over_ej`` are filled in by design inversion.
    """

    ej_over_ec1: float
    u11_over_ej: float
    g_over_wc: float
    wc_over_eps_eg: float = 1.0
    l1_over_l: float = 0.0
    bias_qx: float = 0.0
    bias_phi_x1: float = 0.0
    bias_phi_x2: float = 0.0
    ej_over_ec2: float | None = None
    u22_over_ej: float | None = None
    u12_over_ej: float | None = None

    def __post_init__(self):
        for name in ("ej_over_ec1", "u11_over_ej", "wc_over_eps_eg"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive", module=_MOD, operation="CircuitDesign")
        if self.g_over_wc < 0 or self.l1_over_l < 0:
            raise DomainError("g_over_wc and l1_over_l must be non-negative", module=_MOD, operation="CircuitDesign")
        if any((self.bias_qx, self.bias_phi_x1, self.bias_phi_x2)):
            raise DomainError(
                "only the symmetric bias point (Q_x = Phi_x1 = Phi_x2 = 0) is supported",
                module=_MOD,
                operation="CircuitDesign",
            )
        derived = (self.ej_over_ec2, self.u22_over_ej, self.u12_over_ej)
        if any(v is not None for v in derived):
            if any(v is None for v in derived):
                raise ConfigurationError("derived fields must be given together", module=_MOD, operation="CircuitDesign")
            if not (self.ej_over_ec2 > 0 and self.u22_over_ej > 0 and self.u12_over_ej >= 0):
                raise DomainError("derived circuit energies must be positive", module=_MOD, operation="CircuitDesign")
            _check_inductive_matrix(self.u11_over_ej, self.u12_over_ej, self.u22_over_ej)

    @property
    def has_derived(self) -> bool:
        return self.u22_over_ej is not None

    @property
    def ec1_over_ej(self) -> float:
        return 1.0 / self.ej_over_ec1

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_derived(self, ej_over_ec2: float, u22_over_ej: float, u12_over_ej: float) -> "CircuitDesign":
        return replace(self, ej_over_ec2=ej_over_ec2, u22_over_ej=u22_over_ej, u12_over_ej=u12_over_ej)


@dataclass(frozen=True)
class InductanceMatrix:
    l11: float
    l12: float
    l21: float
    l22: float

    @property
    def symmetric(self) -> bool:
        return self.l12 == self.l21

    def array(self) -> np.ndarray:
        return np.array([[self.l11, self.l12], [self.l21, self.l22]], dtype=float)

    def is_positive_definite(self) -> bool:
        return self.l11 > 0 and self.l11 * self.l22 - self.l12 * self.l21 > 0


@dataclass(frozen=True)
class PhysicalCircuit:
    """Circuit elements in laboratory units (GHz, fF, nH, nA, kOhm)."""

    ej_ghz: float
    c1_ff: float
    c2_ff: float
    l_nh: float
    l1_nh: float
    l2_nh: float
    lj_nh: float
    ic_na: float
    z2_kohm: float
    wc_ghz: float
    cg_ff: float | None = None


@dataclass(frozen=True)
class HamiltonianScales:
    """Energy scales entering H_AA, H_LC and V, in units of E_J."""

    ec1: float
    ec2: float
    u11: float
    u12: float
    u22: float
    omega_c: float
    g_prefactor: float


def inductance_matrix(L: float, L1: float, L2: float) -> InductanceMatrix:
    """Loop inductance matrix for galvanic coupling through L (mutual M = 0)."""
    return InductanceMatrix(L1 + L, -L, -L, L2 + L)


def invert_inductance(L: float, L1: float, L2: float) -> InductanceMatrix:
    """Closed-form inverse of the loop inductance matrix.

    With inductances in units of L_J the entries are the inductive energies
    U_ij / E_J.
    """
    if not (L > 0 and L2 > 0) or L1 < 0:
        raise InfeasibleDesignError(
            f"inductance matrix not positive definite (L={L}, L1={L1}, L2={L2})",
            module=_MOD,
            operation="invert_inductance",
        )
    det = L * L1 + L * L2 + L1 * L2
    return InductanceMatrix((L + L2) / det, L / det, L / det, (L + L1) / det)


def _check_inductive_matrix(u11: float, u12: float, u22: float) -> None:
    if not (u11 > 0 and u11 * u22 - u12 * u12 > 0):
        raise InfeasibleDesignError(
            f"inductive energy matrix not positive definite (U11={u11}, U12={u12}, U22={u22})",
            module=_MOD,
            operation="CircuitDesign",
        )
    L, L1, L2 = inductances_from_energies(u11, u12, u22)
    if not (L > 0 and L2 > 0 and L1 >= -1e-12 * L):
        raise InfeasibleDesignError(
            f"inductive energies imply non-physical inductances (L={L}, L1={L1}, L2={L2})",
            module=_MOD,
            operation="CircuitDesign",
        )


def inductances_from_energies(u11: float, u12: float, u22: float) -> tuple[float, float, float]:
    """(L, L1, L2) in units of L_J from the inductive energies in units of E_J."""
    det = u11 * u22 - u12 * u12
    if det == 0:
        raise InfeasibleDesignError("singular inductive energy matrix", module=_MOD, operation="to_physical")
    l11, l12, l22 = u22 / det, -u12 / det, u11 / det
    L = -l12
    return L, l11 - L, l22 - L


def hamiltonian_scales(design: CircuitDesign) -> HamiltonianScales:
    if not design.has_derived:
        raise ConfigurationError(
            "design has no derived fields; run design inversion first",
            module=_MOD,
            operation="hamiltonian_scales",
        )
    ec2 = 1.0 / design.ej_over_ec2
    u22 = design.u22_over_ej
    u12 = design.u12_over_ej
    return HamiltonianScales(
        ec1=design.ec1_over_ej,
        ec2=ec2,
        u11=design.u11_over_ej,
        u12=u12,
        u22=u22,
        omega_c=math.sqrt(2.0 * ec2 * u22),
        g_prefactor=u12 * (ec2 / (2.0 * u22)) ** 0.25,
    )


def _ej_joule(ej_ghz: float) -> float:
    return PLANCK * ej_ghz * 1e9


def to_physical(design: CircuitDesign, ej_ghz: float, cg_ff: float | None = None) -> PhysicalCircuit:
    if not ej_ghz > 0:
        raise DomainError("ej_ghz must be positive", module=_MOD, operation="to_physical")
    if not design.has_derived:
        raise ConfigurationError("design has no derived fields", module=_MOD, operation="to_physical")
    u11, u12, u22 = design.u11_over_ej, design.u12_over_ej, design.u22_over_ej
    if design.l1_over_l == 0 and not u11 > u22:
        raise InfeasibleDesignError("U11 <= U22", module=_MOD, operation="to_physical")
    ej = _ej_joule(ej_ghz)
    lj = PHI0_RED**2 / ej
    L, L1, L2 = inductances_from_energies(u11, u12, u22)
    c1 = 2 * E_CHARGE**2 / (ej / design.ej_over_ec1)
    c2 = 2 * E_CHARGE**2 / (ej / design.ej_over_ec2)
    scales = hamiltonian_scales(design)
    return PhysicalCircuit(
        ej_ghz=ej_ghz,
        c1_ff=c1 * 1e15,
        c2_ff=c2 * 1e15,
        l_nh=L * lj * 1e9,
        l1_nh=L1 * lj * 1e9,
        l2_nh=L2 * lj * 1e9,
        lj_nh=lj * 1e9,
        ic_na=ej / PHI0_RED * 1e9,
        z2_kohm=math.sqrt(L2 * lj / c2) * 1e-3,
        wc_ghz=scales.omega_c * ej_ghz,
        cg_ff=cg_ff,
    )


def from_physical(phys: PhysicalCircuit, g_over_wc: float, wc_over_eps_eg: float = 1.0) -> CircuitDesign:
    """Re-normalize a physical circuit by E_J.

    The coupling ratio and detuning are not encoded in the circuit elements
    alone (they need the atom spectrum), so they are passed through.
    """
    ej = _ej_joule(phys.ej_ghz)
    ec1 = 2 * E_CHARGE**2 / (phys.c1_ff * 1e-15)
    ec2 = 2 * E_CHARGE**2 / (phys.c2_ff * 1e-15)
    inv = invert_inductance(phys.l_nh / phys.lj_nh, phys.l1_nh / phys.lj_nh, phys.l2_nh / phys.lj_nh)
    # ratios use the stored L_J so the round trip is exact
    return CircuitDesign(
        ej_over_ec1=ej / ec1,
        u11_over_ej=inv.l11,
        g_over_wc=g_over_wc,
        wc_over_eps_eg=wc_over_eps_eg,
        l1_over_l=phys.l1_nh / phys.l_nh,
        ej_over_ec2=ej / ec2,
        u22_over_ej=inv.l22,
        u12_over_ej=inv.l12,
    )
