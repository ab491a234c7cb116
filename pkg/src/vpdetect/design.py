"""Design inversion and feasibility sweeps over the atom parameter plane.

Given the atom parameters (E_J/E_C1, U11/E_J) and the targets g/omega_c and
omega_c/eps_eg, the remaining circuit energies follow in closed form from
omega_c = sqrt(2 E_C2 U22) and g = U12 (E_C2 / 2U22)^(1/4) gamma_ge.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .atom import AASpectrum, BasisConfig, solve_aa
from .circuit import CircuitDesign, inductances_from_energies
from .errors import ConvergenceError, DomainError, VPDetectError

_MOD = "design-sweep"


@dataclass
class InversionResult:
    feasible: bool
    design: CircuitDesign | None
    spectrum: AASpectrum
    eps: float
    g: float
    u22_over_ej: float
    ec2_over_ej: float
    u12_over_ej: float
    l_over_lj: float
    l1_over_lj: float
    l2_over_lj: float
    status: str = "ok"

    @property
    def simple_A(self) -> float:
        from .merit import simple_criterion

        return simple_criterion(self.spectrum)


def invert_design(
    ej_over_ec1: float,
    u11_over_ej: float,
    g_over_wc: float,
    wc_over_eps_eg: float = 1.0,
    l1_over_l: float = 0.0,
    *,
    basis: BasisConfig | None = None,
    spectrum: AASpectrum | None = None,
) -> InversionResult:
    """Solve for E_C2, U22, U12 given the atom and the coupling targets.

    Infeasibility (U11 <= U22 for L1 = 0) is reported in the result, not
    raised.  With L1 = r L the mutual energy is U12 = s U22, s = 1/(1 + r),
    and the inductances follow from inverting the energy matrix.
    """
    if not (ej_over_ec1 > 0 and u11_over_ej > 0 and wc_over_eps_eg > 0) or g_over_wc < 0 or l1_over_l < 0:
        raise DomainError("design inputs out of domain", module=_MOD, operation="invert_design")
    spec = spectrum if spectrum is not None else solve_aa(1.0 / ej_over_ec1, u11_over_ej, 1.0, basis)
    eps = spec.eps_eg * wc_over_eps_eg
    g = g_over_wc * eps
    gge = abs(spec.gamma_ge)
    nan = float("nan")
    if g == 0:
        return InversionResult(False, None, spec, eps, 0.0, 0.0, nan, 0.0, nan, nan, nan, status="degenerate-coupling")
    if gge == 0:
        raise DomainError("gamma_ge vanishes; coupling cannot be set", module=_MOD, operation="invert_design")
    s = 1.0 / (1.0 + l1_over_l)
    u22 = 2.0 * (g / gge) ** 2 / (eps * s * s)
    u12 = s * u22
    ec2 = eps**2 / (2.0 * u22)
    det = u11_over_ej * u22 - u12 * u12
    if det <= 0:
        return InversionResult(False, None, spec, eps, g, u22, ec2, u12, nan, nan, nan, status="infeasible")
    L, L1, L2 = inductances_from_energies(u11_over_ej, u12, u22)
    if not (L > 0 and L2 > 0 and L1 >= -1e-12 * L):
        return InversionResult(False, None, spec, eps, g, u22, ec2, u12, L, L1, L2, status="infeasible")
    design = CircuitDesign(
        ej_over_ec1=ej_over_ec1,
        u11_over_ej=u11_over_ej,
        g_over_wc=g_over_wc,
        wc_over_eps_eg=wc_over_eps_eg,
        l1_over_l=l1_over_l,
        ej_over_ec2=1.0 / ec2,
        u22_over_ej=u22,
        u12_over_ej=u12,
    )
    return InversionResult(True, design, spec, eps, g, u22, ec2, u12, L, max(L1, 0.0), L2)


@dataclass(frozen=True)
class SweepGrid:
    ec1_over_ej: tuple[float, float] = (0.7, 1.4)
    u11_over_ej: tuple[float, float] = (0.05, 0.35)
    n_ec1: int = 40
    n_u11: int = 40
    g_over_wc: float = 0.5
    wc_over_eps_eg: float = 1.0
    l1_over_l: float = 0.0

    def __post_init__(self):
        for name in ("ec1_over_ej", "u11_over_ej"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise DomainError(f"{name} range must satisfy 0 < lo <= hi", module=_MOD, operation="SweepGrid")
        if self.n_ec1 < 1 or self.n_u11 < 1:
            raise DomainError("grid counts must be positive", module=_MOD, operation="SweepGrid")
        if (self.n_ec1 > 1) != (self.ec1_over_ej[1] > self.ec1_over_ej[0]) or (self.n_u11 > 1) != (
            self.u11_over_ej[1] > self.u11_over_ej[0]
        ):
            raise DomainError("a grid axis has zero span but several points", module=_MOD, operation="SweepGrid")

    def points(self) -> list[tuple[float, float]]:
        """(E_C1/E_J, U11/E_J) pairs in row-major order (x outer)."""
        xs = np.linspace(*self.ec1_over_ej, self.n_ec1)
        ys = np.linspace(*self.u11_over_ej, self.n_u11)
        return [(float(x), float(y)) for x in xs for y in ys]


@dataclass
class RegionLabel:
    x: float  # E_C1/E_J
    y: float  # U11/E_J
    feasible: bool
    simple_A: float = float("nan")
    simple_A_above_1: bool = False
    eps_eg: float = float("nan")
    eps_gu_over_eps_eg: float = float("nan")
    u22_over_ej: float = float("nan")
    l_over_lj: float = float("nan")
    l2_over_lj: float = float("nan")
    status: str = "ok"
    design: CircuitDesign | None = field(default=None, repr=False)


def _sweep_point(args) -> RegionLabel:
    from .merit import simple_criterion

    x, y, g_over_wc, wc_over, l1, basis = args
    while True:
        try:
            r = invert_design(1.0 / x, y, g_over_wc, wc_over, l1, basis=basis)
            break
        except ConvergenceError as exc:
            # refine the grid before giving up on the point
            if basis.n_points >= 4096:
                return RegionLabel(x, y, False, status=f"error:{type(exc).__name__}")
            basis = replace(basis, n_points=2 * basis.n_points)
        except VPDetectError as exc:
            return RegionLabel(x, y, False, status=f"error:{type(exc).__name__}")
    A = simple_criterion(r.spectrum)
    lab = RegionLabel(
        x=x,
        y=y,
        feasible=r.feasible,
        simple_A=A,
        simple_A_above_1=bool(A > 1),
        eps_eg=r.spectrum.eps_eg,
        eps_gu_over_eps_eg=r.spectrum.eps_gu / r.spectrum.eps_eg,
        u22_over_ej=r.u22_over_ej,
        status=r.status,
    )
    if r.feasible:
        lab.l_over_lj, lab.l2_over_lj, lab.design = r.l_over_lj, r.l2_over_lj, r.design
    return lab


def sweep(grid: SweepGrid, *, basis: BasisConfig | None = None, workers: int | None = None) -> list[RegionLabel]:
    """Classify every grid point; the output order is independent of ``workers``."""
    basis = basis or BasisConfig(n_points=512)
    tasks = [(x, y, grid.g_over_wc, grid.wc_over_eps_eg, grid.l1_over_l, basis) for x, y in grid.points()]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) < 2:
        return [_sweep_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_sweep_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def region_arrays(labels: list[RegionLabel], grid: SweepGrid) -> dict:
    """Reshape a sweep into (n_ec1, n_u11) arrays for contouring."""
    shape = (grid.n_ec1, grid.n_u11)

    def arr(attr):
        return np.array([getattr(r, attr) for r in labels], dtype=float).reshape(shape)

    return {
        "x": arr("x"),
        "y": arr("y"),
        "feasible": arr("feasible"),
        "margin": arr("y") - arr("u22_over_ej"),  # U11 - U22
        "A": arr("simple_A"),
        "eps_eg": arr("eps_eg"),
        "eps_ratio": arr("eps_gu_over_eps_eg"),
    }


def boundary_points(labels: list[RegionLabel], grid: SweepGrid, quantity: str = "margin", level: float = 0.0):
    """Sign-change locations of a field along the U11 axis (linear interpolation).

    ``quantity='margin'`` gives the feasibility boundary U11 = U22;
    ``quantity='A'`` with level 1 gives the simple-criterion curve.
    """
    F = region_arrays(labels, grid)
    Z = F[quantity] - level
    pts = []
    for i in range(grid.n_ec1):
        for j in range(grid.n_u11 - 1):
            a, b = Z[i, j], Z[i, j + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b < 0:
                t = a / (a - b)
                pts.append((float(F["x"][i, j]), float(F["y"][i, j] + t * (F["y"][i, j + 1] - F["y"][i, j]))))
    return pts


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.10g}"
    return str(v)


SWEEP_COLUMNS = [
    "x",
    "y",
    "feasible",
    "A",
    "eps_eg_over_ej",
    "eps_gu_over_eps_eg",
    "u22_over_ej",
    "l_over_lj",
    "l2_over_lj",
    "status",
]


def write_sweep_csv(labels: list[RegionLabel], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in labels:
            row = [r.x, r.y, r.feasible, r.simple_A, r.eps_eg, r.eps_gu_over_eps_eg, r.u22_over_ej, r.l_over_lj, r.l2_over_lj, r.status]
            w.writerow([_fmt(v) for v in row])
