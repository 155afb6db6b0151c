"""Grid solvers for the 1D contact-potential model.

Density functional side: the atom ``-Z delta(x)`` and the two-center molecule
``-delta(x) - delta(x - R)`` with local Hartree ``1/2 int rho^2`` and contact
exchange ``-c_xc int rho^2``.  Schroedinger side: the two-electron operator on
a tensor grid, used to check that the exact dissociation limit is twice the
atom energy.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .analytic1d import splitting_sum_exact
from .descent import (
    ConvergenceError,
    GridTooSmallError,
    Problem,
    SolverConfig,
    minimize,
    residual,
    stiffness,
    with_perturbed_start,
)
from .solver3d import SplittingScan, assemble_scan, mass_ladder
from .model import DensityField, EnergyBreakdown, ExchangeSpec, LineGrid, energy_1d, well_indices

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "DissociationPoint",
    "TwoBodyResult",
    "ATOM_SPACING",
    "MOLECULE_SPACING",
    "default_atom_grid",
    "default_molecule_grid",
    "minimize_atom_1d",
    "minimize_molecule_1d",
    "dissociation_curve_1d",
    "dissociation_asymptote",
    "splitting_scan_1d",
    "euler_lagrange_residual_1d",
    "two_particle_ground",
    "discrete_delta_well_energy",
]

ATOM_SPACING = 0.005
MOLECULE_SPACING = 0.02
MARGIN = 40.0
BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class DissociationPoint:
    R: float
    energy: float
    breakdown: EnergyBreakdown
    gap: float | None = None

    def __post_init__(self):
        if self.R < 0:
            raise ValueError("internuclear distance must be >= 0")


def default_atom_grid(h: float = ATOM_SPACING) -> LineGrid:
    return LineGrid.around([0.0], MARGIN, h)


def default_molecule_grid(R: float, h: float = MOLECULE_SPACING) -> LineGrid:
    return LineGrid.around([0.0, R], MARGIN, h)


def line_problem(grid: LineGrid, wells, c_xc: float) -> Problem:
    kin_diag, kin_off = stiffness(np.full(grid.n - 1, 1.0 / grid.h))
    ext = np.zeros(grid.n)
    for k, Z in well_indices(grid, wells):
        ext[k] -= Z
    w = grid.weights

    def nonlinear(rho):
        s = float(np.dot(w, rho * rho))
        return 0.5 * s, -c_xc * s, (1.0 - 2.0 * c_xc) * w * rho

    return Problem(kin_diag, kin_off, w, ext, nonlinear)


def _exponential_start(grid: LineGrid, centers, fractions):
    x = grid.points
    rho = np.zeros(grid.n)
    for c, f in zip(centers, fractions):
        rho += f * np.exp(-2.0 * np.abs(x - c))
    return np.sqrt(rho)


def _starts(grid, centers, cfg: SolverConfig, c_xc: float):
    init = cfg.init
    if isinstance(init, DensityField):
        if init.grid != grid:
            raise ValueError("provided initial density lives on a different grid")
        return [init.sqrt]
    if init == "uniform":
        return [np.ones(grid.n)]
    if init != "exponential":
        raise ValueError(f"unknown init {init!r}")
    if len(centers) == 1:
        return with_perturbed_start([_exponential_start(grid, centers, [1.0])], cfg)
    if c_xc <= 0.5:
        # convex functional: one basin
        return with_perturbed_start([_exponential_start(grid, centers, [0.5, 0.5])], cfg)
    # competing basins for c_xc > 1/2: left-heavy, right-heavy, symmetric
    starts = [
        _exponential_start(grid, centers, [0.9, 0.1]),
        _exponential_start(grid, centers, [0.1, 0.9]),
        _exponential_start(grid, centers, [0.5, 0.5]),
    ]
    return with_perturbed_start(starts, cfg)


def _solve(grid, wells, mass, c_xc, cfg, boundary_tol):
    if not mass > 0:
        raise ValueError("mass must be positive")
    for pos, _ in wells:
        grid.nearest_index(pos)
    problem = line_problem(grid, wells, c_xc)
    best = None
    failure = None
    for phi0 in _starts(grid, [p for p, _ in wells], cfg, c_xc):
        try:
            res = minimize(problem, phi0, mass, cfg)
        except ConvergenceError as exc:
            failure = exc
            continue
        if best is None or res.energy < best.energy:
            best = res
    if best is None:
        last = failure.density
        last = None if last is None else DensityField(grid, last)
        raise ConvergenceError(str(failure), last, failure.diagnostics)
    density = DensityField.from_sqrt(grid, best.phi)
    edge = max(density.values[0], density.values[-1])
    if edge > boundary_tol:
        raise GridTooSmallError(
            f"grid too small: boundary density {edge:.3e} exceeds {boundary_tol:.1e}"
        )
    breakdown = energy_1d(density, wells, ExchangeSpec.contact(c_xc))
    return density, breakdown


def minimize_atom_1d(
    alpha: float,
    c_xc: float,
    cfg: SolverConfig | None = None,
    grid: LineGrid | None = None,
    Z: float = 1.0,
    boundary_tol: float = BOUNDARY_TOL,
) -> tuple[DensityField, EnergyBreakdown]:
    """Minimize the 1D atom functional at mass ``alpha``."""
    cfg = cfg or SolverConfig()
    grid = grid or default_atom_grid()
    return _solve(grid, [(0.0, Z)], alpha, c_xc, cfg, boundary_tol)


def minimize_molecule_1d(
    lam: float,
    R: float,
    c_xc: float,
    cfg: SolverConfig | None = None,
    grid: LineGrid | None = None,
    boundary_tol: float = BOUNDARY_TOL,
) -> tuple[DensityField, EnergyBreakdown]:
    """Minimize the two-well functional ``-rho(0) - rho(R)`` at mass ``lam``.

    ``R = 0`` merges the wells into a single one of strength 2.
    """
    if R < 0:
        raise ValueError("R must be >= 0")
    cfg = cfg or SolverConfig()
    grid = grid or default_molecule_grid(R)
    if grid.nearest_index(0.0) == grid.nearest_index(R):
        wells = [(0.0, 2.0)]
    else:
        wells = [(0.0, 1.0), (R, 1.0)]
    return _solve(grid, wells, lam, c_xc, cfg, boundary_tol)


def splitting_scan_1d(
    N: float,
    c_xc: float,
    alpha_step: float = 0.25,
    cfg: SolverConfig | None = None,
    grid: LineGrid | None = None,
) -> SplittingScan:
    """Grid-solved ``alpha -> I_alpha + I_{2N - alpha}`` for delta wells of strength ``N``."""
    alphas = mass_ladder(N, alpha_step)
    cache = {0.0: 0.0}

    def energy(m):
        m = float(m)
        if m not in cache:
            cache[m] = minimize_atom_1d(m, c_xc, cfg, grid, Z=N)[1].total
        return cache[m]

    return assemble_scan(N, c_xc, alpha_step, alphas, energy)


def dissociation_asymptote(lam: float, c_xc: float) -> float | None:
    """``min_alpha I_alpha + I_{lam - alpha}`` when it is known in closed form."""
    if c_xc < 0.5 or not math.isclose(lam, 2.0):
        return None
    # the splitting sum is a downward parabola in alpha; check both ends
    return min(splitting_sum_exact(0.0, c_xc), splitting_sum_exact(1.0, c_xc))


def _molecule_point(args):
    lam, R, c_xc, cfg, grid = args
    try:
        return minimize_molecule_1d(lam, R, c_xc, cfg, grid)[1]
    except ConvergenceError as exc:
        raise ConvergenceError(f"R={R}: {exc}", exc.density, {**exc.diagnostics, "R": R}) from None
    except GridTooSmallError as exc:
        raise GridTooSmallError(f"R={R}: {exc}") from None


def dissociation_curve_1d(
    lam: float,
    c_xc: float,
    R_values,
    cfg: SolverConfig | None = None,
    grid: LineGrid | None = None,
    jobs: int = 1,
) -> list[DissociationPoint]:
    """Molecule energies along ``R_values``; ``gap`` is measured to the exact asymptote when known."""
    R_values = [float(R) for R in R_values]
    if any(b <= a for a, b in zip(R_values, R_values[1:])):
        raise ValueError("R_values must be strictly increasing")
    if not 0 < lam <= 2:
        raise ValueError("lambda must lie in (0, 2]")
    asymptote = dissociation_asymptote(lam, c_xc)
    tasks = [(lam, R, c_xc, cfg, grid) for R in R_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            breakdowns = list(pool.map(_molecule_point, tasks))
    else:
        breakdowns = [_molecule_point(t) for t in tasks]
    points = []
    for R, br in zip(R_values, breakdowns):
        gap = None if asymptote is None else br.total - asymptote
        points.append(DissociationPoint(R, br.total, br, gap))
    return points


def euler_lagrange_residual_1d(density: DensityField, wells, c_xc: float) -> tuple[float, float]:
    """Residual ``|h phi - eps phi| / |phi|`` and Fermi estimate for a 1D density."""
    problem = line_problem(density.grid, wells, c_xc)
    return residual(problem, density.sqrt)


# ---------------------------------------------------------------------------
# two-electron Schroedinger reference

@dataclass(frozen=True)
class TwoBodyResult:
    energy: float
    discretization_error: float
    iterations: int
    boundary_amplitude: float
    lattice_limit: float

    def __float__(self):
        return self.energy


def discrete_delta_well_energy(h: float, Z: float = 1.0) -> float:
    """Bound-state energy of ``-1/2 D2 - (Z/h) delta_0`` on an infinite lattice of spacing ``h``.

    The eigenvector is ``kappa**|i|``; eliminating ``kappa`` leaves a quadratic
    in ``u = 1 - kappa``.
    """
    zh = Z * h
    u = 1.0 + zh - math.sqrt(1.0 + zh * zh)
    return -u * u / (2.0 * h * h * (1.0 - u))


def default_twobody_grid(R: float, h: float = 0.2, margin: float = 10.0) -> LineGrid:
    return LineGrid.around([0.0, R], margin, h)


def two_particle_hamiltonian(R: float, grid: LineGrid) -> sp.csr_matrix:
    n, h = grid.n, grid.h
    lap = sp.diags([np.full(n - 1, 1.0), np.full(n, -2.0), np.full(n - 1, 1.0)], [-1, 0, 1])
    one = -0.5 / (h * h) * lap
    ext = np.zeros(n)
    i0, iR = grid.nearest_index(0.0), grid.nearest_index(R)
    ext[i0] -= 1.0 / h
    ext[iR] -= 1.0 / h
    one = (one + sp.diags(ext)).tocsr()
    eye = sp.identity(n, format="csr")
    H = sp.kron(one, eye) + sp.kron(eye, one)
    contact = np.zeros((n, n))
    contact[np.diag_indices(n)] = 1.0 / h
    return (H + sp.diags(contact.ravel())).tocsr()


def two_particle_ground(
    R: float,
    grid: LineGrid | None = None,
    tol: float = 1e-10,
    shift: float = -4.5,
    max_iter: int = 2000,
    boundary_tol: float = 1e-3,
) -> TwoBodyResult:
    """Lowest spatially symmetric eigenvalue of the 1D two-electron molecule.

    Shifted inverse iteration with conjugate-gradient inner solves.  The shift
    sits below the whole spectrum (every eigenvalue is above ``-4``), so
    ``H - shift`` is positive definite.

    The reported discretization error compares the exact lattice value of one
    delta well with its continuum value ``-1/2``, doubled for two atoms (the
    dissociated lattice energy converges to ``2 * discrete_delta_well_energy(h)``),
    and adds a truncation estimate from the boundary amplitude.
    """
    grid = grid or default_twobody_grid(R)
    n, h = grid.n, grid.h
    H = two_particle_hamiltonian(R, grid)
    A = (H - shift * sp.identity(n * n, format="csr")).tocsr()

    x = grid.points
    i0, iR = grid.nearest_index(0.0), grid.nearest_index(R)
    a, b = np.exp(-np.abs(x - x[i0])), np.exp(-np.abs(x - x[iR]))
    psi = (np.outer(a, b) + np.outer(b, a)).ravel()
    psi /= np.linalg.norm(psi)
    energy = float(psi @ (H @ psi))
    y = psi / (energy - shift)
    for it in range(1, max_iter + 1):
        y, info = cg(A, psi, x0=y, rtol=1e-3 * tol, atol=0.0, maxiter=10 * n)
        if info < 0:
            raise ConvergenceError(f"CG breakdown in inverse iteration (info={info})")
        Y = y.reshape(n, n)
        # exchange-symmetric sector; antisymmetric partner is handled by spin
        Y = 0.5 * (Y + Y.T)
        new = Y.ravel() / np.linalg.norm(Y)
        new_energy = float(new @ (H @ new))
        done = abs(new_energy - energy) <= tol * abs(new_energy)
        psi, energy = new, new_energy
        y = psi / (energy - shift)
        if done:
            res = np.linalg.norm(H @ psi - energy * psi)
            if res <= max(math.sqrt(tol), 1e-6) * (abs(energy) + 1.0):
                break
    else:
        raise ConvergenceError(
            f"inverse iteration did not converge in {max_iter} steps",
            diagnostics={"energy": energy, "R": R},
        )
    P = np.abs(psi.reshape(n, n))
    edge = max(P[0].max(), P[-1].max(), P[:, 0].max(), P[:, -1].max()) / P.max()
    if edge > boundary_tol:
        raise GridTooSmallError(f"grid too small: boundary amplitude {edge:.3e} exceeds {boundary_tol:.1e}")
    limit = 2.0 * discrete_delta_well_energy(h)
    # lattice-vs-continuum error of the two wells, plus box truncation and
    # iteration tolerance
    err = abs(limit + 1.0) + edge * edge / (h * h) + 10.0 * tol * abs(energy)
    return TwoBodyResult(energy, float(err), it, float(edge), limit)
