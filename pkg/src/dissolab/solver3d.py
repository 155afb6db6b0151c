"""Radial TFDW minimizer with Dirac exchange and the mass-splitting scans.

The atom functional is

    E[rho] = 1/2 int |grad sqrt(rho)|^2 - Z int rho/|x| + J[rho] - c_xc int rho^(4/3)

minimized over spherically symmetric densities of fixed (possibly
fractional) mass.  ``splitting_scan_3d`` tabulates ``I_a + I_{2N-a}`` and
``symmetry_threshold`` bisects in ``c_xc`` for the onset of asymmetric
splitting.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .descent import ConvergenceError, Problem, SolverConfig, minimize, stiffness, with_perturbed_start
from .model import (
    FOUR_PI,
    DensityField,
    EnergyBreakdown,
    ExchangeSpec,
    RadialGrid,
    _hartree_potential,
    energy_3d,
    hartree_potential_radial,
)

log = logging.getLogger(__name__)

UEG_CXC = 0.75 * (3.0 / math.pi) ** (1.0 / 3.0)


class ExistenceWarning(UserWarning):
    """Mass beyond ``2Z``: a minimizer is not guaranteed to exist."""


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class RadialResult:
    density: DensityField
    breakdown: EnergyBreakdown
    fermi: float
    grad_norm: float
    iterations: int

    @property
    def energy(self) -> float:
        return self.breakdown.total

    @property
    def bound(self) -> bool:
        """Negative Fermi level; otherwise part of the mass only stays because of the grid edge."""
        return self.fermi < 0


@dataclass(frozen=True)
class SplittingScan:
    total_mass: float
    c_xc: float
    step: float
    samples: list  # (alpha, I_alpha, I_complement, sum)
    argmin_alpha: float
    symmetric: bool
    unbound: tuple = ()  # masses whose solve had a nonnegative Fermi level

    def sums(self) -> np.ndarray:
        return np.array([s[3] for s in self.samples])


@dataclass(frozen=True)
class ThresholdBracket:
    N: float
    c_low: float
    c_high: float
    probes: list = field(default_factory=list)  # (c_xc, argmin_alpha, symmetric)

    def __post_init__(self):
        if not self.c_low < self.c_high:
            raise ValueError("bracket needs c_low < c_high")


def radial_problem(grid: RadialGrid, Z: float, c_xc: float, hartree_on=True, exchange_on=True) -> Problem:
    r = grid.r
    dt = np.diff(np.log(r))
    kin_diag, kin_off = stiffness(FOUR_PI * np.sqrt(r[1:] * r[:-1]) / dt)
    xc = ExchangeSpec.dirac(c_xc)
    w = grid.w
    use_xc = exchange_on and c_xc > 0

    def nonlinear(rho):
        hartree = exchange = 0.0
        drho = np.zeros_like(rho)
        if hartree_on:
            v = _hartree_potential(grid, rho)
            hartree = 0.5 * float(np.dot(w, rho * v))
            drho += w * v
        if use_xc:
            exchange = float(np.dot(w, xc.energy_density(rho)))
            drho += w * xc.derivative(rho)
        return hartree, exchange, drho

    return Problem(kin_diag, kin_off, w, -Z * w / r, nonlinear)


def _radial_starts(grid: RadialGrid, Z: float, c_xc: float, cfg: SolverConfig):
    r = grid.r
    init = cfg.init
    if isinstance(init, DensityField):
        if init.grid != grid:
            raise ValueError("provided initial density lives on a different grid")
        return [init.sqrt]
    if init == "uniform":
        return [np.where(r < 10.0 / Z, 1.0, 0.0) + 1e-12]
    if init != "exponential":
        raise ValueError(f"unknown init {init!r}")
    starts = [np.exp(-Z * r)]
    if c_xc > 1.0:
        # compact, diffuse and shell-like starts for the nonconvex regime
        starts = [np.exp(-4.0 * Z * r), np.exp(-0.5 * Z * r), Z * r * np.exp(-Z * r) + 1e-12]
    return with_perturbed_start(starts, cfg)


def minimize_radial_full(
    alpha: float,
    Z: float = 1.0,
    c_xc: float = 0.0,
    cfg: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    hartree_on: bool = True,
    exchange_on: bool = True,
) -> RadialResult:
    """Minimize the radial functional at mass ``alpha``; ``alpha == 0`` gives the zero density."""
    if not Z > 0:
        raise ValueError("nuclear charge must be positive")
    cfg = cfg or SolverConfig()
    grid = grid or RadialGrid.for_charge(Z)
    if alpha < 0:
        raise ValueError("mass must be nonnegative")
    if alpha == 0:
        zero = DensityField(grid, np.zeros(grid.n))
        return RadialResult(zero, EnergyBreakdown(0.0, 0.0, 0.0, 0.0), 0.0, 0.0, 0)
    if alpha > 2 * Z:
        warnings.warn(
            f"mass {alpha} exceeds 2Z = {2 * Z}; existence of a minimizer is not guaranteed",
            ExistenceWarning,
            stacklevel=2,
        )
    problem = radial_problem(grid, Z, c_xc, hartree_on, exchange_on)
    best, failure = None, None
    for phi0 in _radial_starts(grid, Z, c_xc, cfg):
        try:
            res = minimize(problem, phi0, alpha, cfg)
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
    breakdown = energy_3d(density, Z, ExchangeSpec.dirac(c_xc), hartree_on, exchange_on)
    return RadialResult(density, breakdown, best.fermi, best.grad_norm, best.iterations)


def minimize_radial(
    alpha: float,
    Z: float = 1.0,
    c_xc: float = 0.0,
    cfg: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    hartree_on: bool = True,
    exchange_on: bool = True,
) -> tuple[DensityField, EnergyBreakdown]:
    res = minimize_radial_full(alpha, Z, c_xc, cfg, grid, hartree_on, exchange_on)
    return res.density, res.breakdown


def mass_ladder(N: float, step: float) -> np.ndarray:
    k = N / step
    if not (step > 0 and abs(k - round(k)) < 1e-9 and round(k) >= 1):
        raise ValueError(f"alpha_step {step} must divide N = {N} evenly")
    k = int(round(k))
    return np.array([i * N / k for i in range(k + 1)])


def _solve_mass(args):
    alpha, Z, c_xc, cfg, grid = args
    try:
        res = minimize_radial_full(alpha, Z, c_xc, cfg, grid)
    except ConvergenceError as exc:
        raise ConvergenceError(f"alpha={alpha}: {exc}", exc.density, {**exc.diagnostics, "alpha": alpha}) from None
    return res.energy, res.bound


def atom_energies(masses, Z, c_xc, cfg=None, grid=None, jobs: int = 1) -> list[tuple[float, bool]]:
    """``(I_m, bound)`` for each mass, in input order."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExistenceWarning)
        tasks = [(float(m), Z, c_xc, cfg, grid) for m in masses]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                return list(pool.map(_solve_mass, tasks))
        return [_solve_mass(t) for t in tasks]


def assemble_scan(N, c_xc, step, alphas, energy, unbound=()) -> SplittingScan:
    """Pair ``I_alpha`` with ``I_{2N - alpha}``; ``energy`` maps a mass to its atom energy."""
    total = 2.0 * N
    samples = []
    for a in alphas:
        ia, ic = energy(a), energy(total - a)
        samples.append((float(a), ia, ic, ia + ic))
    sums = np.array([s[3] for s in samples])
    i_min = int(np.argmin(sums))  # first occurrence: smallest alpha wins ties
    argmin = float(alphas[i_min])
    symmetric = abs(argmin - N) <= step * (1.0 + 1e-9)
    return SplittingScan(total, c_xc, step, samples, argmin, symmetric, tuple(unbound))


def splitting_scan_3d(
    N: float,
    c_xc: float,
    alpha_step: float = 0.05,
    cfg: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    jobs: int = 1,
) -> SplittingScan:
    """Tabulate ``alpha -> I_alpha + I_{2N - alpha}`` on ``[0, N]`` for two atoms of charge ``N``."""
    alphas = mass_ladder(N, alpha_step)
    masses = np.concatenate([alphas, 2.0 * N - alphas[-2::-1]])
    results = atom_energies(masses, N, c_xc, cfg, grid, jobs)
    table = dict(zip(masses.tolist(), results))
    unbound = [m for m, (_, b) in table.items() if not b and m > 0]
    return assemble_scan(N, c_xc, alpha_step, alphas, lambda m: table[float(m)][0], unbound)


def symmetry_threshold(
    N: float,
    c_lo: float,
    c_hi: float,
    tol: float = 0.1,
    cfg: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    alpha_step: float = 0.05,
    jobs: int = 1,
) -> ThresholdBracket:
    """Bisect ``c_xc`` for the first asymmetric splitting scan."""
    if not (c_lo < c_hi and tol > 0):
        raise ValueError("need c_lo < c_hi and tol > 0")
    probes = []

    def probe(c):
        scan = splitting_scan_3d(N, c, alpha_step, cfg, grid, jobs)
        probes.append((c, scan.argmin_alpha, scan.symmetric))
        log.info("c_xc=%.6g argmin=%.4g symmetric=%s", c, scan.argmin_alpha, scan.symmetric)
        return scan.symmetric

    lo_sym, hi_sym = probe(c_lo), probe(c_hi)
    if lo_sym == hi_sym:
        which = "symmetric" if lo_sym else "asymmetric"
        raise BracketError(f"interval does not bracket the transition: both endpoints {which}")
    if not lo_sym:
        raise BracketError("interval does not bracket the transition: c_lo asymmetric, c_hi symmetric")
    while c_hi - c_lo > tol:
        mid = 0.5 * (c_lo + c_hi)
        if probe(mid):
            c_lo = mid
        else:
            c_hi = mid
    return ThresholdBracket(N, c_lo, c_hi, probes)


def hls_threshold_bound(N: float) -> float:
    """Exchange strength above which symmetric splitting is provably a maximum.

    ``(9/4) * C_HLS * N^(2/3)`` with the sharp Hardy-Littlewood-Sobolev
    constant for the Coulomb kernel.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    g = math.gamma
    c_hls = math.sqrt(math.pi) * g(1.0) / g(2.5) * (g(3.0) / g(1.5)) ** (2.0 / 3.0)
    return 2.25 * c_hls * N ** (2.0 / 3.0)


def second_order_coefficient(breakdown: EnergyBreakdown) -> float:
    """``2J + (4/9) E_xc``: curvature of ``eta -> E[(1+eta) rho] + E[(1-eta) rho]`` at 0."""
    return 2.0 * breakdown.hartree + (4.0 / 9.0) * breakdown.exchange


def euler_lagrange_residual(
    density: DensityField,
    Z: float,
    c_xc: float,
    hartree_on: bool = True,
    exchange_on: bool = True,
) -> tuple[float, float]:
    """Residual of ``h phi = eps phi`` for ``phi = sqrt(rho)`` and the Fermi estimate ``eps``.

    ``h = -1/2 Laplacian - Z/r + v_H + e_xc'(rho)``.  Grid points with zero
    density are left out of the norm.
    """
    grid = density.grid
    if not isinstance(grid, RadialGrid):
        raise TypeError("euler_lagrange_residual needs a RadialGrid density")
    phi = density.sqrt
    r, w = grid.r, grid.w
    dt = np.diff(np.log(r))
    flux = FOUR_PI * np.sqrt(r[1:] * r[:-1]) * np.diff(phi) / dt
    # discrete -1/2 Laplacian: minus the divergence of the flux per unit weight
    lap = np.zeros_like(phi)
    lap[:-1] += flux
    lap[1:] -= flux
    v = -Z / r
    if hartree_on:
        v = v + hartree_potential_radial(density)
    if exchange_on:
        v = v + ExchangeSpec.dirac(c_xc).derivative(density.values)
    hphi = -0.5 * lap / w + v * phi
    mask = density.values > 0
    if not mask.all():
        inner = np.flatnonzero(mask)
        if inner.size and (np.flatnonzero(~mask) < inner[-1]).any():
            warnings.warn("zero density inside the support; those points are excluded", RuntimeWarning, stacklevel=2)
    norm2 = float(np.dot(w[mask], phi[mask] ** 2))
    if norm2 == 0:
        raise ValueError("density vanishes on the grid")
    fermi = float(np.dot(w[mask], phi[mask] * hphi[mask])) / norm2
    res = hphi[mask] - fermi * phi[mask]
    return math.sqrt(float(np.dot(w[mask], res * res)) / norm2), fermi


def rescale_fractional(alpha: float) -> tuple[float, float]:
    """Multipliers for writing ``E[alpha |phi|^2] / alpha`` with a unit-norm orbital.

    Returns ``(charge_scale, exchange_scale) = (alpha, alpha^(1/3))``: the
    Hartree term picks up ``alpha`` and the exchange constant ``alpha^(1/3)``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return alpha, alpha ** (1.0 / 3.0)


def normalized_orbital_energy(orbital_density: DensityField, Z: float, c_xc: float, alpha: float) -> float:
    """Per-electron energy of a unit-mass density with fractional-charge rescaling."""
    charge, xscale = rescale_fractional(alpha)
    br = energy_3d(orbital_density, Z, ExchangeSpec.dirac(c_xc * xscale))
    return br.kinetic + br.external + charge * br.hartree + br.exchange
