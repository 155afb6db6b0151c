"""Mass-constrained minimization of ``E[phi**2]`` over the sphere ``int phi^2 = mass``.

Every functional handled here has the shape

    E[phi] = 1/2 phi.A.phi + sum_i D_i phi_i^2 + F(rho),   rho = phi^2,

with ``A`` a symmetric tridiagonal stiffness matrix, ``D`` a diagonal external
term and ``F`` a local-in-the-grid nonlinearity (Hartree plus exchange).  The
gradient is ``2 H[phi] phi`` with the tridiagonal one-body operator
``H = A/2 + diag(D + dF/drho)``.

The iteration is a projected, preconditioned gradient descent.  The residual
``r = H phi - lambda W phi`` (``W`` the quadrature weights, ``lambda`` the
Rayleigh quotient) is preconditioned by ``(H - sigma W)^-1`` with ``sigma``
below the lowest eigenvalue of ``H``, so the preconditioner is positive
definite and the search direction is always a descent direction on the
sphere.  Steps are accepted by Armijo backtracking on the total energy and the
iterate is renormalized after every step.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal, solveh_banded

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules and start for the density minimizers.

    ``init`` is ``"exponential"``, ``"uniform"`` or a :class:`DensityField`
    on the solve grid.  With ``seed`` set, one extra randomly perturbed copy
    of the first start joins the multi-start set.
    """

    energy_tol: float = 1e-12
    grad_tol: float = 1e-7
    max_iter: int = 5000
    step: float = 1.0
    init: object = "exponential"
    seed: int | None = None

    def __post_init__(self):
        if not (self.energy_tol > 0 and self.grad_tol > 0 and self.step > 0):
            raise ValueError("tolerances and step must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


class ConvergenceError(RuntimeError):
    """Minimizer did not meet its tolerances; carries the last iterate."""

    def __init__(self, message, density=None, diagnostics=None):
        super().__init__(message)
        self.density = density
        self.diagnostics = diagnostics or {}


class GridTooSmallError(RuntimeError):
    """Density at the grid edge exceeds the boundary tolerance."""


@dataclass
class Problem:
    kin_diag: np.ndarray
    kin_off: np.ndarray
    weights: np.ndarray
    ext_diag: np.ndarray
    # rho -> (hartree, exchange, d(hartree + exchange)/d rho_i)
    nonlinear: Callable[[np.ndarray], tuple[float, float, np.ndarray]]

    def parts(self, phi):
        # difference form; the quadratic form phi.A.phi cancels badly
        kin = -0.5 * float(np.dot(self.kin_off, np.diff(phi) ** 2))
        rho = phi * phi
        ext = float(np.dot(self.ext_diag, rho))
        hartree, exchange, drho = self.nonlinear(rho)
        return (kin, ext, hartree, exchange), drho

    def energy(self, phi) -> float:
        return sum(self.parts(phi)[0])

    def gradient(self, phi) -> np.ndarray:
        diag, off, _ = self.hamiltonian(phi)
        return 2.0 * _tri_matvec(diag, off, phi)

    def hamiltonian(self, phi):
        parts, drho = self.parts(phi)
        diag = 0.5 * self.kin_diag + self.ext_diag + drho
        return diag, 0.5 * self.kin_off, parts


def with_perturbed_start(starts: list, cfg: SolverConfig) -> list:
    if cfg.seed is None:
        return starts
    rng = np.random.default_rng(cfg.seed)
    base = starts[0]
    return starts + [base * (1.0 + 0.2 * rng.uniform(-1.0, 1.0, base.size))]


def stiffness(coupling: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal ``A`` with ``phi.A.phi = sum_k coupling_k (phi_{k+1} - phi_k)^2``."""
    n = coupling.size + 1
    diag = np.zeros(n)
    diag[:-1] += coupling
    diag[1:] += coupling
    return diag, -coupling


def _tri_matvec(diag, off, x):
    y = diag * x
    y[:-1] += off * x[1:]
    y[1:] += off * x[:-1]
    return y


def lowest_eigenvalue(diag, off, weights) -> float:
    """Lowest eigenvalue of the pencil ``(H, W)`` for tridiagonal ``H`` and diagonal ``W``."""
    s = 1.0 / np.sqrt(weights)
    d = diag * s * s
    e = off * s[:-1] * s[1:]
    return float(eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 0))[0])


def _shifted_solve(diag, off, w, lam, rhs):
    # eigh_tridiagonal is only accurate to eps*|W^-1 H|, which is large on log
    # grids; a failed Cholesky factorization is the reliable indefiniteness test
    eps0 = min(lowest_eigenvalue(diag, off, w), lam)
    gap = max(0.1 * abs(eps0), 1e-3)
    ab = np.zeros((2, diag.size))
    ab[0, 1:] = off
    for _ in range(40):
        ab[1] = diag - (eps0 - gap) * w
        try:
            return solveh_banded(ab, rhs, check_finite=False)
        except np.linalg.LinAlgError:
            gap *= 4.0
    raise ConvergenceError("could not build a positive definite preconditioner")


@dataclass
class DescentResult:
    phi: np.ndarray
    parts: tuple
    iterations: int
    grad_norm: float
    fermi: float
    history: list = field(default_factory=list)

    @property
    def energy(self) -> float:
        return sum(self.parts)


def residual(problem: Problem, phi) -> tuple[float, float]:
    """Weighted norm of ``h phi - lambda phi`` relative to ``|phi|`` and ``lambda``."""
    diag, off, _ = problem.hamiltonian(phi)
    Hphi = _tri_matvec(diag, off, phi)
    w = problem.weights
    mass = float(np.dot(w, phi * phi))
    lam = float(np.dot(phi, Hphi)) / mass
    r = Hphi - lam * w * phi
    return float(np.sqrt(np.sum(r * r / w) / mass)), lam


def minimize(problem: Problem, phi0, mass: float, cfg: SolverConfig) -> DescentResult:
    w = problem.weights
    if mass <= 0:
        raise ValueError("mass must be positive")

    def normalize(p):
        return p * np.sqrt(mass / np.dot(w, p * p))

    phi = normalize(np.abs(np.asarray(phi0, dtype=float)))
    diag, off, parts = problem.hamiltonian(phi)
    energy = sum(parts)
    history = [energy]
    d_energy = np.inf
    step = cfg.step
    gnorm = np.inf
    lam = np.nan
    for it in range(cfg.max_iter + 1):
        Hphi = _tri_matvec(diag, off, phi)
        lam = float(np.dot(phi, Hphi)) / mass
        r = Hphi - lam * w * phi
        gnorm = float(np.sqrt(np.sum(r * r / w) / mass))
        if gnorm <= cfg.grad_tol and d_energy <= cfg.energy_tol:
            return DescentResult(np.abs(phi), parts, it, gnorm, lam, history)
        if it == cfg.max_iter:
            break

        direction = -_shifted_solve(diag, off, w, lam, r)
        slope = 2.0 * float(np.dot(r, direction))

        t = step
        while True:
            trial = normalize(phi + t * direction)
            t_diag, t_off, t_parts = problem.hamiltonian(trial)
            t_energy = sum(t_parts)
            if t_energy <= energy + 1e-4 * t * slope + 1e-15 * abs(energy):
                break
            t *= 0.5
            if t < 1e-12:
                break
        if t < 1e-12:
            # no descent left at working precision
            d_energy = 0.0
            if gnorm <= cfg.grad_tol:
                return DescentResult(np.abs(phi), parts, it, gnorm, lam, history)
            break
        d_energy = abs(energy - t_energy)
        phi, diag, off, parts, energy = trial, t_diag, t_off, t_parts, t_energy
        history.append(energy)
        step = min(cfg.step, 2.0 * t)

    raise ConvergenceError(
        f"no convergence after {cfg.max_iter} iterations (grad norm {gnorm:.3e})",
        density=np.abs(phi) ** 2,
        diagnostics={"grad_norm": gnorm, "energy": energy, "fermi": lam, "iterations": cfg.max_iter},
    )
