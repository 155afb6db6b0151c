"""Closed-form ground state of the 1D contact-potential atom.

For an attractive net self-interaction (``c_xc > 1/2``) the minimizer of

    E[rho] = 1/2 int (sqrt(rho)')^2 - rho(0) + (1/2 - c_xc) int rho^2

with mass ``alpha`` is ``rho = alpha * psi**2``, ``psi = a sech(b|x| + x0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ClosedFormDomainError(ValueError):
    """Parameters outside the range where the sech ground state applies."""


class DegenerateProfileError(ClosedFormDomainError):
    """``b == 1``: the sech profile degenerates (``a``, ``x0`` diverge)."""


def _arctanh(t: float) -> float:
    return 0.5 * math.log((1.0 + t) / (1.0 - t))


def decay_rate(alpha: float, c_xc: float) -> float:
    return 1.0 - alpha * (1.0 - 2.0 * c_xc) / 2.0


@dataclass(frozen=True)
class SechSolution:
    alpha: float
    c_xc: float
    a: float
    b: float
    x0: float

    def psi(self, x):
        """Unit-norm orbital ``a sech(b|x| + x0)``."""
        y = self.b * np.abs(np.asarray(x, dtype=float)) + self.x0
        e = np.exp(-y)
        return self.a * 2.0 * e / (1.0 + e * e)

    def density(self, x):
        return self.alpha * self.psi(x) ** 2

    @property
    def rho0(self) -> float:
        return self.alpha * (self.b + 1.0) / 2.0


def sech_params(alpha: float, c_xc: float) -> SechSolution:
    if not alpha > 0:
        raise ClosedFormDomainError(f"closed form invalid; use grid solver (alpha={alpha} must be > 0)")
    b = decay_rate(alpha, c_xc)
    if b == 1.0:
        raise DegenerateProfileError(
            f"closed form invalid; use grid solver (b = 1 at alpha={alpha}, c_xc={c_xc}: profile degenerates)"
        )
    if b < 1.0:
        raise ClosedFormDomainError(
            f"closed form invalid; use grid solver (b = {b:.6g} < 1 needs c_xc > 1/2, got {c_xc})"
        )
    a = math.sqrt(b * b / (2.0 * (b - 1.0)))
    return SechSolution(alpha=alpha, c_xc=c_xc, a=a, b=b, x0=_arctanh(1.0 / b))


def atom_components(alpha: float, c_xc: float) -> dict:
    """Exact kinetic, ``rho(0)`` and ``int rho^2`` of the ground state."""
    _check_domain(alpha, c_xc)
    b = decay_rate(alpha, c_xc)
    return {
        "kinetic": alpha * (b * b + b + 1.0) / 6.0,
        "rho0": alpha * (b + 1.0) / 2.0,
        "rho2": alpha * alpha * (2.0 * b + 1.0) / 6.0,
    }


def _check_domain(alpha, c_xc):
    if alpha < 0:
        raise ClosedFormDomainError(f"closed form invalid; alpha={alpha} must be >= 0")
    if c_xc < 0.5:
        raise ClosedFormDomainError(
            f"closed form invalid; use grid solver (c_xc={c_xc} < 1/2 not covered)"
        )


def atom_energy_exact(alpha: float, c_xc: float) -> float:
    """Ground-state energy ``I_alpha`` for ``c_xc >= 1/2``.

    At ``c_xc = 1/2`` the nonlinear terms cancel and the value is the linear
    delta-well result ``-alpha/2``.
    """
    _check_domain(alpha, c_xc)
    if alpha == 0:
        return 0.0
    if c_xc == 0.5:
        return -alpha / 2.0
    comp = atom_components(alpha, c_xc)
    return comp["kinetic"] - comp["rho0"] + (0.5 - c_xc) * comp["rho2"]


def splitting_sum_exact(alpha: float, c_xc: float) -> float:
    """``I_alpha + I_{2-alpha}`` as a polynomial in ``alpha``."""
    _check_domain(alpha, c_xc)
    c2 = c_xc * c_xc
    return (
        alpha * alpha * (3.0 - 12.0 * c2)
        + 6.0 * alpha * (4.0 * c2 - 1.0)
        - 4.0 * (1.0 + 2.0 * c_xc + 4.0 * c2)
    ) / 12.0


def splitting_argmin_exact(c_xc: float) -> float:
    """Minimizer over ``[0, 1]`` of the splitting sum; the smaller endpoint wins ties."""
    if not c_xc > 0.5:
        raise ClosedFormDomainError(f"splitting argmin needs c_xc > 1/2, got {c_xc}")
    # downward parabola with vertex at alpha = 1, so the minimum sits at an end
    lo, hi = splitting_sum_exact(0.0, c_xc), splitting_sum_exact(1.0, c_xc)
    return 0.0 if lo <= hi else 1.0
