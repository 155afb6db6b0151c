"""Grids, densities, exchange functions and the energy functionals.

Two geometries are supported:

* a uniform line grid for the one-dimensional contact-potential model, where
  the nuclei act through delta wells and Hartree and exchange are both local
  ``rho**2`` terms;
* a logarithmic radial grid for spherically symmetric three-dimensional
  densities with Coulomb attraction, radial Hartree potential and Dirac
  exchange.

All energies are in Hartree atomic units.  Every discrete energy here is an
exact function of the grid values, so its gradient (used by the minimizers) is
exact as well.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

FOUR_PI = 4.0 * math.pi


class XCKind(enum.Enum):
    CONTACT_1D = "contact1d"
    DIRAC_3D = "dirac3d"


@dataclass(frozen=True)
class ExchangeSpec:
    """Local exchange energy per volume ``e_xc(rho) = -c_xc * rho**p``.

    ``p = 2`` for the 1D contact model and ``p = 4/3`` for Dirac exchange.
    """

    kind: XCKind
    c_xc: float

    def __post_init__(self):
        if not isinstance(self.kind, XCKind):
            object.__setattr__(self, "kind", XCKind(self.kind))
        if not (self.c_xc >= 0.0 and math.isfinite(self.c_xc)):
            raise ValueError(f"c_xc must be a finite nonnegative number, got {self.c_xc}")

    @classmethod
    def contact(cls, c_xc: float) -> "ExchangeSpec":
        return cls(XCKind.CONTACT_1D, float(c_xc))

    @classmethod
    def dirac(cls, c_xc: float) -> "ExchangeSpec":
        return cls(XCKind.DIRAC_3D, float(c_xc))

    @property
    def exponent(self) -> float:
        return 2.0 if self.kind is XCKind.CONTACT_1D else 4.0 / 3.0

    def energy_density(self, rho):
        rho = np.asarray(rho, dtype=float)
        return -self.c_xc * rho**self.exponent

    def derivative(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.kind is XCKind.CONTACT_1D:
            return -2.0 * self.c_xc * rho
        return -(4.0 / 3.0) * self.c_xc * np.cbrt(rho)


@dataclass(frozen=True)
class LineGrid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("LineGrid needs at least 3 points")
        if not self.x_max > self.x_min:
            raise ValueError("LineGrid needs x_max > x_min")

    @classmethod
    def with_spacing(cls, x_min: float, x_max: float, h: float) -> "LineGrid":
        """Grid starting at ``x_min`` with spacing ``h`` that reaches at least ``x_max``."""
        n = int(math.ceil((x_max - x_min) / h - 1e-9)) + 1
        return cls(x_min, x_min + (n - 1) * h, n)

    @classmethod
    def around(cls, positions: Sequence[float], margin: float, h: float) -> "LineGrid":
        """Grid with spacing ``h`` whose points hit every position in ``positions``.

        Positions are snapped to multiples of ``h``; the grid covers them with
        at least ``margin`` on both sides.
        """
        k = [round(p / h) for p in positions]
        m = int(math.ceil(margin / h))
        lo, hi = min(k) - m, max(k) + m
        return cls(lo * h, hi * h, hi - lo + 1)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def contains(self, x: float) -> bool:
        return self.x_min - 1e-12 <= x <= self.x_max + 1e-12

    def nearest_index(self, x: float) -> int:
        if not self.contains(x):
            raise ValueError(f"position {x} outside grid span [{self.x_min}, {self.x_max}]")
        return int(min(self.n - 1, max(0, round((x - self.x_min) / self.h))))

    def refined(self) -> "LineGrid":
        return LineGrid(self.x_min, self.x_max, 2 * self.n - 1)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radial grid with weights for ``int_0^inf 4 pi r^2 f(r) dr``.

    Built by :meth:`log`: the radii are uniform in ``t = ln r`` and the
    weights are the trapezoidal rule in ``t``.
    """

    r: np.ndarray
    w: np.ndarray
    dt: float = field(default=float("nan"))

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if r.ndim != 1 or r.shape != w.shape or r.size < 3:
            raise ValueError("radii and weights must be 1D arrays of equal length >= 3")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be positive and strictly increasing")
        if np.any(w <= 0):
            raise ValueError("quadrature weights must be positive")
        r.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "w", w)

    @classmethod
    def log(cls, r_min: float = 1e-5, r_max: float = 60.0, n: int = 600) -> "RadialGrid":
        t = np.linspace(math.log(r_min), math.log(r_max), n)
        dt = t[1] - t[0]
        r = np.exp(t)
        w = FOUR_PI * r**3 * dt
        w[0] *= 0.5
        w[-1] *= 0.5
        return cls(r, w, dt)

    @classmethod
    def for_charge(cls, Z: float, n: int = 600) -> "RadialGrid":
        return cls.log(1e-5 / Z, 60.0 / Z, n)

    @property
    def n(self) -> int:
        return self.r.size

    def __eq__(self, other):
        return (
            isinstance(other, RadialGrid)
            and np.array_equal(self.r, other.r)
            and np.array_equal(self.w, other.w)
        )

    def __hash__(self):
        return hash((self.r.tobytes(), self.w.tobytes()))


@dataclass(frozen=True, eq=False)
class DensityField:
    """Nonnegative density sampled on a grid."""

    grid: LineGrid | RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        n = self.grid.n
        if v.shape != (n,):
            raise ValueError(f"density has shape {v.shape}, grid has {n} points")
        if not np.all(np.isfinite(v)):
            raise ValueError("density contains non-finite values")
        if np.any(v < 0):
            raise ValueError("density must be nonnegative everywhere")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, f) -> "DensityField":
        x = grid.points if isinstance(grid, LineGrid) else grid.r
        return cls(grid, f(x))

    @classmethod
    def from_sqrt(cls, grid, phi) -> "DensityField":
        phi = np.asarray(phi, dtype=float)
        return cls(grid, phi * phi)

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights if isinstance(self.grid, LineGrid) else self.grid.w

    @property
    def mass(self) -> float:
        return float(np.dot(self.weights, self.values))

    @property
    def sqrt(self) -> np.ndarray:
        return np.sqrt(self.values)

    def scaled(self, t: float) -> "DensityField":
        return DensityField(self.grid, t * self.values)

    def with_mass(self, mass: float) -> "DensityField":
        m = self.mass
        if m <= 0:
            raise ValueError("cannot rescale a zero density")
        return self.scaled(mass / m)

    def gradient_norm(self) -> float:
        """Discrete ``H^1`` seminorm squared of ``sqrt(rho)`` (finite for any grid density)."""
        phi = self.sqrt
        if isinstance(self.grid, LineGrid):
            return float(np.sum(np.diff(phi) ** 2) / self.grid.h)
        return float(2.0 * radial_kinetic(self.grid, phi))


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    external: float
    hartree: float
    exchange: float

    @property
    def total(self) -> float:
        return self.kinetic + self.external + self.hartree + self.exchange

    def as_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "external": self.external,
            "hartree": self.hartree,
            "exchange": self.exchange,
            "total": self.total,
        }


# ---------------------------------------------------------------------------
# 1D contact model

def line_kinetic(grid: LineGrid, phi) -> float:
    """``1/2 int (phi')^2`` with forward differences."""
    return 0.5 * float(np.sum(np.diff(phi) ** 2)) / grid.h


def well_indices(grid: LineGrid, wells) -> list[tuple[int, float]]:
    out = []
    for pos, Z in wells:
        if not Z > 0:
            raise ValueError(f"well strength must be positive, got {Z}")
        out.append((grid.nearest_index(pos), float(Z)))
    return out


def energy_1d(density: DensityField, wells, xc: ExchangeSpec) -> EnergyBreakdown:
    """Energy of a 1D density in delta wells ``-Z_i delta(x - x_i)``.

    ``wells`` is a sequence of ``(position, Z)`` pairs.  The external energy
    samples the density at the grid point nearest each well.
    """
    grid = density.grid
    if not isinstance(grid, LineGrid):
        raise TypeError("energy_1d needs a density on a LineGrid")
    if xc.kind is not XCKind.CONTACT_1D:
        raise ValueError("energy_1d needs contact exchange")
    rho = density.values
    ext = -sum(Z * rho[k] for k, Z in well_indices(grid, wells))
    w = grid.weights
    rho2 = float(np.dot(w, rho * rho))
    return EnergyBreakdown(
        kinetic=line_kinetic(grid, density.sqrt),
        external=float(ext),
        hartree=0.5 * rho2,
        exchange=-xc.c_xc * rho2,
    )


# ---------------------------------------------------------------------------
# 3D radial model

def radial_kinetic(grid: RadialGrid, phi) -> float:
    """``1/2 int 4 pi r^2 (phi')^2 dr`` as a sum over grid intervals.

    With ``t = ln r`` the integrand is ``4 pi r (d phi/dt)^2 dt``; each interval
    uses its geometric-midpoint radius.
    """
    r = grid.r
    dt = np.diff(np.log(r))
    rmid = np.sqrt(r[1:] * r[:-1])
    return 0.5 * FOUR_PI * float(np.sum(rmid * np.diff(phi) ** 2 / dt))


def hartree_potential_radial(density: DensityField) -> np.ndarray:
    """Hartree potential of a spherical density via the shell theorem.

    ``v(r_i) = (1/r_i) sum_{j<=i} w_j rho_j + sum_{j>i} w_j rho_j / r_j``,
    the discrete form of ``Q(r)/r + int_r^inf 4 pi s rho(s) ds``.
    """
    grid = density.grid
    if not isinstance(grid, RadialGrid):
        raise TypeError("hartree_potential_radial needs a RadialGrid density")
    return _hartree_potential(grid, density.values)


def _hartree_potential(grid: RadialGrid, rho) -> np.ndarray:
    q = grid.w * rho
    inner = np.cumsum(q)
    outer = np.cumsum((q / grid.r)[::-1])[::-1]
    outer = np.append(outer[1:], 0.0)
    return inner / grid.r + outer


def hartree_energy_radial(density: DensityField) -> float:
    v = hartree_potential_radial(density)
    return 0.5 * float(np.dot(density.grid.w, density.values * v))


def energy_3d(
    density: DensityField,
    Z: float,
    xc: ExchangeSpec,
    hartree_on: bool = True,
    exchange_on: bool = True,
) -> EnergyBreakdown:
    """TFDW-type energy (von Weizsaecker + Coulomb + Hartree + Dirac) of a radial density."""
    grid = density.grid
    if not isinstance(grid, RadialGrid):
        raise TypeError("energy_3d needs a density on a RadialGrid")
    if xc.kind is not XCKind.DIRAC_3D:
        raise ValueError("energy_3d needs Dirac exchange")
    if not Z > 0:
        raise ValueError("nuclear charge must be positive")
    rho = density.values
    w = grid.w
    hartree = hartree_energy_radial(density) if hartree_on else 0.0
    exchange = float(np.dot(w, xc.energy_density(rho))) if exchange_on else 0.0
    return EnergyBreakdown(
        kinetic=radial_kinetic(grid, density.sqrt),
        external=-Z * float(np.dot(w, rho / grid.r)),
        hartree=hartree,
        exchange=exchange,
    )
