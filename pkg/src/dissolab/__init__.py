"""Numerical laboratory for dissociation limits of single-density DFT models."""
from .analytic1d import (
    ClosedFormDomainError,
    SechSolution,
    atom_energy_exact,
    sech_params,
    splitting_argmin_exact,
    splitting_sum_exact,
)
from .descent import ConvergenceError, GridTooSmallError, SolverConfig
from .model import (
    DensityField,
    EnergyBreakdown,
    ExchangeSpec,
    LineGrid,
    RadialGrid,
    XCKind,
    energy_1d,
    energy_3d,
    hartree_potential_radial,
)
from .solver1d import (
    DissociationPoint,
    dissociation_curve_1d,
    minimize_atom_1d,
    minimize_molecule_1d,
    splitting_scan_1d,
    two_particle_ground,
)
from .solver3d import (
    SplittingScan,
    ThresholdBracket,
    euler_lagrange_residual,
    hls_threshold_bound,
    minimize_radial,
    rescale_fractional,
    splitting_scan_3d,
    symmetry_threshold,
)

__version__ = "0.1.0"
