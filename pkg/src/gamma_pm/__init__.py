"""Numerical checks of the Gamma-limit of second-order regularised Perona-Malik energies."""
from .errors import (ConvergenceError, CoverageError, DegenerateSliceError, DivergenceError,
                     DomainError, GammaPMError, GeometryError, ResolutionError,
                     StiffnessError, ZeroMeasureError)
from .functions import (GrowthFunction, JumpCost, SymmetricMatrix2, growth_exponent_estimate,
                        hessian_norm, jump_cost_catalog, jump_exponent, phi_eval)
from .grid import GridFunction
from .partition import PiecewiseConstant1D, PiecewisePolyFunction, extend_constant
from .profile import (SIGMA0_EXACT, ProfileOptions, ProfileSolution, build_recovery_1d,
                      scaling_check, sigma_estimate, solve_profile)
from .energy import (build_recovery_2d, fnu_1d, fnu_2d, minimize_fnu_1d, pm_epsilon_from_nu)
from .limit import (SliceSpec, anisotropic_energy_2d, limit_energy_1d, limit_energy_2d,
                    slice_pc, slicing_identity_check, sup_measure_envelope, truncate)
from .density import (ApproximationReport, LatticeShift, VectorMeasureAtoms,
                      averaged_inequality_check, best_direction, discrete_energy,
                      interpolate_lattice, polytope_approximate,
                      subadditive_slice_inequality_check, tv_partition_check)
from .flow import FlowState, detect_plateaus, flow_run, flow_step

__version__ = "0.1.0"
