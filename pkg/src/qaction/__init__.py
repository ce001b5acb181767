"""qaction: fit a renormalized action that reproduces Euclidean transition
amplitudes globally at fixed transition time, then analyze its instantons
and its classical chaos (Poincare sections, Lyapunov exponents)."""

__version__ = "0.1.0"

from .errors import (ConfigError, ConjugatePoint, EmptyShell, EmptyTable,
                     GridTooCoarse, MissingEntry, NegativeKernel,
                     NoConvergence, NoDoubleWell, NonPositiveTime,
                     NotConverged, Overflow, PathFailure, QuantumActionError,
                     TooFewCrossings, Unbounded, Underflow)
from .model import (ActionSpec, Conventions, CONVENTIONS, Potential1D,
                    Potential2D, TemperaturePoint, evaluate_potential,
                    potential_gradient, potential_minima_1d,
                    temperature_of_time)
from .propagator import (AmplitudeTable, KernelSlice, SpatialGrid, amplitude,
                         amplitude_table, default_grid, evolve_kernel,
                         evolve_state, free_kernel, ground_state_projection,
                         harmonic_kernel)
from .paths import (TrajectoryBV, euclidean_action, path_energy_residual,
                    solve_euclidean_path)
from .fitting import (FitConfig, ParameterFlow, QuantumActionFit,
                      default_boundary_1d, default_boundary_2d,
                      fit_quantum_action, flow_convergence, parameter_flow)
from .instanton import (InstantonProfile, find_instanton, instanton_action,
                        instanton_action_quadrature, quantum_instanton)
from .dynamics import (LyapunovEstimate, PhaseState, PoincareSectionData,
                       Trajectory, classify_chaos, energy_of_state,
                       integrate_rk4, lyapunov_max, poincare_section,
                       sample_energy_shell)
from .pipeline import RunConfig, RunManifest, parse_config, run_pipeline

__all__ = [name for name in dir() if not name.startswith("_")]
