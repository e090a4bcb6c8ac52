//! Time evolution, steady states and observables.

mod evolve;
mod observables;
mod steady;

pub use evolve::{
    evolve, solve_steady_evolved, EvolutionConfig, Evolution, TimeSeries, DIVERGENCE_BOUND,
    TRACE_DRIFT_TOL,
};
pub use observables::{
    mean_amplitude, mean_amplitude_squared, mean_photon_number, observables, quadrature_moments,
    Observables, QuadratureMoments,
};
pub use steady::{
    solve_steady_direct, solve_steady_direct_with, SteadyMethod, SteadyStateResult,
    DEFAULT_SS_TOL, DEGENERACY_THRESHOLD,
};
