//! Truncated-Fock-space simulation of a driven Kerr cavity under homodyne
//! feedback: master-equation dynamics, direct steady states, Wigner
//! functions and their integrated negativity, and parameter sweeps.
//!
//! Rates are in units of the cavity loss rate, with `hbar = 1`.

pub mod analysis;
pub mod banded;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod io;
pub mod liouvillian;
pub mod master;
pub mod par;
pub mod params;
pub mod state;
pub mod sweep;
pub mod wigner;

pub use dynamics::{
    evolve, observables, solve_steady_direct, solve_steady_evolved, EvolutionConfig, Evolution,
    Observables, SteadyMethod, SteadyStateResult, TimeSeries,
};
pub use error::{Error, ErrorCategory, Result};
pub use liouvillian::{build_liouvillian, Liouvillian};
pub use master::apply_rhs;
pub use params::{ModelParams, TermToggles};
pub use state::DensityMatrix;
pub use wigner::{negativity, negativity_of_state, wigner_transform, PhaseSpaceGrid, WignerField};

/// Version tag written into output files.
pub const CODE_TAG: &str = concat!("kfs-", env!("CARGO_PKG_VERSION"));
