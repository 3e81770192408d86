//! Estimation of the contrast threshold `c` by one-dimensional search.

mod energy;
mod search;

pub use energy::{
    default_decay, edi_energy, sweep_c, EdiEnergy, EdiEnergyTerms, MediEnergy, DEFAULT_LAMBDA,
};
pub use search::{
    fibonacci_depth, fibonacci_search, golden_section, grid_search, minimize, EnergyTrace,
    SearchConfig, SearchMethod, SearchStatus, INV_GOLDEN,
};
