//! Bias correction for Ising formulations of balanced graph partitioning.
//!
//! The balance constraint of graph partitioning is graph independent: every
//! balanced assignment has the same penalty energy. A sampler that returns
//! some balanced assignments more often than others is therefore biased, and
//! that bias can be measured and corrected on the constraint alone before
//! the cut objective is added back.
//!
//! - [`graph`]: instances, cut size and balance.
//! - [`ising`]: model construction, energy, normalization, corrected model.
//! - [`samplers`]: exact, simulated annealing and hardware-bias emulation.
//! - [`debias`]: bias measurement and the iterative correction loop.
//! - [`experiments`]: end-to-end runs producing CSV/JSON artifacts.

pub mod debias;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod graph;
pub mod ising;
pub mod samplers;
pub mod spins;

pub use debias::{
    calculate_bias, correct_constraint, debias_constraint, full_pipeline, update_terms, BiasReport, DebiasConfig,
    DebiasTrajectory, Termination,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use graph::{imbalance, is_balanced, Graph};
pub use ising::{assemble_corrected, default_weights, CouplerSet, IsingModel};
pub use samplers::{
    BiasedSampler, ExactSampler, HardwareBiasModel, SampleSet, Sampler, SamplerConfig, SimulatedAnnealer,
};
pub use spins::Spin;
