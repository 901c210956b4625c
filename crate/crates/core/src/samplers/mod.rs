//! The sampling contract shared by every backend, plus the backends: an
//! exhaustive ground-state sampler, a simulated annealer and a wrapper that
//! perturbs models the way imperfect annealing hardware would.

mod anneal;
mod biased;
mod exact;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use anneal::{geometric_schedule, SimulatedAnnealer};
pub use biased::{BiasedSampler, HardwareBiasModel, DEFAULT_HARDWARE_BETA};
pub use exact::{ExactSampler, MAX_EXACT_VARIABLES};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::spins::Spin;

/// One distinct assignment and how many reads returned it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub spins: Vec<Spin>,
    pub count: usize,
    pub energy: f64,
}

/// The reads returned by one sampler invocation, aggregated by assignment
/// and ordered by energy (ties broken by the assignment itself).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    n: usize,
    records: Vec<SampleRecord>,
    total_reads: usize,
}

impl SampleSet {
    /// Aggregates raw reads; energies are evaluated against `model`.
    pub fn from_reads(model: &IsingModel, reads: impl IntoIterator<Item = Vec<Spin>>) -> Result<Self> {
        let mut counts: BTreeMap<Vec<Spin>, usize> = BTreeMap::new();
        for read in reads {
            crate::spins::check_assignment(&read, model.n())?;
            *counts.entry(read).or_insert(0) += 1;
        }
        let mut records: Vec<SampleRecord> = counts
            .into_iter()
            .map(|(spins, count)| {
                let energy = model.energy_unchecked(&spins);
                SampleRecord { spins, count, energy }
            })
            .collect();
        records.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.spins.cmp(&b.spins)));
        let total_reads = records.iter().map(|r| r.count).sum();
        Ok(SampleSet { n: model.n(), records, total_reads })
    }

    /// Same reads, energies recomputed against another model on the same
    /// variables.
    pub fn rescored(&self, model: &IsingModel) -> Result<Self> {
        if model.n() != self.n {
            return Err(Error::DimensionMismatch(format!("sample set has {} variables, model {}", self.n, model.n())));
        }
        let reads = self.records.iter().flat_map(|r| std::iter::repeat_n(r.spins.clone(), r.count));
        SampleSet::from_reads(model, reads)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn total_reads(&self) -> usize {
        self.total_reads
    }

    pub fn lowest(&self) -> Option<&SampleRecord> {
        self.records.first()
    }
}

/// Per-invocation sampler settings. `sweeps` and `beta_range` only matter to
/// the annealer; `beta_range = None` derives the schedule from the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub num_reads: usize,
    pub seed: u64,
    pub sweeps: usize,
    pub beta_range: Option<(f64, f64)>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { num_reads: 100, seed: 0, sweeps: 1000, beta_range: None }
    }
}

impl SamplerConfig {
    pub fn new(num_reads: usize, seed: u64) -> Self {
        SamplerConfig { num_reads, seed, ..Default::default() }
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::InvalidParameter("num_reads must be at least 1".into()));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
        }
        if let Some((b0, b1)) = self.beta_range {
            if !(b0 > 0.0 && b0 <= b1 && b1.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "beta range ({b0}, {b1}) must satisfy 0 < initial <= final"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_request(model: &IsingModel, cfg: &SamplerConfig) -> Result<()> {
    if model.n() == 0 {
        return Err(Error::InvalidParameter("cannot sample a model with no variables".into()));
    }
    cfg.validate()
}

/// A source of spin assignments for an Ising model. Implementations must be
/// deterministic in `(model, cfg)`.
pub trait Sampler: Send + Sync {
    fn sample(&self, model: &IsingModel, cfg: &SamplerConfig) -> Result<SampleSet>;

    /// Short stable identifier, used to key cached constraints.
    fn fingerprint(&self) -> String;
}

impl<S: Sampler + ?Sized> Sampler for &S {
    fn sample(&self, model: &IsingModel, cfg: &SamplerConfig) -> Result<SampleSet> {
        (**self).sample(model, cfg)
    }

    fn fingerprint(&self) -> String {
        (**self).fingerprint()
    }
}

impl<S: Sampler + ?Sized> Sampler for Box<S> {
    fn sample(&self, model: &IsingModel, cfg: &SamplerConfig) -> Result<SampleSet> {
        (**self).sample(model, cfg)
    }

    fn fingerprint(&self) -> String {
        (**self).fingerprint()
    }
}
