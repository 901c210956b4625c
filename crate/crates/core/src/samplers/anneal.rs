use rand::Rng;

use super::{check_request, SampleSet, Sampler, SamplerConfig};
use crate::error::Result;
use crate::exec::{derive_seed, rng_from_seed, Exec};
use crate::ising::{DenseIsing, IsingModel};
use crate::spins::Spin;

/// Ratio between the final and initial inverse temperature of the
/// auto-derived schedule.
const AUTO_BETA_SPAN: (f64, f64) = (1.0, 50.0);

/// Single-spin Metropolis simulated annealing. Every read is an independent
/// restart seeded from `(cfg.seed, read index)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SimulatedAnnealer {
    pub exec: Exec,
}

impl SimulatedAnnealer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_exec(exec: Exec) -> Self {
        SimulatedAnnealer { exec }
    }
}

/// `len` inverse temperatures spaced geometrically from `beta0` to `beta1`.
pub fn geometric_schedule(beta0: f64, beta1: f64, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![beta1];
    }
    let ratio = (beta1 / beta0).ln() / (len - 1) as f64;
    (0..len).map(|t| beta0 * (ratio * t as f64).exp()).collect()
}

fn schedule_for(model: &DenseIsing, cfg: &SamplerConfig) -> Vec<f64> {
    let (b0, b1) = cfg.beta_range.unwrap_or_else(|| {
        let scale = model.max_abs_coefficient();
        let scale = if scale > 0.0 { scale } else { 1.0 };
        (AUTO_BETA_SPAN.0 / scale, AUTO_BETA_SPAN.1 / scale)
    });
    geometric_schedule(b0, b1, cfg.sweeps)
}

fn anneal_once(model: &DenseIsing, schedule: &[f64], seed: u64) -> Vec<Spin> {
    let n = model.n;
    let mut rng = rng_from_seed(seed);
    let mut spins: Vec<Spin> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let mut fields = model.local_fields(&spins);
    for &beta in schedule {
        for i in 0..n {
            let delta_e = -2.0 * spins[i] as f64 * fields[i];
            let accept = delta_e <= 0.0 || rng.random::<f64>() < (-beta * delta_e).exp();
            if accept {
                let step = -2.0 * spins[i] as f64;
                spins[i] = -spins[i];
                let row = &model.j[i * n..(i + 1) * n];
                for (f, &j) in fields.iter_mut().zip(row) {
                    *f += step * j;
                }
            }
        }
    }
    spins
}

impl Sampler for SimulatedAnnealer {
    fn sample(&self, model: &IsingModel, cfg: &SamplerConfig) -> Result<SampleSet> {
        check_request(model, cfg)?;
        let dense = model.to_dense();
        let schedule = schedule_for(&dense, cfg);
        let reads = self
            .exec
            .map_indexed(cfg.num_reads, |read| anneal_once(&dense, &schedule, derive_seed(cfg.seed, &[read as u64])));
        SampleSet::from_reads(model, reads)
    }

    fn fingerprint(&self) -> String {
        "sa".into()
    }
}
