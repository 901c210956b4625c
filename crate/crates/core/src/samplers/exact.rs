use rand::Rng;

use super::{check_request, SampleSet, Sampler, SamplerConfig};
use crate::error::{Error, Result};
use crate::exec::{rng_from_seed, Exec};
use crate::ising::{DenseIsing, IsingModel};
use crate::spins::spins_from_bits;

/// Largest model the exhaustive sampler accepts.
pub const MAX_EXACT_VARIABLES: usize = 24;

const BLOCK_BITS: usize = 14;

/// Enumerates all `2^n` assignments, keeps the exact ground-state set and
/// draws reads uniformly from it. This is the reference unbiased sampler.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactSampler {
    pub exec: Exec,
}

impl ExactSampler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ground energy and the ground-state set as bitmasks (bit `i` set means
    /// spin `i` is +1), in increasing mask order.
    pub fn ground_states(&self, model: &IsingModel) -> Result<(f64, Vec<u64>)> {
        let n = model.n();
        if n > MAX_EXACT_VARIABLES {
            return Err(Error::TooLargeForEnumeration { n, max: MAX_EXACT_VARIABLES });
        }
        let dense = model.to_dense();
        let scale: f64 = dense.h.iter().chain(&dense.j).map(|v| v.abs()).sum::<f64>() + dense.offset.abs();
        let tol = 1e-9 * (1.0 + scale);
        let low_bits = n.min(BLOCK_BITS);
        let blocks = 1usize << (n - low_bits);
        let partial = self.exec.map_indexed(blocks, |block| enumerate_block(&dense, block as u64, low_bits, tol));
        let ground = partial.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
        let states = partial
            .into_iter()
            .flat_map(|(_, states)| states)
            .filter(|&(_, e)| e <= ground + tol)
            .map(|(mask, _)| mask)
            .collect();
        Ok((ground, states))
    }
}

/// Gray-code walk over the low bits of one block of the state space.
/// Returns the block minimum and every state within `tol` of it.
fn enumerate_block(model: &DenseIsing, block: u64, low_bits: usize, tol: f64) -> (f64, Vec<(u64, f64)>) {
    let n = model.n;
    let mut mask = block << low_bits;
    let mut spins = spins_from_bits(mask, n);
    let mut fields = model.local_fields(&spins);
    let mut energy = model.offset
        + (0..n)
            .map(|i| {
                let pair_half: f64 = (0..n).map(|k| model.j[i * n + k] * spins[k] as f64).sum::<f64>() / 2.0;
                spins[i] as f64 * (model.h[i] + pair_half)
            })
            .sum::<f64>();
    let mut best = energy;
    let mut kept = vec![(mask, energy)];
    for step in 1u64..(1u64 << low_bits) {
        let bit = step.trailing_zeros() as usize;
        let s = spins[bit] as f64;
        energy -= 2.0 * s * fields[bit];
        spins[bit] = -spins[bit];
        mask ^= 1 << bit;
        let delta = -2.0 * s;
        let row = &model.j[bit * n..(bit + 1) * n];
        for (f, &j) in fields.iter_mut().zip(row) {
            *f += delta * j;
        }
        if energy < best - tol {
            best = energy;
            kept.retain(|&(_, e)| e <= best + tol);
        }
        if energy <= best + tol {
            best = best.min(energy);
            kept.push((mask, energy));
        }
    }
    kept.sort_unstable_by_key(|&(m, _)| m);
    (best, kept)
}

impl Sampler for ExactSampler {
    fn sample(&self, model: &IsingModel, cfg: &SamplerConfig) -> Result<SampleSet> {
        check_request(model, cfg)?;
        let (_, states) = self.ground_states(model)?;
        let mut rng = rng_from_seed(cfg.seed);
        let reads = (0..cfg.num_reads).map(|_| spins_from_bits(states[rng.random_range(0..states.len())], model.n()));
        SampleSet::from_reads(model, reads)
    }

    fn fingerprint(&self) -> String {
        "exact".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{imbalance, Graph};

    #[test]
    fn constraint_ground_sets() {
        let s = ExactSampler::new();
        let (e4, g4) = s.ground_states(&IsingModel::constraint(4, 1.0).unwrap()).unwrap();
        assert_eq!((e4, g4.len()), (0.0, 6));
        let (e5, g5) = s.ground_states(&IsingModel::constraint(5, 1.0).unwrap()).unwrap();
        assert_eq!((e5, g5.len()), (1.0, 20));
    }

    #[test]
    fn samples_only_ground_states() {
        let m = IsingModel::constraint(4, 1.0).unwrap();
        let set = ExactSampler::new().sample(&m, &SamplerConfig::new(100, 3)).unwrap();
        assert_eq!(set.total_reads(), 100);
        assert!(set.records().iter().all(|r| imbalance(&r.spins).unwrap() == 0));
        assert_eq!(set, ExactSampler::new().sample(&m, &SamplerConfig::new(100, 3)).unwrap());
    }

    #[test]
    fn ground_energy_matches_naive_minimum() {
        let g = Graph::erdos_renyi(10, 0.5, 5).unwrap();
        let m = IsingModel::graph_partitioning(&g, 2.0, 1.0).unwrap();
        let naive = (0..1u64 << 10).map(|b| m.energy(&spins_from_bits(b, 10)).unwrap()).fold(f64::INFINITY, f64::min);
        let (ground, states) = ExactSampler::new().ground_states(&m).unwrap();
        assert!((ground - naive).abs() < 1e-9);
        for &s in &states {
            assert!((m.energy(&spins_from_bits(s, 10)).unwrap() - naive).abs() < 1e-9);
        }
    }

    #[test]
    fn block_boundaries_do_not_matter() {
        // 17 variables forces several enumeration blocks.
        let m = IsingModel::constraint(17, 1.0).unwrap();
        let (e, states) = ExactSampler { exec: Exec::Sequential }.ground_states(&m).unwrap();
        assert_eq!(e, 1.0);
        assert_eq!(states.len(), 2 * 24_310);
        assert!(states.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_large_models() {
        let m = IsingModel::new(MAX_EXACT_VARIABLES + 1);
        assert!(matches!(
            ExactSampler::new().sample(&m, &SamplerConfig::new(1, 0)),
            Err(Error::TooLargeForEnumeration { .. })
        ));
        assert!(ExactSampler::new().sample(&IsingModel::new(0), &SamplerConfig::new(1, 0)).is_err());
    }
}
