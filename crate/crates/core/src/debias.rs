//! Measuring sampling bias on the balance constraint and correcting it by
//! iteratively nudging the couplers.
//!
//! For a constraint-only model every balanced assignment has the same energy,
//! so an unbiased sampler should put any two variables on the same side about
//! half of the time. The quadratic bias `b_ij` is the observed same-side
//! frequency minus 0.5; a positive value means the pair's coupler is too weak
//! and gets raised by `k * b_ij`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::derive_seed;
use crate::graph::Graph;
use crate::ising::{assemble_corrected, CouplerSet, IsingModel, Pair};
use crate::samplers::{SampleSet, Sampler, SamplerConfig};

/// Per-pair and per-variable sampling bias measured from one batch of reads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub n: usize,
    /// `b_ij = n_ij / N - 0.5`, `n_ij` the reads with `s_i = s_j`.
    #[serde(with = "pair_list")]
    pub quadratic: BTreeMap<Pair, f64>,
    /// `b_i = m_i / N - 0.5`, `m_i` the reads with `s_i = +1`.
    pub linear: Vec<f64>,
    pub total_abs_quadratic: f64,
    pub max_abs_quadratic: f64,
    pub reads_used: usize,
}

impl BiasReport {
    /// Tallies the reads of `samples` (weighted by occurrence count) over the
    /// given pairs.
    pub fn from_samples(pairs: impl IntoIterator<Item = Pair>, samples: &SampleSet) -> Result<Self> {
        let n = samples.n();
        let reads = samples.total_reads();
        if reads == 0 {
            return Err(Error::InvalidParameter("cannot measure bias from zero reads".into()));
        }
        let pairs: Vec<Pair> = pairs.into_iter().collect();
        if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= j || j >= n) {
            return Err(Error::DimensionMismatch(format!("pair ({i}, {j}) invalid for {n} variables")));
        }
        let mut same = vec![0usize; pairs.len()];
        let mut plus = vec![0usize; n];
        for record in samples.records() {
            let s = &record.spins;
            for (count, &(i, j)) in same.iter_mut().zip(&pairs) {
                if s[i] == s[j] {
                    *count += record.count;
                }
            }
            for (count, &spin) in plus.iter_mut().zip(s) {
                if spin == 1 {
                    *count += record.count;
                }
            }
        }
        let frac = |c: usize| c as f64 / reads as f64 - 0.5;
        let quadratic: BTreeMap<Pair, f64> = pairs.into_iter().zip(same).map(|(p, c)| (p, frac(c))).collect();
        let total_abs_quadratic = quadratic.values().map(|b| b.abs()).sum();
        let max_abs_quadratic = quadratic.values().fold(0.0f64, |m, b| m.max(b.abs()));
        Ok(BiasReport {
            n,
            quadratic,
            linear: plus.into_iter().map(frac).collect(),
            total_abs_quadratic,
            max_abs_quadratic,
            reads_used: reads,
        })
    }

    pub fn max_abs_linear(&self) -> f64 {
        self.linear.iter().fold(0.0f64, |m, b| m.max(b.abs()))
    }

    /// Every quadratic bias lies in `[-sigma, sigma]`.
    pub fn within(&self, sigma: f64) -> bool {
        self.quadratic.values().all(|&b| (-sigma..=sigma).contains(&b))
    }
}

/// Samples the purely quadratic model with couplers `couplers` and measures
/// the bias on each of its pairs.
pub fn calculate_bias<S: Sampler + ?Sized>(
    couplers: &CouplerSet,
    sampler: &S,
    cfg: &SamplerConfig,
) -> Result<BiasReport> {
    let samples = sampler.sample(&couplers.to_model(), cfg)?;
    BiasReport::from_samples(couplers.values().keys().copied(), &samples)
}

/// Adds `k * b_ij` to every coupler whose bias exceeds `tau` in magnitude;
/// all other couplers are copied unchanged.
pub fn update_terms(couplers: &CouplerSet, bias: &BiasReport, tau: f64, k: f64) -> Result<CouplerSet> {
    if couplers.n() != bias.n
        || couplers.len() != bias.quadratic.len()
        || couplers.values().keys().zip(bias.quadratic.keys()).any(|(a, b)| a != b)
    {
        return Err(Error::DimensionMismatch("couplers and bias report cover different pairs".into()));
    }
    let updated = couplers.values().iter().zip(bias.quadratic.values()).map(|((&pair, &j), &b)| {
        let j = if b.abs() > tau { j + k * b } else { j };
        (pair, j)
    });
    CouplerSet::from_pairs(couplers.n(), updated)
}

/// Knobs of the iterative correction loop plus the annealing settings used
/// for each measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebiasConfig {
    pub k: f64,
    /// Noise cutoff: biases at or below this magnitude are left alone.
    pub tau: f64,
    /// Stopping threshold on the largest bias magnitude.
    pub sigma: f64,
    pub reads_per_iteration: usize,
    /// Maximum number of coupler updates.
    pub max_iterations: usize,
    pub seed: u64,
    pub sweeps: usize,
    pub beta_range: Option<(f64, f64)>,
}

impl Default for DebiasConfig {
    fn default() -> Self {
        DebiasConfig {
            k: 10.0,
            tau: 0.05,
            sigma: 0.2,
            reads_per_iteration: 100,
            max_iterations: 500,
            seed: 0,
            sweeps: 1000,
            beta_range: None,
        }
    }
}

impl DebiasConfig {
    /// Same as the default but with the wider noise cutoff `tau = 0.15`.
    pub fn wide_cutoff() -> Self {
        DebiasConfig { tau: 0.15, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.k) && positive(self.tau) && positive(self.sigma)) {
            return Err(Error::InvalidParameter(format!(
                "k, tau and sigma must be positive (k = {}, tau = {}, sigma = {})",
                self.k, self.tau, self.sigma
            )));
        }
        if self.reads_per_iteration == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter("reads_per_iteration and max_iterations must be at least 1".into()));
        }
        if self.tau > self.sigma {
            log::warn!("noise cutoff tau = {} exceeds stopping threshold sigma = {}", self.tau, self.sigma);
        }
        Ok(())
    }

    /// Sampler settings for the measurement taken at `iteration`.
    pub fn sampler_config(&self, iteration: usize) -> SamplerConfig {
        SamplerConfig {
            num_reads: self.reads_per_iteration,
            seed: derive_seed(self.seed, &[iteration as u64]),
            sweeps: self.sweeps,
            beta_range: self.beta_range,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub total_abs_quadratic: f64,
    pub max_abs_quadratic: f64,
    /// Coupler values measured at this iteration, in [`DebiasTrajectory::pairs`] order.
    pub couplers: Vec<f64>,
}

/// Everything the correction loop observed, one entry per measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebiasTrajectory {
    pub pairs: Vec<Pair>,
    pub records: Vec<IterationRecord>,
    pub reports: Vec<BiasReport>,
    pub termination: Termination,
}

impl DebiasTrajectory {
    pub fn first_report(&self) -> &BiasReport {
        &self.reports[0]
    }

    pub fn last_report(&self) -> &BiasReport {
        self.reports.last().expect("trajectory has at least one measurement")
    }

    /// Number of coupler updates performed.
    pub fn updates(&self) -> usize {
        self.records.len() - 1
    }
}

/// Iterative quadratic bias reduction: measure, and while some `|b_ij|`
/// exceeds `sigma`, update the couplers and measure again, for at most
/// `cfg.max_iterations` updates.
pub fn debias_constraint<S: Sampler + ?Sized>(
    initial: &CouplerSet,
    cfg: &DebiasConfig,
    sampler: &S,
) -> Result<(CouplerSet, DebiasTrajectory)> {
    cfg.validate()?;
    let pairs: Vec<Pair> = initial.values().keys().copied().collect();
    let mut couplers = initial.clone();
    let mut records = Vec::new();
    let mut reports = Vec::new();
    let mut iteration = 0;
    loop {
        let report = calculate_bias(&couplers, sampler, &cfg.sampler_config(iteration))?;
        log::debug!(
            "iteration {iteration}: total |b| = {:.3}, max |b| = {:.3}",
            report.total_abs_quadratic,
            report.max_abs_quadratic
        );
        records.push(IterationRecord {
            iteration,
            total_abs_quadratic: report.total_abs_quadratic,
            max_abs_quadratic: report.max_abs_quadratic,
            couplers: couplers.values().values().copied().collect(),
        });
        let done = report.within(cfg.sigma);
        if done || iteration == cfg.max_iterations {
            reports.push(report);
            let termination = if done { Termination::Converged } else { Termination::IterationCap };
            return Ok((couplers, DebiasTrajectory { pairs, records, reports, termination }));
        }
        couplers = update_terms(&couplers, &report, cfg.tau, cfg.k)?;
        reports.push(report);
        iteration += 1;
    }
}

/// A debiased balance constraint, normalized to max |coefficient| = 1.
#[derive(Clone, Debug)]
pub struct CorrectedConstraint {
    pub couplers: CouplerSet,
    pub trajectory: DebiasTrajectory,
}

/// Debiases the `n`-variable balance constraint with weight `a` (all
/// couplers `2a`) and normalizes the result.
pub fn correct_constraint<S: Sampler + ?Sized>(
    n: usize,
    a: f64,
    cfg: &DebiasConfig,
    sampler: &S,
) -> Result<CorrectedConstraint> {
    let initial = IsingModel::constraint(n, a)?.couplers();
    let (couplers, trajectory) = debias_constraint(&initial, cfg, sampler)?;
    Ok(CorrectedConstraint { couplers: couplers.normalized()?, trajectory })
}

/// Where a corrected constraint for `n` variables is cached.
pub fn constraint_cache_path(dir: &Path, n: usize, sampler_fingerprint: &str, seed: u64) -> PathBuf {
    dir.join(format!("constraint-n{n}-{sampler_fingerprint}-seed{seed}.json"))
}

/// Debiases the constraint for `g.n()` variables, normalizes it and adds the
/// cut objective back. With `cache_dir`, the normalized constraint is also
/// written there for reuse on other graphs of the same size.
pub fn full_pipeline<S: Sampler + ?Sized>(
    g: &Graph,
    a: f64,
    b: f64,
    cfg: &DebiasConfig,
    sampler: &S,
    cache_dir: Option<&Path>,
) -> Result<IsingModel> {
    let corrected = correct_constraint(g.n(), a, cfg, sampler)?;
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        corrected.couplers.save(&constraint_cache_path(dir, g.n(), &sampler.fingerprint(), cfg.seed))?;
    }
    assemble_corrected(&corrected.couplers, g, a, b)
}

mod pair_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<Pair, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(map.iter().map(|(&(i, j), &v)| (i, j, v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Pair, f64>, D::Error> {
        Ok(Vec::<(usize, usize, f64)>::deserialize(d)?.into_iter().map(|(i, j, v)| ((i, j), v)).collect())
    }
}
