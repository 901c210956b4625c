//! End-to-end experiment drivers: a debias run with trajectory and histogram
//! output, the original-versus-corrected comparison over random instances,
//! and single-instance solving.
//!
//! Every random choice is derived from the base seed and the instance id, so
//! rerunning with the same configuration reproduces all files byte for byte
//! regardless of thread count.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::debias::{
    constraint_cache_path, correct_constraint, BiasReport, CorrectedConstraint, DebiasConfig, Termination,
};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, rng_from_seed, Exec};
use crate::graph::{is_balanced, Graph};
use crate::ising::{assemble_corrected, default_weights, CouplerSet, IsingModel};
use crate::samplers::{
    BiasedSampler, ExactSampler, HardwareBiasModel, SampleSet, Sampler, SamplerConfig, SimulatedAnnealer,
};
use crate::spins::Spin;

/// Width of a bias histogram bin; bins tile [-0.5, 0.5].
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;
const HISTOGRAM_BINS: usize = 20;

// Labels mixed into derived seeds.
const TAG_EDGE_PROBABILITY: u64 = 1;
const TAG_GRAPH: u64 = 2;
const TAG_EVALUATION: u64 = 3;
const TAG_DEBIAS: u64 = 4;
const TAG_HARDWARE: u64 = 5;

/// Which sampler an experiment uses.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplerSpec {
    Exact,
    Sa,
    /// Simulated annealing behind emulated hardware. `None` draws the default
    /// synthetic bias model from the experiment seed.
    BiasedSa(Option<HardwareBiasModel>),
}

impl FromStr for SamplerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SamplerSpec::Exact),
            "sa" => Ok(SamplerSpec::Sa),
            "biased-sa" => Ok(SamplerSpec::BiasedSa(None)),
            other => {
                Err(Error::InvalidParameter(format!("unknown sampler {other:?} (expected exact, sa or biased-sa)")))
            }
        }
    }
}

impl SamplerSpec {
    pub fn build(&self, n: usize, seed: u64, exec: Exec) -> Result<Box<dyn Sampler>> {
        Ok(match self {
            SamplerSpec::Exact => Box::new(ExactSampler { exec }),
            SamplerSpec::Sa => Box::new(SimulatedAnnealer { exec }),
            SamplerSpec::BiasedSa(bias) => {
                let bias = bias.clone().unwrap_or_else(|| default_hardware(n, seed));
                Box::new(BiasedSampler::new(SimulatedAnnealer { exec }, bias)?)
            }
        })
    }
}

/// The synthetic device used when no bias model file is given.
pub fn default_hardware(n: usize, seed: u64) -> HardwareBiasModel {
    HardwareBiasModel::default_experiment(n, derive_seed(seed, &[TAG_HARDWARE]))
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub instances: usize,
    pub n: usize,
    pub p_range: (f64, f64),
    pub base_seed: u64,
    pub a: f64,
    pub b: f64,
    pub eval_reads: usize,
    pub eval_sweeps: usize,
    pub debias: DebiasConfig,
    pub sampler: SamplerSpec,
    pub out_dir: PathBuf,
    /// Debias a fresh constraint for every instance instead of sharing one.
    pub per_instance_debias: bool,
    /// Also write every iteration's bias report as JSON lines.
    pub dump_reports: bool,
    pub exec: Exec,
}

impl ExperimentConfig {
    /// Desk-scale defaults: 100 instances on 16 vertices, 1000 evaluation
    /// reads, `p` uniform in [0.05, 0.95]. Debiasing uses 1000 reads per
    /// iteration; at 100 the update is dominated by sampling noise for k = 10.
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        let n = 16;
        let (a, b) = default_weights(n);
        ExperimentConfig {
            instances: 100,
            n,
            p_range: (0.05, 0.95),
            base_seed: 0,
            a,
            b,
            eval_reads: 1000,
            eval_sweeps: 1000,
            debias: DebiasConfig { reads_per_iteration: 1000, ..DebiasConfig::default() },
            sampler: SamplerSpec::BiasedSa(None),
            out_dir: out_dir.into(),
            per_instance_debias: false,
            dump_reports: false,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.p_range;
        if self.instances == 0 {
            return Err(Error::InvalidParameter("instance count must be at least 1".into()));
        }
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::InvalidParameter(format!("p range ({lo}, {hi}) must lie within [0, 1]")));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter("n must be at least 2".into()));
        }
        if self.eval_reads == 0 || self.eval_sweeps == 0 {
            return Err(Error::InvalidParameter("evaluation reads and sweeps must be at least 1".into()));
        }
        self.debias.validate()
    }

    pub fn build_sampler(&self) -> Result<Box<dyn Sampler>> {
        self.sampler.build(self.n, self.base_seed, self.exec)
    }

    /// The debias settings with the seed derived from the base seed.
    pub fn debias_config(&self) -> DebiasConfig {
        DebiasConfig { seed: derive_seed(self.base_seed, &[TAG_DEBIAS]), ..self.debias.clone() }
    }
}

/// Counts of bias values per bin, first and last measurement side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub first: usize,
    pub last: usize,
}

/// Bins values in [-0.5, 0.5] into 20 bins of width 0.05; 0.5 lands in the
/// last bin.
pub fn bias_histogram(values: impl IntoIterator<Item = f64>) -> Vec<usize> {
    let mut counts = vec![0; HISTOGRAM_BINS];
    for v in values {
        let bin = ((v + 0.5) / HISTOGRAM_BIN_WIDTH + 1e-9).floor().clamp(0.0, (HISTOGRAM_BINS - 1) as f64);
        counts[bin as usize] += 1;
    }
    counts
}

fn histogram_rows(first: Vec<usize>, last: Vec<usize>) -> Vec<HistogramRow> {
    first
        .into_iter()
        .zip(last)
        .enumerate()
        .map(|(k, (first, last))| HistogramRow {
            bin_lo: -0.5 + k as f64 * HISTOGRAM_BIN_WIDTH,
            bin_hi: -0.5 + (k + 1) as f64 * HISTOGRAM_BIN_WIDTH,
            first,
            last,
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebiasSummary {
    pub n: usize,
    pub pairs: usize,
    pub sampler: String,
    pub termination: Termination,
    pub updates: usize,
    pub initial_total_abs_quadratic: f64,
    pub final_total_abs_quadratic: f64,
    pub initial_max_abs_quadratic: f64,
    pub final_max_abs_quadratic: f64,
    pub initial_max_abs_linear: f64,
    pub final_max_abs_linear: f64,
    pub constraint_file: String,
}

pub struct DebiasOutcome {
    pub corrected: CorrectedConstraint,
    pub summary: DebiasSummary,
    pub constraint_path: PathBuf,
}

/// Debiases the constraint for `cfg.n` and writes into `cfg.out_dir`:
/// `trajectory.csv`, `couplers.csv`, `hist_quadratic.csv`, `hist_linear.csv`,
/// `debias_summary.json`, the cached normalized constraint and, optionally,
/// `bias_reports.jsonl`.
pub fn run_debias_experiment(cfg: &ExperimentConfig) -> Result<DebiasOutcome> {
    cfg.validate()?;
    ensure_dir(&cfg.out_dir)?;
    let sampler = cfg.build_sampler()?;
    let debias_cfg = cfg.debias_config();
    let corrected = correct_constraint(cfg.n, cfg.a, &debias_cfg, &sampler)?;
    let traj = &corrected.trajectory;
    let dir = &cfg.out_dir;

    #[derive(Serialize)]
    struct TrajectoryRow {
        iteration: usize,
        total_abs_quadratic: f64,
        max_abs_quadratic: f64,
        max_abs_linear: f64,
    }
    write_csv(
        &dir.join("trajectory.csv"),
        traj.records.iter().zip(&traj.reports).map(|(r, rep)| TrajectoryRow {
            iteration: r.iteration,
            total_abs_quadratic: r.total_abs_quadratic,
            max_abs_quadratic: r.max_abs_quadratic,
            max_abs_linear: rep.max_abs_linear(),
        }),
    )?;

    #[derive(Serialize)]
    struct CouplerRow {
        iteration: usize,
        i: usize,
        j: usize,
        value: f64,
    }
    write_csv(
        &dir.join("couplers.csv"),
        traj.records.iter().flat_map(|r| {
            traj.pairs.iter().zip(&r.couplers).map(|(&(i, j), &value)| CouplerRow {
                iteration: r.iteration,
                i,
                j,
                value,
            })
        }),
    )?;

    let (first, last) = (traj.first_report(), traj.last_report());
    let quad = |r: &BiasReport| bias_histogram(r.quadratic.values().copied());
    let lin = |r: &BiasReport| bias_histogram(r.linear.iter().copied());
    write_csv(&dir.join("hist_quadratic.csv"), histogram_rows(quad(first), quad(last)))?;
    write_csv(&dir.join("hist_linear.csv"), histogram_rows(lin(first), lin(last)))?;

    if cfg.dump_reports {
        let path = dir.join("bias_reports.jsonl");
        let mut w = create(&path)?;
        for report in &traj.reports {
            serde_json::to_writer(&mut w, report)?;
            writeln!(w).map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }

    let constraint_path = constraint_cache_path(dir, cfg.n, &sampler.fingerprint(), debias_cfg.seed);
    corrected.couplers.save(&constraint_path)?;

    let summary = DebiasSummary {
        n: cfg.n,
        pairs: traj.pairs.len(),
        sampler: sampler.fingerprint(),
        termination: traj.termination,
        updates: traj.updates(),
        initial_total_abs_quadratic: first.total_abs_quadratic,
        final_total_abs_quadratic: last.total_abs_quadratic,
        initial_max_abs_quadratic: first.max_abs_quadratic,
        final_max_abs_quadratic: last.max_abs_quadratic,
        initial_max_abs_linear: first.max_abs_linear(),
        final_max_abs_linear: last.max_abs_linear(),
        constraint_file: constraint_path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
    };
    write_json(&dir.join("debias_summary.json"), &summary)?;
    Ok(DebiasOutcome { corrected, summary, constraint_path })
}

/// Best feasible cut of one instance under both formulations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub instance: usize,
    pub n: usize,
    pub p: f64,
    pub graph_seed: u64,
    pub edges: usize,
    pub original_cut: Option<usize>,
    pub corrected_cut: Option<usize>,
    /// `original_cut - corrected_cut`; positive means the corrected model won.
    pub difference: Option<i64>,
    pub original_feasible: usize,
    pub corrected_feasible: usize,
}

impl ComparisonRecord {
    pub fn skipped(&self) -> bool {
        self.difference.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub instances: usize,
    pub compared: usize,
    pub skipped: usize,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub mean_difference: f64,
    pub mean_original_cut: f64,
    pub mean_corrected_cut: f64,
}

impl ComparisonSummary {
    pub fn from_records(records: &[ComparisonRecord]) -> Self {
        let compared: Vec<&ComparisonRecord> = records.iter().filter(|r| !r.skipped()).collect();
        let count = |f: fn(i64) -> bool| compared.iter().filter(|r| f(r.difference.unwrap())).count();
        let mean = |f: &dyn Fn(&ComparisonRecord) -> f64| {
            if compared.is_empty() {
                0.0
            } else {
                compared.iter().map(|r| f(r)).sum::<f64>() / compared.len() as f64
            }
        };
        ComparisonSummary {
            instances: records.len(),
            compared: compared.len(),
            skipped: records.len() - compared.len(),
            wins: count(|d| d > 0),
            losses: count(|d| d < 0),
            ties: count(|d| d == 0),
            mean_difference: mean(&|r| r.difference.unwrap() as f64),
            mean_original_cut: mean(&|r| r.original_cut.unwrap() as f64),
            mean_corrected_cut: mean(&|r| r.corrected_cut.unwrap() as f64),
        }
    }
}

pub struct ComparisonOutcome {
    pub records: Vec<ComparisonRecord>,
    pub summary: ComparisonSummary,
}

/// A balanced read and its cut.
pub type BestRead = (Vec<Spin>, usize);

/// Number of balanced reads and the smallest cut among them.
pub fn best_feasible(g: &Graph, samples: &SampleSet) -> Result<(usize, Option<BestRead>)> {
    let mut feasible = 0;
    let mut best: Option<BestRead> = None;
    for r in samples.records() {
        if !is_balanced(&r.spins)? {
            continue;
        }
        feasible += r.count;
        let cut = g.cut_size(&r.spins)?;
        if best.as_ref().is_none_or(|(_, c)| cut < *c) {
            best = Some((r.spins.clone(), cut));
        }
    }
    Ok((feasible, best))
}

/// Instance `id` of a comparison: its edge probability and graph seed.
pub fn instance_graph(cfg: &ExperimentConfig, id: usize) -> Result<(f64, u64, Graph)> {
    let (lo, hi) = cfg.p_range;
    let mut rng = rng_from_seed(derive_seed(cfg.base_seed, &[id as u64, TAG_EDGE_PROBABILITY]));
    let p = if lo < hi { rng.random_range(lo..hi) } else { lo };
    let graph_seed = derive_seed(cfg.base_seed, &[id as u64, TAG_GRAPH]);
    Ok((p, graph_seed, Graph::erdos_renyi(cfg.n, p, graph_seed)?))
}

/// Solves every instance with the original and the corrected formulation
/// using the same read budget and seeds, keeps only balanced reads, and
/// records the best cuts. `constraint` is the shared corrected constraint;
/// when `None` one is produced by a debias run (or one per instance with
/// `per_instance_debias`). Writes `comparison.csv` and
/// `comparison_summary.json` into `cfg.out_dir`.
pub fn run_comparison(cfg: &ExperimentConfig, constraint: Option<&CouplerSet>) -> Result<ComparisonOutcome> {
    cfg.validate()?;
    ensure_dir(&cfg.out_dir)?;
    let sampler = cfg.build_sampler()?;
    let shared = match (constraint, cfg.per_instance_debias) {
        (Some(c), _) => {
            if c.n() != cfg.n {
                return Err(Error::DimensionMismatch(format!("constraint has {} variables, n = {}", c.n(), cfg.n)));
            }
            Some(c.clone())
        }
        (None, false) => {
            let debias_cfg = cfg.debias_config();
            let corrected = correct_constraint(cfg.n, cfg.a, &debias_cfg, &sampler)?;
            corrected.couplers.save(&constraint_cache_path(
                &cfg.out_dir,
                cfg.n,
                &sampler.fingerprint(),
                debias_cfg.seed,
            ))?;
            Some(corrected.couplers)
        }
        (None, true) => None,
    };

    let records =
        cfg.exec.map_indexed(cfg.instances, |id| compare_instance(cfg, sampler.as_ref(), shared.as_ref(), id));
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = ComparisonSummary::from_records(&records);
    write_csv(&cfg.out_dir.join("comparison.csv"), &records)?;
    write_json(&cfg.out_dir.join("comparison_summary.json"), &summary)?;
    Ok(ComparisonOutcome { records, summary })
}

fn compare_instance(
    cfg: &ExperimentConfig,
    sampler: &dyn Sampler,
    shared: Option<&CouplerSet>,
    id: usize,
) -> Result<ComparisonRecord> {
    let (p, graph_seed, g) = instance_graph(cfg, id)?;
    let couplers = match shared {
        Some(c) => c.clone(),
        None => {
            let seed = derive_seed(cfg.base_seed, &[id as u64, TAG_DEBIAS]);
            correct_constraint(cfg.n, cfg.a, &DebiasConfig { seed, ..cfg.debias.clone() }, sampler)?.couplers
        }
    };
    let original = IsingModel::graph_partitioning(&g, cfg.a, cfg.b)?;
    let corrected = assemble_corrected(&couplers, &g, cfg.a, cfg.b)?;
    // Both formulations see the same random stream.
    let sampler_cfg = SamplerConfig {
        num_reads: cfg.eval_reads,
        seed: derive_seed(cfg.base_seed, &[id as u64, TAG_EVALUATION]),
        sweeps: cfg.eval_sweeps,
        beta_range: None,
    };
    let (original_feasible, original_best) = best_feasible(&g, &sampler.sample(&original, &sampler_cfg)?)?;
    let (corrected_feasible, corrected_best) = best_feasible(&g, &sampler.sample(&corrected, &sampler_cfg)?)?;
    let original_cut = original_best.map(|(_, c)| c);
    let corrected_cut = corrected_best.map(|(_, c)| c);
    let difference = match (original_cut, corrected_cut) {
        (Some(o), Some(c)) => Some(o as i64 - c as i64),
        _ => {
            log::warn!("instance {id}: no balanced reads in at least one formulation, skipped");
            None
        }
    };
    Ok(ComparisonRecord {
        instance: id,
        n: cfg.n,
        p,
        graph_seed,
        edges: g.edge_count(),
        original_cut,
        corrected_cut,
        difference,
        original_feasible,
        corrected_feasible,
    })
}

/// Reads back a `comparison.csv`.
pub fn read_comparison_csv(path: &Path) -> Result<Vec<ComparisonRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Original,
    Corrected,
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Formulation::Original),
            "corrected" => Ok(Formulation::Corrected),
            other => Err(Error::InvalidParameter(format!("unknown formulation {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub formulation: Formulation,
    pub total_reads: usize,
    pub feasible_reads: usize,
    /// Lowest-cut balanced read, if any read was balanced.
    pub best: Option<Vec<Spin>>,
    pub cut: Option<usize>,
    pub balanced: bool,
}

/// Samples one graph under the chosen formulation and returns the balanced
/// read with the smallest cut. The corrected formulation needs `constraint`.
pub fn solve(
    g: &Graph,
    formulation: Formulation,
    constraint: Option<&CouplerSet>,
    a: f64,
    b: f64,
    sampler: &dyn Sampler,
    sampler_cfg: &SamplerConfig,
) -> Result<SolveOutcome> {
    let model = match formulation {
        Formulation::Original => IsingModel::graph_partitioning(g, a, b)?,
        Formulation::Corrected => {
            let c =
                constraint.ok_or_else(|| Error::InvalidParameter("corrected formulation needs a constraint".into()))?;
            assemble_corrected(c, g, a, b)?
        }
    };
    let samples = sampler.sample(&model, sampler_cfg)?;
    let (feasible_reads, best) = best_feasible(g, &samples)?;
    Ok(SolveOutcome {
        formulation,
        total_reads: samples.total_reads(),
        feasible_reads,
        balanced: best.is_some(),
        cut: best.as_ref().map(|(_, c)| *c),
        best: best.map(|(s, _)| s),
    })
}

/// Loads the cached corrected constraint for `n` from `dir`.
pub fn load_cached_constraint(dir: &Path, n: usize, sampler_fingerprint: &str, seed: u64) -> Result<CouplerSet> {
    let path = constraint_cache_path(dir, n, sampler_fingerprint, seed);
    if !path.exists() {
        return Err(Error::MissingConstraint { n, path });
    }
    let c = CouplerSet::load(&path)?;
    if c.n() != n {
        return Err(Error::DimensionMismatch(format!("cached constraint has {} variables, expected {n}", c.n())));
    }
    Ok(c)
}
