use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gp_debias::debias::constraint_cache_path;
use gp_debias::experiments::{
    load_cached_constraint, run_comparison, run_debias_experiment, solve, ExperimentConfig, Formulation, SamplerSpec,
};
use gp_debias::{default_weights, CouplerSet, DebiasConfig, Exec, Graph, HardwareBiasModel, SamplerConfig};

#[derive(Parser)]
#[command(name = "gp-debias", version, about = "Measure and correct constraint bias in Ising graph partitioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded Erdős–Rényi graph as JSON.
    GenGraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the default synthetic hardware bias model as JSON.
    GenBiasModel {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Debias the balance constraint; writes trajectory, histograms and the cached constraint.
    Debias {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        debias: DebiasArgs,
        /// Reads per debias iteration.
        #[arg(long, default_value_t = 1000)]
        reads: usize,
        /// Also write every iteration's bias report to bias_reports.jsonl.
        #[arg(long)]
        dump_reports: bool,
    },
    /// Solve one graph with the original or the corrected formulation.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "original")]
        formulation: Formulation,
        #[arg(long, default_value = "sa")]
        sampler: SamplerSpec,
        #[arg(long)]
        bias_model: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        reads: usize,
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "A")]
        a: Option<f64>,
        #[arg(long = "B")]
        b: Option<f64>,
        /// Corrected constraint file (CouplerSet JSON).
        #[arg(long, conflicts_with = "cache_dir")]
        constraint: Option<PathBuf>,
        /// Directory holding constraints cached by `debias`.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Seed the cached debias run was started with (defaults to --seed).
        #[arg(long)]
        cache_seed: Option<u64>,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare best feasible cuts of the original and corrected formulations.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        debias: DebiasArgs,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0.05)]
        p_min: f64,
        #[arg(long, default_value_t = 0.95)]
        p_max: f64,
        /// Evaluation reads per formulation and instance.
        #[arg(long, default_value_t = 1000)]
        reads: usize,
        /// Reads per debias iteration.
        #[arg(long, default_value_t = 1000)]
        debias_reads: usize,
        /// Use this corrected constraint instead of running a debias pass.
        #[arg(long, conflicts_with = "per_instance")]
        constraint: Option<PathBuf>,
        /// Debias a separate constraint for every instance.
        #[arg(long)]
        per_instance: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long = "A")]
    a: Option<f64>,
    #[arg(long = "B")]
    b: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "biased-sa")]
    sampler: SamplerSpec,
    #[arg(long)]
    bias_model: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Run all sampling on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct DebiasArgs {
    #[arg(long, default_value_t = 10.0)]
    k: f64,
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
}

fn load_bias(path: Option<&Path>, spec: SamplerSpec) -> Result<SamplerSpec> {
    match (path, spec) {
        (None, spec) => Ok(spec),
        (Some(p), SamplerSpec::BiasedSa(_)) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(SamplerSpec::BiasedSa(Some(HardwareBiasModel::from_json(&text)?)))
        }
        (Some(_), _) => bail!("--bias-model only applies to --sampler biased-sa"),
    }
}

fn weights(n: usize, a: Option<f64>, b: Option<f64>) -> (f64, f64) {
    let (da, db) = default_weights(n);
    (a.unwrap_or(da), b.unwrap_or(db))
}

fn experiment(common: Common, debias: DebiasArgs, debias_reads: usize) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(&common.out_dir);
    (cfg.a, cfg.b) = weights(common.n, common.a, common.b);
    cfg.n = common.n;
    cfg.base_seed = common.seed;
    cfg.sampler = load_bias(common.bias_model.as_deref(), common.sampler)?;
    cfg.eval_sweeps = common.sweeps;
    cfg.exec = if common.sequential { Exec::Sequential } else { Exec::Parallel };
    cfg.debias = DebiasConfig {
        k: debias.k,
        tau: debias.tau,
        sigma: debias.sigma,
        reads_per_iteration: debias_reads,
        max_iterations: debias.max_iters,
        seed: common.seed,
        sweeps: common.sweeps,
        beta_range: None,
    };
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenGraph { n, p, seed, out } => {
            let g = Graph::erdos_renyi(n, p, seed)?;
            g.save(&out)?;
            eprintln!("wrote {} ({} vertices, {} edges)", out.display(), n, g.edge_count());
        }
        Command::GenBiasModel { n, seed, out } => {
            let model = gp_debias::experiments::default_hardware(n, seed);
            write_or_print(Some(&out), &model.to_json()?)?;
        }
        Command::Debias { common, debias, reads, dump_reports } => {
            let mut cfg = experiment(common, debias, reads)?;
            cfg.dump_reports = dump_reports;
            let outcome = run_debias_experiment(&cfg)?;
            let s = &outcome.summary;
            eprintln!(
                "{:?} after {} updates: total |b| {:.3} -> {:.3}, max |b| {:.3} -> {:.3}",
                s.termination,
                s.updates,
                s.initial_total_abs_quadratic,
                s.final_total_abs_quadratic,
                s.initial_max_abs_quadratic,
                s.final_max_abs_quadratic
            );
            eprintln!("corrected constraint: {}", outcome.constraint_path.display());
        }
        Command::Solve {
            graph,
            formulation,
            sampler,
            bias_model,
            reads,
            sweeps,
            seed,
            a,
            b,
            constraint,
            cache_dir,
            cache_seed,
            out,
        } => {
            let g = Graph::load(&graph)?;
            let (a, b) = weights(g.n(), a, b);
            let spec = load_bias(bias_model.as_deref(), sampler)?;
            let cache_seed = cache_seed.unwrap_or(seed);
            let sampler = spec.build(g.n(), cache_seed, Exec::Parallel)?;
            let constraint = match (formulation, constraint, cache_dir) {
                (Formulation::Original, _, _) => None,
                (Formulation::Corrected, Some(path), _) => Some(CouplerSet::load(&path)?),
                (Formulation::Corrected, None, Some(dir)) => {
                    let mut lookup = ExperimentConfig::new(&dir);
                    lookup.base_seed = cache_seed;
                    let debias_seed = lookup.debias_config().seed;
                    Some(load_cached_constraint(&dir, g.n(), &sampler.fingerprint(), debias_seed)?)
                }
                (Formulation::Corrected, None, None) => {
                    let expected = constraint_cache_path(Path::new("<cache-dir>"), g.n(), &sampler.fingerprint(), 0);
                    bail!(
                        "the corrected formulation needs --constraint or --cache-dir (cached files look like {})",
                        expected.display()
                    );
                }
            };
            let cfg = SamplerConfig { num_reads: reads, seed, sweeps, beta_range: None };
            let result = solve(&g, formulation, constraint.as_ref(), a, b, sampler.as_ref(), &cfg)?;
            write_or_print(out.as_deref(), &serde_json::to_string_pretty(&result)?)?;
        }
        Command::Compare { common, debias, instances, p_min, p_max, reads, debias_reads, constraint, per_instance } => {
            let mut cfg = experiment(common, debias, debias_reads)?;
            cfg.instances = instances;
            cfg.p_range = (p_min, p_max);
            cfg.eval_reads = reads;
            cfg.per_instance_debias = per_instance;
            let constraint = constraint.map(|p| CouplerSet::load(&p)).transpose()?;
            let outcome = run_comparison(&cfg, constraint.as_ref())?;
            let s = &outcome.summary;
            eprintln!(
                "{} compared ({} skipped): {} wins, {} losses, {} ties; mean difference {:.3}, mean original cut {:.3}",
                s.compared, s.skipped, s.wins, s.losses, s.ties, s.mean_difference, s.mean_original_cut
            );
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
