//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use gp_debias::debias::correct_constraint;
use gp_debias::experiments::{run_comparison, ExperimentConfig, SamplerSpec};
use gp_debias::spins::spins_from_bits;
use gp_debias::{
    assemble_corrected, calculate_bias, debias_constraint, default_weights, imbalance, is_balanced, update_terms,
    BiasReport, CouplerSet, DebiasConfig, ExactSampler, Graph, IsingModel, SampleSet, Sampler, SamplerConfig, Spin,
    Termination,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Debias settings shared by criteria 5 and 7.
fn debias_settings() -> DebiasConfig {
    DebiasConfig {
        k: 10.0,
        tau: 0.05,
        sigma: 0.2,
        reads_per_iteration: 1000,
        max_iterations: 200,
        ..Default::default()
    }
}

fn all_assignments(n: usize) -> impl Iterator<Item = Vec<Spin>> {
    (0..1u64 << n).map(move |b| spins_from_bits(b, n))
}

fn formulation_correctness() -> Verdict {
    let (ns, ps) = ([8, 10, 12], [0.3, 0.5, 0.7]);
    let mut last = String::new();
    for i in 0..20 {
        let (n, p) = (ns[i % 3], ps[(i / 3) % 3]);
        let g = Graph::erdos_renyi(n, p, 7000 + i as u64).map_err(|e| e.to_string())?;
        let (a, b) = default_weights(n);
        let m = IsingModel::graph_partitioning(&g, a, b).map_err(|e| e.to_string())?;
        let energies: Vec<(f64, Vec<Spin>)> = all_assignments(n).map(|s| (m.energy(&s).unwrap(), s)).collect();
        let ground = energies.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
        let brute = all_assignments(n).filter(|s| is_balanced(s).unwrap()).map(|s| g.cut_size(&s).unwrap()).min();
        for (e, s) in energies.iter().filter(|(e, _)| *e == ground) {
            let cut = g.cut_size(s).unwrap();
            if !is_balanced(s).unwrap() || Some(cut) != brute {
                return Err(format!(
                    "graph {i} (n={n}, p={p}): minimizer at energy {e} has cut {cut}, brute {brute:?}"
                ));
            }
        }
        last = format!("last graph n={n} p={p}: ground {ground}, balanced min cut {}", brute.unwrap());
    }
    Ok(format!("20 graphs, every global minimizer balanced with the brute-force cut ({last})"))
}

fn energy_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut max_err: f64 = 0.0;
    for model in 0..10 {
        let p = rng.random_range(0.1..0.9);
        let g = Graph::erdos_renyi(10, p, 100 + model).map_err(|e| e.to_string())?;
        let (a, b) = (rng.random_range(0.5..5.0), rng.random_range(0.1..3.0));
        let m = IsingModel::graph_partitioning(&g, a, b).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let s: Vec<Spin> = (0..10).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let imb = imbalance(&s).unwrap() as f64;
            let expected = a * imb * imb + b * g.cut_size(&s).unwrap() as f64;
            max_err = max_err.max((m.energy(&s).unwrap() - expected).abs());
        }
    }
    check(max_err <= 1e-9, format!("1000 assignments, max |error| = {max_err:.3e} (tolerance 1e-9)"))
}

fn bias_metric_calibration() -> Verdict {
    let couplers = IsingModel::constraint(16, 2.0).map_err(|e| e.to_string())?.couplers();
    let report = calculate_bias(&couplers, &ExactSampler::default(), &SamplerConfig::new(10_000, 3))
        .map_err(|e| e.to_string())?;
    let max_lin = report.max_abs_linear();
    let mean_quad = report.quadratic.values().sum::<f64>() / report.quadratic.len() as f64;
    check(
        report.max_abs_quadratic <= 0.02 && max_lin <= 0.02,
        format!(
            "max |b_ij| = {:.4}, max |b_i| = {max_lin:.4} (limit 0.02 each); mean b_ij = {mean_quad:.4}, \
             uniform over balanced states gives -1/(n-1)/2 = {:.4}",
            report.max_abs_quadratic,
            -1.0 / 30.0
        ),
    )
}

fn update_rule_exactness() -> Verdict {
    let worked = {
        let j = CouplerSet::from_pairs(2, [((0, 1), 18.0)]).unwrap();
        let b = report_for(2, [((0, 1), 0.3)]);
        update_terms(&j, &b, 0.05, 10.0).unwrap().get(0, 1)
    };
    if worked != 21.0 {
        return Err(format!("J = 18, b = 0.3, k = 10 gave {worked}, expected 21"));
    }
    let strategy = (2usize..10).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            Just(n),
            prop::collection::vec(-100.0f64..100.0, pairs),
            prop::collection::vec(-0.5f64..=0.5, pairs),
            0.01f64..50.0,
            0.001f64..0.5,
        )
    });
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&strategy, |(n, js, bs, k, tau)| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let j = CouplerSet::from_pairs(n, pairs.iter().copied().zip(js.iter().copied())).unwrap();
            let b = report_for(n, pairs.iter().copied().zip(bs.iter().copied()));
            let out = update_terms(&j, &b, tau, k).unwrap();
            for (idx, &(p, q)) in pairs.iter().enumerate() {
                let expected = if bs[idx].abs() > tau { js[idx] + k * bs[idx] } else { js[idx] };
                prop_assert_eq!(out.get(p, q).to_bits(), expected.to_bits());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("J = 18, b = 0.3, k = 10 gives 21; 1000 random (J, b, k, tau) cases bit-exact".into())
}

fn report_for(n: usize, values: impl IntoIterator<Item = ((usize, usize), f64)>) -> BiasReport {
    let quadratic: BTreeMap<_, _> = values.into_iter().collect();
    BiasReport {
        n,
        total_abs_quadratic: quadratic.values().map(|v: &f64| v.abs()).sum(),
        max_abs_quadratic: quadratic.values().map(|v: &f64| v.abs()).fold(0.0, f64::max),
        quadratic,
        linear: vec![0.0; n],
        reads_used: 1,
    }
}

fn debias_effectiveness() -> Verdict {
    let mut lines = Vec::new();
    let (mut halved, mut converged) = (0, 0);
    for seed in 1..=5u64 {
        let mut cfg = ExperimentConfig::new("unused");
        cfg.n = 16;
        cfg.a = 2.0;
        cfg.base_seed = seed;
        cfg.sampler = SamplerSpec::BiasedSa(None);
        cfg.debias = debias_settings();
        let sampler = cfg.build_sampler().map_err(|e| e.to_string())?;
        let traj = correct_constraint(16, 2.0, &cfg.debias_config(), &sampler).map_err(|e| e.to_string())?.trajectory;
        let (first, last) = (traj.first_report().total_abs_quadratic, traj.last_report().total_abs_quadratic);
        let ratio = last / first;
        halved += usize::from(ratio <= 0.5);
        converged += usize::from(traj.termination == Termination::Converged);
        lines.push(format!(
            "seed {seed}: {first:.2} -> {last:.2} (x{ratio:.2}) {:?} after {}",
            traj.termination,
            traj.updates()
        ));
    }
    check(halved == 5 && converged >= 4, format!("halved {halved}/5, converged {converged}/5; {}", lines.join("; ")))
}

fn identity_correction() -> Verdict {
    let n = 10;
    let g = Graph::erdos_renyi(n, 0.5, 77).map_err(|e| e.to_string())?;
    let (a, b) = default_weights(n);
    let ones = CouplerSet::uniform(n, 1.0).unwrap();
    let original = IsingModel::graph_partitioning(&g, a, b).unwrap();
    let corrected = assemble_corrected(&ones, &g, a, b).unwrap();
    let max_err = all_assignments(n)
        .map(|s| (original.energy(&s).unwrap() - corrected.energy(&s).unwrap() - n as f64 * a).abs())
        .fold(0.0, f64::max);
    check(max_err <= 1e-9, format!("all 1024 assignments, max |E - E' - nA| = {max_err:.3e} (tolerance 1e-9)"))
}

fn end_to_end_improvement() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::new(dir.path());
    cfg.instances = 100;
    cfg.n = 16;
    cfg.p_range = (0.05, 0.95);
    cfg.base_seed = 1;
    cfg.eval_reads = 1000;
    cfg.sampler = SamplerSpec::BiasedSa(None);
    cfg.debias = debias_settings();
    let s = run_comparison(&cfg, None).map_err(|e| e.to_string())?.summary;
    check(
        s.wins > s.losses && s.mean_difference >= 0.0,
        format!(
            "{} compared, {} skipped: wins {}, losses {}, ties {}; mean difference {:.3} on mean original cut {:.2}",
            s.compared, s.skipped, s.wins, s.losses, s.ties, s.mean_difference, s.mean_original_cut
        ),
    )
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        if entry.path().is_file() {
            out.insert(entry.file_name().into_string().unwrap(), fs::read(entry.path()).unwrap());
        }
    }
    out
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path().to_string_lossy().into_owned();
    CouplerSet::uniform(16, 1.0).unwrap().save(&tmp.path().join("ones.json")).map_err(|e| e.to_string())?;
    // (name, arguments, files or directories it writes)
    let commands = [
        ("gen-graph", "gen-graph --n 16 --p 0.5 --seed 42 --out {r}/g.json", "g.json"),
        ("gen-bias-model", "gen-bias-model --n 8 --seed 4 --out {r}/bias.json", "bias.json"),
        (
            "debias",
            "debias --n 8 --seed 4 --bias-model {r}/bias.json --sweeps 200 --max-iters 10 --dump-reports \
             --out-dir {r}/debias",
            "debias",
        ),
        ("solve original", "solve --graph {r}/g.json --reads 200 --seed 9", ""),
        (
            "solve corrected",
            "solve --graph {r}/g.json --formulation corrected --sampler exact --reads 50 --constraint {r}/ones.json",
            "",
        ),
        (
            "compare",
            "compare --n 8 --instances 5 --reads 200 --sweeps 200 --max-iters 10 --seed 4 --out-dir {r}/compare",
            "compare",
        ),
    ];

    let exe = env!("CARGO_BIN_EXE_gp-debias");
    let run = |args: &[String], output: &Path| -> Result<Vec<u8>, String> {
        let out = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
        }
        let mut bytes = out.stdout;
        if output.is_dir() {
            for (name, content) in snapshot(output) {
                bytes.extend(name.into_bytes());
                bytes.extend(content);
            }
        } else if output.is_file() {
            bytes.extend(fs::read(output).map_err(|e| e.to_string())?);
        }
        Ok(bytes)
    };
    let mut checked = Vec::new();
    for (name, template, output) in commands {
        let args: Vec<String> = template.replace("{r}", &root).split_whitespace().map(String::from).collect();
        let output = tmp.path().join(output);
        let first = run(&args, &output)?;
        if output.is_dir() && output != tmp.path() {
            fs::remove_dir_all(&output).map_err(|e| e.to_string())?;
        } else if output.is_file() {
            fs::remove_file(&output).map_err(|e| e.to_string())?;
        }
        let second = run(&args, &output)?;
        if first != second {
            return Err(format!("{name}: outputs differ between identical runs"));
        }
        checked.push(format!("{name} ({} bytes)", first.len()));
    }
    Ok(format!("byte-identical reruns: {}", checked.join(", ")))
}

struct AllUp;

impl Sampler for AllUp {
    fn sample(&self, model: &IsingModel, cfg: &SamplerConfig) -> gp_debias::Result<SampleSet> {
        SampleSet::from_reads(model, (0..cfg.num_reads).map(|_| vec![1; model.n()]))
    }

    fn fingerprint(&self) -> String {
        "all-up".into()
    }
}

fn termination_safety() -> Verdict {
    let initial = IsingModel::constraint(8, 1.0).unwrap().couplers();
    let cfg = DebiasConfig { max_iterations: 500, ..Default::default() };
    let (couplers, traj) = debias_constraint(&initial, &cfg, &AllUp).map_err(|e| e.to_string())?;
    let finite = couplers.values().values().all(|v| v.is_finite());
    check(
        traj.termination == Termination::IterationCap && traj.updates() == cfg.max_iterations && finite,
        format!(
            "{:?} after {} updates, couplers finite: {finite} (max {})",
            traj.termination,
            traj.updates(),
            couplers.max_abs()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("formulation correctness", formulation_correctness),
        ("energy identity", energy_identity),
        ("bias-metric calibration", bias_metric_calibration),
        ("update-rule exactness", update_rule_exactness),
        ("debias effectiveness", debias_effectiveness),
        ("identity-correction round trip", identity_correction),
        ("end-to-end improvement", end_to_end_improvement),
        ("determinism", determinism),
        ("termination safety", termination_safety),
    ];
    let mut failed = Vec::new();
    for (idx, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {} [{tag}] {name} ({secs:.1}s): {detail}", idx + 1);
        if verdict.is_err() {
            failed.push(idx + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: {} of {} criteria failed: {failed:?}", failed.len(), criteria.len());
        std::process::exit(1);
    }
}
