use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use hetpart::anneal::AnnealSchedule;
use hetpart::predictor::{evaluate_model, split_train_eval, write_samples_csv, ErrorReport, GroupBy, TrainingSample};
use hetpart::rng::{seeded, substream};
use hetpart::strategies::{compare, run_em, run_eml, run_sam, run_saml, Baselines};
use hetpart::sweep::{argmin_fraction, fraction_sweep, sweep_template, sweep_to_csv, SweepPoint};
use hetpart::{ComparisonReport, Hyperparameters, Method, StrategyResult, TreeEnsemble, Workload};

use crate::manifest::{load_model, load_samples, Inputs, RunManifest};
use crate::output::{OutputDir, DATA_DIR, MODELS_DIR, REPORTS_DIR, TRACES_DIR};
use crate::{
    Cli, Command, CompareArgs, EvalModelArgs, GenerateArgs, MethodArg, ReportArgs, RunArgs, ScheduleArgs, SweepArgs,
    TrainArgs,
};

pub const TRAINING_FILE: &str = "training.csv";
pub const TRAIN_SPLIT_FILE: &str = "train.csv";
pub const EVAL_SPLIT_FILE: &str = "eval.csv";
pub const MODEL_FILE: &str = "model.json";

/// Default iteration budget of a single `run`.
pub const DEFAULT_ITERATIONS: usize = 1000;

/// Random streams derived from the run seed.
const GENERATE_STREAM: u64 = 1;
const SPLIT_STREAM: u64 = 2;

/// Sweep settings used by `report`: (file stem, workload, host threads).
pub const REPORT_SWEEPS: [(&str, f64, u32); 3] = [
    ("sweep_small_48", 190.0, 48),
    ("sweep_large_48", 3250.0, 48),
    ("sweep_large_4", 3250.0, 4),
];

/// Merges the manifest named by `--manifest` with the global flags.
pub fn manifest_from_cli(cli: &Cli) -> Result<RunManifest> {
    let mut m = match &cli.manifest {
        Some(p) => RunManifest::load(p)?,
        None => RunManifest::default(),
    };
    if cli.space.is_some() {
        m.space = cli.space.clone();
    }
    if cli.platform.is_some() {
        m.platform = cli.platform.clone();
    }
    if cli.seed.is_some() {
        m.seed = cli.seed;
    }
    if cli.out.is_some() {
        m.out = cli.out.clone();
    }
    Ok(m)
}

/// Parses the command line, runs the command and removes its partial outputs
/// on failure.
pub fn execute(cli: Cli) -> Result<()> {
    let manifest = manifest_from_cli(&cli)?;
    let inputs = Inputs::resolve(&manifest)?;
    let out = OutputDir::new(inputs.out.clone());
    let result = dispatch(&inputs, &out, &cli.command);
    if result.is_err() {
        out.rollback();
    }
    result
}

fn dispatch(inputs: &Inputs, out: &OutputDir, command: &Command) -> Result<()> {
    match command {
        Command::Sweep(a) => {
            let points = cmd_sweep(inputs, out, a)?;
            print!("{}", sweep_table(&points));
        }
        Command::Generate(a) => {
            let samples = cmd_generate(inputs, out, a)?;
            println!(
                "{} samples -> {}",
                samples.len(),
                out.path(DATA_DIR, TRAINING_FILE).display()
            );
        }
        Command::Train(a) => {
            let model = cmd_train(inputs, out, a)?;
            println!(
                "{} trees over {} features -> {}",
                model.trees.len(),
                model.encoding.width(),
                out.path(MODELS_DIR, MODEL_FILE).display()
            );
        }
        Command::EvalModel(a) => print!("{}", cmd_eval_model(inputs, out, a)?.to_table()),
        Command::Run(a) => {
            let r = cmd_run(inputs, out, a)?;
            println!("{}: {}", r.method.as_str(), r.chosen);
            println!(
                "energy {:.4} s (reported {:.4} s), {} evaluations",
                r.true_energy_s, r.reported_energy_s, r.evaluations_used
            );
        }
        Command::Compare(a) => print!("{}", cmd_compare(inputs, out, a)?.to_table()),
        Command::Report(a) => print!("{}", cmd_report(inputs, out, a)?),
    }
    Ok(())
}

/// Energy over the sweep fractions; writes `reports/<name>`.
pub fn cmd_sweep(inputs: &Inputs, out: &OutputDir, args: &SweepArgs) -> Result<Vec<SweepPoint>> {
    let space = &inputs.space;
    let pick = |v: &[u32]| *v.iter().max().expect("non-empty");
    let template = sweep_template(
        args.host_threads.unwrap_or_else(|| pick(space.host_threads())),
        args.host_affinity
            .as_deref()
            .unwrap_or(space.host_affinities()[0].as_str()),
        args.device_threads.unwrap_or_else(|| pick(space.device_threads())),
        args.device_affinity
            .as_deref()
            .unwrap_or(space.device_affinities()[0].as_str()),
    );
    let points = fraction_sweep(&inputs.platform, Workload::new(args.workload)?, &template)?;
    out.write(REPORTS_DIR, &args.name, sweep_to_csv(&points).as_bytes())?;
    Ok(points)
}

pub fn sweep_table(points: &[SweepPoint]) -> String {
    let mut s = format!(
        "{:>8} {:>10} {:>10} {:>10} {:>6}\n",
        "host %", "host [s]", "device [s]", "energy [s]", "norm"
    );
    for p in points {
        let _ = writeln!(
            s,
            "{:>8} {:>10.4} {:>10.4} {:>10.4} {:>6.2}",
            p.host_fraction, p.t_host_s, p.t_device_s, p.energy_s, p.normalized
        );
    }
    if let Some(f) = argmin_fraction(points) {
        let _ = writeln!(s, "best host fraction: {f}%");
    }
    s
}

/// Simulated training samples; writes `data/training.csv`.
pub fn cmd_generate(inputs: &Inputs, out: &OutputDir, args: &GenerateArgs) -> Result<Vec<TrainingSample>> {
    let platform = inputs.platform.with_noise(args.noise.unwrap_or(inputs.noise))?;
    let space = match &args.training_space {
        Some(p) => crate::manifest::load_space(p)?,
        None => inputs.training_space.clone(),
    };
    let workloads = match &args.workloads {
        Some(ws) => ws
            .iter()
            .map(|&w| Workload::new(w))
            .collect::<hetpart::Result<Vec<_>>>()?,
        None => inputs.workloads.clone(),
    };
    let mut rng = substream(inputs.seed, GENERATE_STREAM);
    let samples = platform.generate_training_data(&space, &workloads, &mut rng)?;
    out.write(DATA_DIR, TRAINING_FILE, &samples_csv(&samples)?)?;
    Ok(samples)
}

fn samples_csv(samples: &[TrainingSample]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_samples_csv(samples, &mut buf)?;
    Ok(buf)
}

fn existing(path: PathBuf, what: &str) -> Result<PathBuf> {
    if !path.exists() {
        bail!("{what} {} does not exist", path.display());
    }
    Ok(path)
}

fn training_data_path(inputs: &Inputs, out: &OutputDir, explicit: Option<&Path>) -> Result<PathBuf> {
    match explicit.or(inputs.training_data.as_deref()) {
        Some(p) => existing(p.to_path_buf(), "training data"),
        None => existing(out.path(DATA_DIR, TRAINING_FILE), "training data"),
    }
}

fn model_path(inputs: &Inputs, out: &OutputDir, explicit: Option<&Path>) -> Result<PathBuf> {
    match explicit.or(inputs.model.as_deref()) {
        Some(p) => existing(p.to_path_buf(), "model"),
        None => existing(out.path(MODELS_DIR, MODEL_FILE), "model"),
    }
}

/// Splits the samples in half, fits the model on one half and writes
/// `data/train.csv`, `data/eval.csv` and `models/model.json`.
pub fn cmd_train(inputs: &Inputs, out: &OutputDir, args: &TrainArgs) -> Result<TreeEnsemble> {
    let samples = load_samples(&training_data_path(inputs, out, args.data.as_deref())?)?;
    train_from(inputs, out, args, &samples)
}

fn train_from(inputs: &Inputs, out: &OutputDir, args: &TrainArgs, samples: &[TrainingSample]) -> Result<TreeEnsemble> {
    let defaults = Hyperparameters::default();
    let hp = Hyperparameters {
        n_trees: args.trees.unwrap_or(defaults.n_trees),
        max_depth: args.depth.unwrap_or(defaults.max_depth),
        min_samples_leaf: args.min_leaf.unwrap_or(defaults.min_samples_leaf),
        shrinkage: args.shrinkage.unwrap_or(defaults.shrinkage),
    };
    let (train, eval) = split_train_eval(samples, &mut substream(inputs.seed, SPLIT_STREAM))?;
    let model = TreeEnsemble::train(&train, hp)?;
    out.write(DATA_DIR, TRAIN_SPLIT_FILE, &samples_csv(&train)?)?;
    out.write(DATA_DIR, EVAL_SPLIT_FILE, &samples_csv(&eval)?)?;
    out.write(MODELS_DIR, MODEL_FILE, model.to_json().as_bytes())?;
    Ok(model)
}

/// Prediction error on held-out samples; writes `reports/model_error.csv`.
pub fn cmd_eval_model(inputs: &Inputs, out: &OutputDir, args: &EvalModelArgs) -> Result<ErrorReport> {
    let by: GroupBy = args.group_by.parse().context("invalid --group-by")?;
    let model = load_model(&model_path(inputs, out, args.model.as_deref())?)?;
    let data = match &args.data {
        Some(p) => existing(p.clone(), "evaluation data")?,
        None => existing(out.path(DATA_DIR, EVAL_SPLIT_FILE), "evaluation data")?,
    };
    let report = evaluate_model(&model, &load_samples(&data)?, by)?;
    out.write(REPORTS_DIR, "model_error.csv", report.to_csv().as_bytes())?;
    Ok(report)
}

fn schedule_from(args: &ScheduleArgs) -> AnnealSchedule {
    let mut s = AnnealSchedule {
        initial_temperature: args.t0,
        min_temperature: args.t_min,
        ..Default::default()
    };
    match (args.iterations, args.cooling_rate) {
        (Some(n), _) => s.iteration_budget = Some(n),
        (None, Some(rate)) => s.cooling_rate = rate,
        (None, None) => s.iteration_budget = Some(DEFAULT_ITERATIONS),
    }
    s
}

pub const RUN_HEADER: &str =
    "method,budget,seed,h_threads,h_aff,d_threads,d_aff,fraction,evals,reported_energy_s,true_energy_s";

pub fn run_to_csv(r: &StrategyResult) -> String {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let c = &r.chosen;
    format!(
        "{RUN_HEADER}\n{},{},{},{},{},{},{},{},{},{},{}\n",
        r.method.as_str(),
        opt(r.budget.map(|b| b.to_string())),
        opt(r.seed.map(|s| s.to_string())),
        c.host_threads,
        c.host_affinity,
        c.device_threads,
        c.device_affinity,
        c.host_fraction,
        r.evaluations_used,
        r.reported_energy_s,
        r.true_energy_s
    )
}

/// One strategy run; writes `reports/run_<method>.csv` and, for the annealing
/// methods, `traces/<method>_<budget>_seed<seed>.csv`.
pub fn cmd_run(inputs: &Inputs, out: &OutputDir, args: &RunArgs) -> Result<StrategyResult> {
    let method: Method = args.method.into();
    let workload = match args.workload {
        Some(w) => Workload::new(w)?,
        None => inputs.workload,
    };
    let schedule = schedule_from(&args.schedule);
    let (space, platform) = (&inputs.space, &inputs.platform);
    let mut rng = seeded(inputs.seed);
    let model = || -> Result<TreeEnsemble> { load_model(&model_path(inputs, out, args.model.as_deref())?) };
    let mut result = match method {
        Method::Em => run_em(space, platform, workload)?,
        Method::Eml => run_eml(space, &model()?, platform, workload)?,
        Method::Sam => run_sam(space, platform, workload, &schedule, &mut rng)?,
        Method::Saml => run_saml(space, &model()?, platform, workload, &schedule, &mut rng)?,
    };
    if method.uses_annealing() {
        result.seed = Some(inputs.seed);
    }
    let name = method.as_str().to_lowercase();
    out.write(REPORTS_DIR, &format!("run_{name}.csv"), run_to_csv(&result).as_bytes())?;
    if let Some(trace) = &result.trace {
        let budget = result.budget.map_or_else(|| "t".to_string(), |b| b.to_string());
        out.write(
            TRACES_DIR,
            &format!("{name}_{budget}_seed{}.csv", inputs.seed),
            trace.to_csv().as_bytes(),
        )?;
    }
    Ok(result)
}

/// All strategies over the budget grid, with seeds `seed, seed + 1, ...`.
/// Writes `reports/comparison.csv`, `comparison_runs.csv` and
/// `comparison.txt`.
pub fn cmd_compare(inputs: &Inputs, out: &OutputDir, args: &CompareArgs) -> Result<ComparisonReport> {
    let model = if args.no_ml {
        None
    } else {
        let path =
            model_path(inputs, out, args.model.as_deref()).context("EML and SAML need a model (or pass --no-ml)")?;
        Some(load_model(&path)?)
    };
    compare_with(inputs, out, args, model.as_ref())
}

fn compare_with(
    inputs: &Inputs,
    out: &OutputDir,
    args: &CompareArgs,
    model: Option<&TreeEnsemble>,
) -> Result<ComparisonReport> {
    let workload = match args.workload {
        Some(w) => Workload::new(w)?,
        None => inputs.workload,
    };
    let budgets = args.budgets.clone().unwrap_or_else(|| inputs.budgets.clone());
    if budgets.is_empty() || budgets.contains(&0) {
        bail!("budgets must be a non-empty list of positive iteration counts");
    }
    let seeds = args.seeds.unwrap_or(inputs.seeds);
    if seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let (space, platform) = (&inputs.space, &inputs.platform);

    let mut results = vec![run_em(space, platform, workload)?];
    if let Some(m) = model {
        results.push(run_eml(space, m, platform, workload)?);
    }
    for &budget in &budgets {
        let base = AnnealSchedule {
            initial_temperature: args.t0,
            min_temperature: args.t_min,
            ..AnnealSchedule::with_budget(budget)
        };
        for i in 0..seeds as u64 {
            let seed = inputs.seed.wrapping_add(i);
            let mut r = run_sam(space, platform, workload, &base, &mut seeded(seed))?;
            r.seed = Some(seed);
            results.push(r);
            if let Some(m) = model {
                let mut r = run_saml(space, m, platform, workload, &base, &mut seeded(seed))?;
                r.seed = Some(seed);
                results.push(r);
            }
        }
    }
    let report = compare(&results, Baselines::compute(space, platform, workload)?)?;
    out.write(REPORTS_DIR, "comparison.csv", report.to_csv().as_bytes())?;
    out.write(REPORTS_DIR, "comparison_runs.csv", report.runs_to_csv().as_bytes())?;
    out.write(REPORTS_DIR, "comparison.txt", report.to_table().as_bytes())?;
    Ok(report)
}

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().with_context(|| format!("stage `{name}` failed"))
}

/// Full pipeline: generate, train, eval-model, EM/SAM/SAML runs, compare and
/// the three reference sweeps. Returns the printed summary.
pub fn cmd_report(inputs: &Inputs, out: &OutputDir, args: &ReportArgs) -> Result<String> {
    let mut text = String::new();
    let samples = stage("generate", || cmd_generate(inputs, out, &GenerateArgs::default()))?;
    let _ = writeln!(text, "generated {} training samples", samples.len());

    let model = stage("train", || train_from(inputs, out, &TrainArgs::default(), &samples))?;
    let _ = writeln!(text, "trained {} trees", model.trees.len());

    let errors = stage("eval-model", || {
        cmd_eval_model(
            inputs,
            out,
            &EvalModelArgs {
                group_by: "side-threads".into(),
                ..Default::default()
            },
        )
    })?;
    let _ = writeln!(text, "\nprediction error\n{}", errors.to_table());

    let run = |method| RunArgs {
        method,
        workload: None,
        model: None,
        schedule: ScheduleArgs {
            t0: None,
            cooling_rate: None,
            t_min: None,
            iterations: None,
        },
    };
    let em = stage("run em", || cmd_run(inputs, out, &run(MethodArg::Em)))?;
    let _ = writeln!(text, "EM optimum: {} ({:.4} s)", em.chosen, em.true_energy_s);
    for (name, method) in [("run sam", MethodArg::Sam), ("run saml", MethodArg::Saml)] {
        let r = stage(name, || cmd_run(inputs, out, &run(method)))?;
        let _ = writeln!(
            text,
            "{} at {} iterations: {} ({:.4} s)",
            r.method.as_str(),
            DEFAULT_ITERATIONS,
            r.chosen,
            r.true_energy_s
        );
    }
    text.push('\n');

    let cmp_args = CompareArgs {
        budgets: args.budgets.clone(),
        seeds: args.seeds,
        ..Default::default()
    };
    let report = stage("compare", || compare_with(inputs, out, &cmp_args, Some(&model)))?;
    text.push_str(&report.to_table());

    for (stem, workload, host_threads) in REPORT_SWEEPS {
        let points = stage("sweep", || {
            cmd_sweep(
                inputs,
                out,
                &SweepArgs {
                    workload,
                    host_threads: Some(host_threads),
                    device_threads: None,
                    host_affinity: None,
                    device_affinity: None,
                    name: format!("{stem}.csv"),
                },
            )
        })?;
        let _ = writeln!(
            text,
            "\nsweep workload {workload}, {host_threads} host threads: best host fraction {}%",
            argmin_fraction(&points).unwrap_or_default()
        );
    }
    Ok(text)
}
