//! Command-line driver: a TOML run configuration, flag overrides and the
//! `train`, `predict`, `evaluate`, `tune`, `simulate` and `verify` commands.
//!
//! Every command writes its files under `run.out_dir` and returns the list
//! of files written. Errors map to exit codes through [`Error::exit_code`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::persist::{load_model, save_model, ModelFile};
use crate::data::{load_csv, load_features, CsvSchema, Dataset, GeneratorSpec, Normalizer};
use crate::error::{Error, Result};
use crate::losses::{BentLoss, LossKind};
use crate::optim::{Classifier, KernelSpec, Penalty, SolverOptions};
use crate::predict::{evaluate, evaluate_with, predict_refine, EvalReport};
use crate::theory::{prop1_sweep, verify_region_sandwich, SandwichConfig};
use crate::tune::{
    a_bounds, log_grid, tune, ACandidate, ModelSpec, TuneResult, TuningGrid, Validation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Train,
    Predict,
    Evaluate,
    Tune,
    Simulate,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub command: Option<Command>,
    pub seed: u64,
    pub replicates: usize,
    pub out_dir: PathBuf,
    /// Worker threads for replicates and grid cells; all cores when unset.
    pub threads: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            command: None,
            seed: 2024,
            replicates: 1,
            out_dir: PathBuf::from("out"),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub train: Option<PathBuf>,
    pub tune: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Rows to predict; the label column is optional here.
    pub input: Option<PathBuf>,
    /// Model file read by `predict` and `evaluate`.
    pub model: Option<PathBuf>,
    pub regular_model: Option<PathBuf>,
    /// Prediction output (default `<out_dir>/predictions.csv`).
    pub output: Option<PathBuf>,
    /// Fold count when no tuning file is given (default 5).
    pub folds: Option<usize>,
    /// Standardize features with training-set statistics.
    pub normalize: bool,
    pub csv: CsvSchema,
    /// Simulated example (1, 2 or 3) for `simulate`.
    pub example: Option<u8>,
    pub n_train: Option<usize>,
    pub n_tune: Option<usize>,
    pub n_test: Option<usize>,
    pub noise_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub loss: String,
    pub penalty: String,
    /// `linear` fits a linear model; `gaussian` a Gaussian kernel machine.
    pub kernel: String,
    pub bandwidth: f64,
    pub d: Option<f64>,
    pub a: Vec<ACandidate>,
    /// Threshold used by `predict`/`evaluate` instead of the stored one.
    pub delta: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            loss: "hinge".into(),
            penalty: "l2".into(),
            kernel: "linear".into(),
            bandwidth: 1.0,
            d: None,
            a: vec![ACandidate::A1, ACandidate::A2],
            delta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSection {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    /// Explicit `lambda` values; overrides the log grid when nonempty.
    pub lambdas: Vec<f64>,
    pub delta_fractions: Vec<f64>,
    pub regular: bool,
}

impl Default for TuneSection {
    fn default() -> Self {
        let g = TuningGrid::new(0.5);
        TuneSection {
            lambda_min: 1e-4,
            lambda_max: 1e2,
            lambda_count: 30,
            lambdas: Vec::new(),
            delta_fractions: g.delta_fractions,
            regular: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Class counts and reject costs of the region comparison; inadmissible
    /// pairs are skipped.
    pub ks: Vec<usize>,
    pub ds: Vec<f64>,
    pub samples: usize,
    pub prop1_ks: Vec<usize>,
    pub prop1_slopes: Vec<f64>,
    pub prop1_samples: usize,
    pub zero_tol: f64,
    /// Negative control: replace `a1` by `1.5 * a1`.
    pub corrupt_a1: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            ks: vec![2, 3, 4],
            ds: vec![0.3, 0.5, 0.6],
            samples: 100_000,
            prop1_ks: vec![3, 4, 5],
            prop1_slopes: vec![1.2, 2.0, 3.0],
            prop1_samples: 200,
            zero_tol: 1e-5,
            corrupt_a1: false,
        }
    }
}

/// Contents of a run configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub data: DataSection,
    pub model: ModelSection,
    pub tune: TuneSection,
    pub solver: SolverOptions,
    pub verify: VerifySection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn d(&self) -> f64 {
        self.model.d.unwrap_or(0.5)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let kernel = match self.model.kernel.to_ascii_lowercase().as_str() {
            "linear" => None,
            "gaussian" => Some(KernelSpec::gaussian(self.model.bandwidth)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown kernel '{other}' (expected linear or gaussian)"
                )))
            }
        };
        Ok(ModelSpec {
            loss: LossKind::parse(&self.model.loss)?,
            penalty: Penalty::parse(&self.model.penalty)?,
            kernel,
            opts: self.solver.clone(),
        })
    }

    pub fn grid(&self) -> TuningGrid {
        let t = &self.tune;
        let lambdas = if t.lambdas.is_empty() {
            log_grid(t.lambda_min, t.lambda_max, t.lambda_count)
        } else {
            t.lambdas.clone()
        };
        TuningGrid {
            lambdas,
            delta_fractions: t.delta_fractions.clone(),
            a_candidates: self.model.a.clone(),
            d: self.d(),
            regular: t.regular,
        }
    }

    pub fn generator(&self) -> Result<GeneratorSpec> {
        let id = self
            .data
            .example
            .ok_or_else(|| Error::Config("simulate needs data.example (1, 2 or 3)".into()))?;
        let mut g = GeneratorSpec::example(id, self.run.seed)?;
        let d = &self.data;
        g.n_train = d.n_train.unwrap_or(g.n_train);
        g.n_tune = d.n_tune.unwrap_or(g.n_tune);
        g.n_test = d.n_test.unwrap_or(g.n_test);
        g.noise_dim = d.noise_dim.unwrap_or(g.noise_dim);
        g.validate()?;
        Ok(g)
    }

    /// Checks the invariants that do not need the data: known names, a
    /// command, and that every referenced input file exists.
    pub fn validate(&self) -> Result<()> {
        if self.run.command.is_none() {
            return Err(Error::Config(
                "no command given (--command or run.command)".into(),
            ));
        }
        if self.run.replicates == 0 {
            return Err(Error::Config("run.replicates must be at least 1".into()));
        }
        self.model_spec()?;
        let d = &self.data;
        for path in [
            &d.train,
            &d.tune,
            &d.test,
            &d.input,
            &d.model,
            &d.regular_model,
        ]
        .into_iter()
        .flatten()
        {
            if !path.is_file() {
                return Err(Error::Config(format!("file not found: {}", path.display())));
            }
        }
        Ok(())
    }
}

/// Command-line flags; each one overrides the matching config key.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "rrclass",
    version,
    about = "Margin classifiers with reject and refine options"
)]
pub struct Flags {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_parser = ["hinge", "dwd"])]
    pub loss: Option<String>,
    #[arg(long, value_parser = ["l1", "l2"])]
    pub penalty: Option<String>,
    #[arg(long, value_parser = ["linear", "gaussian"])]
    pub kernel: Option<String>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    /// Bending slope: a1, a2 or a number; repeat to tune over several.
    #[arg(long)]
    pub a: Vec<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub tune: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub regular_model: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub example: Option<u8>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_tune: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub noise_dim: Option<usize>,
    /// Run `verify` with the corrupted `a1` negative control.
    #[arg(long)]
    pub corrupt_a1: bool,
}

impl Flags {
    /// Loads the config file (if any) and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        fn set_opt<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        let r = &mut cfg.run;
        set_opt(&mut r.command, &self.command);
        set(&mut r.seed, &self.seed);
        set(&mut r.replicates, &self.replicates);
        set(&mut r.out_dir, &self.out_dir);
        set_opt(&mut r.threads, &self.threads);
        let m = &mut cfg.model;
        set(&mut m.loss, &self.loss);
        set(&mut m.penalty, &self.penalty);
        set(&mut m.kernel, &self.kernel);
        set(&mut m.bandwidth, &self.bandwidth);
        set_opt(&mut m.d, &self.d);
        set_opt(&mut m.delta, &self.delta);
        if !self.a.is_empty() {
            m.a = self
                .a
                .iter()
                .map(|s| ACandidate::parse(s))
                .collect::<Result<_>>()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        let d = &mut cfg.data;
        for (dst, src) in [
            (&mut d.train, &self.train),
            (&mut d.tune, &self.tune),
            (&mut d.test, &self.test),
            (&mut d.input, &self.input),
            (&mut d.model, &self.model),
            (&mut d.regular_model, &self.regular_model),
            (&mut d.output, &self.output),
        ] {
            set_opt(dst, src);
        }
        set_opt(&mut d.folds, &self.folds);
        d.normalize |= self.normalize;
        set_opt(&mut d.example, &self.example);
        set_opt(&mut d.n_train, &self.n_train);
        set_opt(&mut d.n_tune, &self.n_tune);
        set_opt(&mut d.n_test, &self.n_test);
        set_opt(&mut d.noise_dim, &self.noise_dim);
        cfg.verify.corrupt_a1 |= self.corrupt_a1;
        Ok(())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = match Flags::try_parse_from(args) {
        Ok(f) => f,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match flags.resolve().and_then(|cfg| run(&cfg)) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Validates `cfg` and runs its command inside a pool of `run.threads`
/// workers.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let job = || match cfg.run.command.expect("validated") {
        Command::Train => cmd_train(cfg),
        Command::Predict => cmd_predict(cfg),
        Command::Evaluate => cmd_evaluate(cfg),
        Command::Tune => cmd_tune(cfg),
        Command::Simulate => cmd_simulate(cfg).map(|s| s.files),
        Command::Verify => cmd_verify(cfg).map(|v| v.files),
    };
    match cfg.run.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(job),
        None => job(),
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    let dir = &cfg.run.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir.join(name))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn require<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a PathBuf> {
    p.as_ref()
        .ok_or_else(|| Error::Config(format!("missing data.{key} (--{})", key.replace('_', "-"))))
}

fn schema(cfg: &RunConfig, k: Option<usize>) -> CsvSchema {
    let mut s = cfg.data.csv.clone();
    if s.k.is_none() {
        s.k = k;
    }
    s
}

struct Tuned {
    result: TuneResult,
    normalizer: Option<Normalizer>,
    files: Vec<PathBuf>,
}

fn tune_files(cfg: &RunConfig) -> Result<Tuned> {
    let train_path = require(&cfg.data.train, "train")?;
    let mut train = load_csv(train_path, &schema(cfg, None))?;
    let mut tune_set = match &cfg.data.tune {
        Some(p) => Some(load_csv(p, &schema(cfg, Some(train.k())))?),
        None => None,
    };
    if let Some(t) = &tune_set {
        check_shape(&train, t)?;
    }
    let normalizer = if cfg.data.normalize {
        let nz = Normalizer::fit(&train)?;
        train = nz.transform(&train)?;
        tune_set = tune_set.map(|t| nz.transform(&t)).transpose()?;
        Some(nz)
    } else {
        None
    };
    let validation = match &tune_set {
        Some(t) => Validation::TuningSet(t),
        None => Validation::CrossValidation {
            folds: cfg.data.folds.unwrap_or(5),
            seed: cfg.run.seed,
        },
    };
    let result = tune(&train, validation, &cfg.grid(), &cfg.model_spec()?)?;
    for w in &result.warnings {
        log::warn!("{w}");
    }
    let grid = out_path(cfg, "grid.csv")?;
    result.write_cells_csv(create(&grid)?)?;
    let summary = out_path(cfg, "summary.txt")?;
    let mut text = String::new();
    for (k, v) in result.summary() {
        let _ = writeln!(text, "{k} {v}");
    }
    write_file(&summary, &text)?;
    Ok(Tuned {
        result,
        normalizer,
        files: vec![grid, summary],
    })
}

fn check_shape(train: &Dataset, other: &Dataset) -> Result<()> {
    if other.p() != train.p() {
        return Err(Error::data(format!(
            "feature count mismatch: training data has {}, other file has {}",
            train.p(),
            other.p()
        )));
    }
    if other.k() != train.k() {
        return Err(Error::data(format!(
            "class count mismatch: training data has {}, other file has {}",
            train.k(),
            other.k()
        )));
    }
    Ok(())
}

fn ensure_converged(result: &TuneResult) -> Result<()> {
    let fit = result.fit_for(result.best_cell());
    if fit.converged {
        Ok(())
    } else {
        Err(Error::NotConverged {
            what: format!("selected fit (lambda {}, a {})", fit.lambda, fit.a),
            residual: f64::NAN,
        })
    }
}

/// Tunes on the training file and writes the grid and summary.
pub fn cmd_tune(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let t = tune_files(cfg)?;
    ensure_converged(&t.result)?;
    Ok(t.files)
}

/// Tunes, then saves the selected model (`model.txt`) and the regular
/// classifier (`regular_model.txt`).
pub fn cmd_train(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let Tuned {
        result,
        normalizer,
        mut files,
    } = tune_files(cfg)?;
    let best = result.best_cell();
    let mut mf = ModelFile::new(result.best_model().clone());
    mf.normalizer = normalizer.clone();
    mf.delta = Some(best.delta);
    mf.meta.insert("d".into(), cfg.d().to_string());
    mf.meta.insert("a".into(), best.a_label.to_string());
    mf.meta
        .insert("delta_fraction".into(), best.delta_fraction.to_string());
    mf.meta
        .insert("validation_loss".into(), best.loss.to_string());
    let path = out_path(cfg, "model.txt")?;
    save_model(&path, &mf)?;
    files.push(path);
    if let Some(reg) = result.regular_model() {
        let mut rf = ModelFile::new(reg.clone());
        rf.normalizer = normalizer;
        rf.delta = Some(0.0);
        rf.meta.insert("d".into(), cfg.d().to_string());
        let path = out_path(cfg, "regular_model.txt")?;
        save_model(&path, &rf)?;
        files.push(path);
    }
    ensure_converged(&result)?;
    Ok(files)
}

fn model_path(cfg: &RunConfig) -> PathBuf {
    cfg.data
        .model
        .clone()
        .unwrap_or_else(|| cfg.run.out_dir.join("model.txt"))
}

fn check_features(mf: &ModelFile, p: usize) -> Result<()> {
    if p != mf.model.n_features() {
        return Err(Error::data(format!(
            "input has {p} features, model expects {}",
            mf.model.n_features()
        )));
    }
    Ok(())
}

fn apply_normalizer(mf: &ModelFile, x: Vec<f64>, p: usize) -> Result<Vec<f64>> {
    check_features(mf, p)?;
    Ok(match &mf.normalizer {
        Some(nz) => x
            .chunks(p.max(1))
            .flat_map(|r| nz.transform_row(r))
            .collect(),
        None => x,
    })
}

fn transform(mf: &ModelFile, data: Dataset) -> Result<Dataset> {
    check_features(mf, data.p())?;
    match &mf.normalizer {
        Some(nz) => nz.transform(&data),
        None => Ok(data),
    }
}

/// Writes one prediction per input row: a label, a comma-joined label set
/// or `REJECT`.
pub fn cmd_predict(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mf = load_model(model_path(cfg))?;
    let input = cfg
        .data
        .input
        .as_ref()
        .or(cfg.data.test.as_ref())
        .ok_or_else(|| Error::Config("missing data.input (--input)".into()))?;
    let (x, p) = load_features(input, &cfg.data.csv)?;
    let x = apply_normalizer(&mf, x, p)?;
    let delta = cfg.model.delta.or(mf.delta).unwrap_or(0.0);
    let preds: Vec<String> = x
        .par_chunks(p.max(1))
        .map(|row| predict_refine(&mf.model.margins(row), delta).to_string())
        .collect();
    let out = match &cfg.data.output {
        Some(p) => p.clone(),
        None => out_path(cfg, "predictions.csv")?,
    };
    let mut w = csv::Writer::from_writer(create(&out)?);
    let io = |e: csv::Error| Error::io(&out, std::io::Error::other(e));
    w.write_record(["prediction"]).map_err(io)?;
    for s in &preds {
        w.write_record([s]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(&out, e))?;
    Ok(vec![out])
}

/// Scores the model on the labelled test file (`eval.txt`, `eval_table.csv`).
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mf = load_model(model_path(cfg))?;
    let test_path = require(&cfg.data.test, "test")?;
    let test = load_csv(test_path, &schema(cfg, Some(mf.model.k())))?;
    let test = transform(&mf, test)?;
    let delta = cfg.model.delta.or(mf.delta).unwrap_or(0.0);
    let d = match (cfg.model.d, mf.meta.get("d")) {
        (Some(d), _) => d,
        (None, Some(s)) => s
            .parse()
            .map_err(|_| Error::data(format!("model file has a bad d '{s}'")))?,
        (None, None) => cfg.d(),
    };
    let report = match &cfg.data.regular_model {
        Some(p) => {
            let reg = load_model(p)?;
            evaluate_with(&mf.model, &reg.model, &test, delta, d)?
        }
        None => evaluate(&mf.model, &test, delta, d)?,
    };
    let kv = out_path(cfg, "eval.txt")?;
    let mut text = report.to_key_value();
    let _ = writeln!(text, "decomposition {}", report.decomposition());
    write_file(&kv, &text)?;
    let table = out_path(cfg, "eval_table.csv")?;
    report.write_table_csv(create(&table)?)?;
    Ok(vec![kv, table])
}

/// One simulated replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRow {
    pub replicate: u64,
    pub seed: u64,
    pub lambda: f64,
    pub a: f64,
    pub delta_fraction: f64,
    pub delta: f64,
    pub regular_lambda: Option<f64>,
    pub report: EvalReport,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub rows: Vec<ReplicateRow>,
    pub mean: EvalReport,
    pub files: Vec<PathBuf>,
}

/// Generate, tune on the tuning split and evaluate on the test split.
pub fn run_replicate(
    gen: &GeneratorSpec,
    replicate: u64,
    grid: &TuningGrid,
    spec: &ModelSpec,
) -> Result<ReplicateRow> {
    let s = gen.generate(replicate)?;
    let res = tune(&s.train, Validation::TuningSet(&s.tune), grid, spec)?;
    let best = res.best_cell().clone();
    let report = match res.regular_model() {
        Some(reg) => evaluate_with(res.best_model(), reg, &s.test, best.delta, grid.d)?,
        None => evaluate(res.best_model(), &s.test, best.delta, grid.d)?,
    };
    Ok(ReplicateRow {
        replicate,
        seed: gen.seed,
        lambda: best.lambda,
        a: best.a,
        delta_fraction: best.delta_fraction,
        delta: best.delta,
        regular_lambda: res.regular.map(|i| res.regular_fits[i].lambda),
        report,
    })
}

/// Runs `run.replicates` replicates in the work pool and writes
/// `replicates.csv`, `summary.txt` and `table.csv`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Simulation> {
    let gen = cfg.generator()?;
    let grid = cfg.grid();
    grid.validate(gen.k())?;
    let spec = cfg.model_spec()?;
    let rows: Vec<ReplicateRow> = (0..cfg.run.replicates as u64)
        .into_par_iter()
        .map(|r| {
            log::info!("replicate {r}");
            run_replicate(&gen, r, &grid, &spec).map_err(|e| Error::Replicate {
                replicate: r,
                seed: gen.seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let reports: Vec<EvalReport> = rows.iter().map(|r| r.report.clone()).collect();
    let mean = EvalReport::mean(&reports)?;

    let per_rep = out_path(cfg, "replicates.csv")?;
    write_replicates(&per_rep, &rows)?;
    let summary = out_path(cfg, "summary.txt")?;
    let mut text = format!(
        "example {}\nreplicates {}\nseed {}\nloss {}\npenalty {}\n",
        gen.example,
        rows.len(),
        gen.seed,
        cfg.model.loss,
        cfg.model.penalty
    );
    text.push_str(&mean.to_key_value());
    for set in mean.set_histogram.keys() {
        if let Some(s) = mean.set_share(set) {
            let name: Vec<String> = set.iter().map(usize::to_string).collect();
            let _ = writeln!(text, "share_{} {s}", name.join("_"));
        }
    }
    write_file(&summary, &text)?;
    let table = out_path(cfg, "table.csv")?;
    mean.write_table_csv(create(&table)?)?;
    Ok(Simulation {
        rows,
        mean,
        files: vec![per_rep, summary, table],
    })
}

fn write_replicates(path: &Path, rows: &[ReplicateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record([
        "replicate",
        "seed",
        "lambda",
        "a",
        "delta_fraction",
        "delta",
        "regular_lambda",
        "p1",
        "p2",
        "p3",
        "error_p1",
        "misrefine_p2",
        "rr_overall",
        "reject_overall",
        "regular_overall",
        "regular_error_p2",
        "sets",
    ])
    .map_err(io)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in rows {
        let e = &r.report;
        let sets: Vec<String> = e
            .set_histogram
            .iter()
            .map(|(s, v)| {
                let labels: Vec<String> = s.iter().map(usize::to_string).collect();
                format!("{}:{v}", labels.join(" "))
            })
            .collect();
        w.write_record([
            r.replicate.to_string(),
            r.seed.to_string(),
            r.lambda.to_string(),
            r.a.to_string(),
            r.delta_fraction.to_string(),
            r.delta.to_string(),
            opt(r.regular_lambda),
            e.p1.to_string(),
            e.p2.to_string(),
            e.p3.to_string(),
            opt(e.error_p1),
            opt(e.misrefine_p2),
            e.overall_0d1.to_string(),
            e.reject_only.overall.to_string(),
            e.regular.overall.to_string(),
            opt(e.regular.p2),
            sets.join(";"),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct Verification {
    /// One `PASS`/`FAIL` line per check.
    pub lines: Vec<String>,
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

/// Checks the reject-region sandwich for every admissible `(k, d)`, the
/// binary coincidence and the margin sign patterns, then writes
/// `verify.txt`. Any failure is reported as [`Error::Verification`] after
/// the file is written.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Verification> {
    let v = &cfg.verify;
    let mut lines = Vec::new();
    let mut passed = true;
    let mut record = |ok: bool, line: String| {
        passed &= ok;
        lines.push(format!("{} {line}", if ok { "PASS" } else { "FAIL" }));
    };
    for &k in &v.ks {
        for &d in &v.ds {
            let Ok((a1, a2)) = a_bounds(k, d) else {
                continue;
            };
            if !(a1 > 1.0) {
                continue;
            }
            let mut sc = SandwichConfig::new(k, d, v.samples, cfg.run.seed);
            if v.corrupt_a1 {
                sc.a_inner = Some(1.5 * a1);
            }
            let r = verify_region_sandwich(&sc)?;
            record(
                r.passed(),
                format!(
                    "sandwich k={k} d={d} a1={:.6} a2={a2:.6} inner_violations={} outer_violations={} witnesses={}",
                    r.a_inner,
                    r.inner_violations,
                    r.outer_violations,
                    if r.tight() { "found" } else { "missing" }
                ),
            );
            if k == 2 {
                record(
                    r.symmetric_difference == 0,
                    format!(
                        "binary k=2 d={d} a1=a2={a1:.6} disagreements={}",
                        r.symmetric_difference
                    ),
                );
            }
        }
    }
    for &k in &v.prop1_ks {
        for kind in [LossKind::BentHinge, LossKind::BentDwd] {
            for &a in &v.prop1_slopes {
                let loss = BentLoss::new(kind.clone(), a)?;
                let s = prop1_sweep(k, &loss, v.prop1_samples, cfg.run.seed, v.zero_tol)?;
                record(
                    s.passed(),
                    format!(
                        "sign-pattern k={k} loss={} a={a} checked={} boundary={} mismatches={}",
                        kind.name(),
                        s.checked,
                        s.skipped_boundary,
                        s.failures.len()
                    ),
                );
            }
        }
    }
    let path = out_path(cfg, "verify.txt")?;
    write_file(&path, &(lines.join("\n") + "\n"))?;
    let failed = lines.iter().filter(|l| l.starts_with("FAIL")).count();
    if !passed {
        return Err(Error::Verification(format!(
            "{failed} of {} checks failed (see {})",
            lines.len(),
            path.display()
        )));
    }
    Ok(Verification {
        lines,
        passed,
        files: vec![path],
    })
}
